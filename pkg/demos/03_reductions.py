"""Replacing a four-state cycle by one- and two-state cycles.

The VT reduction keeps velocity and cycle time, the VD reduction keeps
velocity and diffusion (when a positive solution exists), and the two-state
reduction keeps all three.
"""
from pathlib import Path

from hopred import (load_model, reduce_one_state_vd, reduce_one_state_vt, reduce_two_state,
                    transport_stats)
from hopred import two_state_aggregates
from hopred.errors import Infeasible, NoRealFactorization

models = Path(__file__).parent / "models"
model = load_model(models / "kinesin_like.json")
st = transport_stats(model)
print(f"original: V = {st.velocity:.6g}, D = {st.diffusion:.6g}, T = {st.period_mfpt:.6g}")

vt = reduce_one_state_vt(model)
print(f"VT : u_r = {vt.reduced.forward_rate:.6g}, w_r = {vt.reduced.backward_rate:.6g}, "
      f"errors {vt.preservation_error}")

try:
    vd = reduce_one_state_vd(model)
    print(f"VD : u_r = {vd.reduced.forward_rate:.6g}, w_r = {vd.reduced.backward_rate:.6g}, "
          f"errors {vd.preservation_error}")
except Infeasible as exc:
    print(f"VD : infeasible ({exc})")

agg = two_state_aggregates(model)
print(f"two-state aggregates: u = {agg.u:.6g}, w = {agg.w:.6g}, sigma = {agg.sigma:.6g}")
try:
    reduce_two_state(model)
except NoRealFactorization as exc:
    # the aggregates exist, but no pair of real rate pairs reproduces them
    print(f"two-state: {exc}")

reference = load_model(models / "reference_n2.json")
two = reduce_two_state(reference)
r = two.reduced
print(f"reference two-state: forward ({r.u_r0:.6g}, {r.u_r1:.6g}), backward "
      f"({r.w_r0:.6g}, {r.w_r1:.6g}); errors {two.preservation_error}")

# The small reference model has randomness below one, so no one-state model
# with non-negative rates matches its V and D.
try:
    reduce_one_state_vd(reference)
except Infeasible as exc:
    print(f"reference VD: {exc}")
