"""Drift in a tilted sinusoidal potential, continuum versus lattice.

Evaluates velocity, cycle time and effective rates by quadrature and
compares them with fine discretizations of the same potential, extrapolated
to zero lattice spacing.
"""
from pathlib import Path

from hopred import (continuous_period_mfpt, continuous_reduce_one_state, continuous_velocity,
                    discretize, effective_diffusion, load_model, period_mfpt, transport_stats)
from hopred.continuous import extrapolate

model = load_model(Path(__file__).parent / "models" / "sinusoidal.json")
V = continuous_velocity(model).value
T = continuous_period_mfpt(model).value
rates = continuous_reduce_one_state(model)

for n in (16, 64, 256):
    h = discretize(model, n)
    print(f"N = {n:4d}: V = {transport_stats(h).velocity:.10f}, T = {period_mfpt(h):.10f}")
print(f"extrapolated : V = {extrapolate(model, lambda h: transport_stats(h).velocity).value:.12f}")
print(f"quadrature   : V = {V:.12f}, T = {T:.12f}")
print(f"effective rates u_r = {rates.forward_rate:.10f}, w_r = {rates.backward_rate:.10f}")
print(f"D_eff = {effective_diffusion(model).value:.10f}")
