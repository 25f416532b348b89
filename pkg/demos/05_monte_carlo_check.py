"""Checking the closed forms against stochastic trajectories.

Simulates 10^4 trajectories of the kinesin-like model and reports how many
standard errors separate each estimate from the exact value.
"""
from pathlib import Path

from hopred import (SimConfig, default_horizon, load_model, simulate_first_passage,
                    simulate_transport, transport_stats)

model = load_model(Path(__file__).parent / "models" / "kinesin_like.json")
st = transport_stats(model)
cfg = SimConfig(trajectory_count=10_000, horizon=default_horizon(model), rng_seed=7)
V, D = simulate_transport(model, cfg)
T = simulate_first_passage(model, cfg)
for name, est, exact in (("V", V, st.velocity), ("D", D, st.diffusion), ("T", T, st.period_mfpt)):
    z = (est.estimate - exact) / est.stderr
    print(f"{name}: exact {exact:.6g}, simulated {est.estimate:.6g} +- {est.stderr:.2g} (z = {z:+.2f})")
