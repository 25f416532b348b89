"""Steady-state statistics of a small two-state motor model.

Loads the two-state reference model, prints its stationary occupations and
the velocity, diffusion constant and cycle time, and checks them against
the exact fractions 11/13, 1713/4394 and 1.
"""
from pathlib import Path

from hopred import compute_weights, load_model, transport_stats

model = load_model(Path(__file__).parent / "models" / "reference_n2.json")
weights = compute_weights(model)
stats = transport_stats(model)

print("stationary occupations:", weights.probabilities)
print(f"Gamma      = {weights.gamma:.6f}")
print(f"V          = {stats.velocity:.15f}   (11/13     = {11 / 13:.15f})")
print(f"D          = {stats.diffusion:.15f}   (1713/4394 = {1713 / 4394:.15f})")
print(f"T          = {stats.period_mfpt:.15f}")
print(f"randomness = {stats.randomness:.6f}")
