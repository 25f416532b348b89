"""Mean first-passage times on an absorbing interval.

Builds the interval that a walker on the kinesin-like model must leave to
complete one cycle, evaluates the explicit solution and the tridiagonal
solve side by side, and compares the start-state value with the period
formula.
"""
from pathlib import Path

import numpy as np

from hopred import (load_model, mfpt_closed_form, mfpt_linear_solve, period_interval_problem,
                    period_mfpt)

model = load_model(Path(__file__).parent / "models" / "kinesin_like.json")
problem = period_interval_problem(model)
closed = mfpt_closed_form(problem)
solved = mfpt_linear_solve(problem)

print(" state   closed form          linear solve")
for n, a, b in zip(closed.states, closed.times, solved.times):
    print(f"{n:6d}   {a:.12e}   {b:.12e}")
dev = np.max(np.abs(closed.interior - solved.interior) / solved.interior)
print(f"max relative deviation      = {dev:.2e}")
print(f"T from state 0 (interval)   = {closed.at(0):.12e}")
print(f"T from the period formula   = {period_mfpt(model):.12e}")
