import math
from pathlib import Path

import numpy as np
import pytest

from hopred import HoppingModel

MODELS_DIR = Path(__file__).resolve().parent.parent / "demos" / "models"


def random_model(rng, N=None, low=1e-2, high=1e2, n_max=32, zero_backward=0.0, L=1.0):
    """Rates log-uniform on [low, high]; optionally some w_j set to zero."""
    if N is None:
        N = int(rng.integers(1, n_max + 1))
    u = np.exp(rng.uniform(math.log(low), math.log(high), N))
    w = np.exp(rng.uniform(math.log(low), math.log(high), N))
    if zero_backward:
        w[rng.random(N) < zero_backward] = 0.0
    return HoppingModel(u, w, L)


def rel(a, b):
    a, b = float(a), float(b)
    if a == b:
        return 0.0
    return abs(a - b) / max(abs(a), abs(b))


@pytest.fixture
def reference():
    return HoppingModel([2.0, 3.0], [1.0, 0.5], 1.0)


@pytest.fixture
def one_state():
    return HoppingModel([2.0], [1.0], 1.0)


@pytest.fixture
def models_dir():
    return MODELS_DIR


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
