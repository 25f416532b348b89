"""Brownian motion in a tilted periodic potential.

For ``Phi(x) = phi(x) - F x`` with ``phi`` of period ``L`` the basic object is

    I = int_0^L e^{beta Phi(y)} int_{y-L}^{y} e^{-beta Phi(z)} dz dy,

from which

    V    = D (1 - e^{-beta F L}) L / I
    T(0) = I / (D (1 + e^{-beta F L}))
    u_r  = D / I,   w_r = u_r e^{-beta F L}.

The inner integral is split at 0 and folded back into ``[0, L)`` using the
quasi-periodicity of ``Phi``, which turns it into
``A(y) + e^{-beta F L} (A(L) - A(y))`` with ``A(y) = int_0^y e^{-beta Phi}``:
a sum of two nonnegative terms for either sign of ``F``. ``A`` is tabulated
once on Gauss-Legendre panels and the outer integral reuses the table.

The effective diffusion constant is obtained as the limit of the discrete
diffusion constant of :func:`discretize` chains, extrapolated in ``1/N^2``.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial.legendre import leggauss

from .errors import InvalidParameter, NonConvergent, NumericalOverflow, QuadratureFailure
from .models import ContinuousModel, HoppingModel, OneStateModel, validate_continuous
from .steady_state import transport_stats

__all__ = [
    "QuadratureConfig",
    "DiscretizationBridge",
    "QuadResult",
    "BridgeResult",
    "continuous_velocity",
    "continuous_period_mfpt",
    "continuous_period_mfpt_unsimplified",
    "continuous_reduce_one_state",
    "zero_force_diffusion",
    "discretize",
    "extrapolate",
    "effective_diffusion",
]


@dataclass(frozen=True)
class QuadratureConfig:
    """Settings for the nested quadratures.

    ``method`` is ``"gauss-legendre"`` (panels of ``nodes`` points,
    doubled until converged) or ``"simpson"`` (composite Simpson, doubled).
    ``max_subdivisions`` caps the number of panels / Simpson intervals.
    """

    method: str = "gauss-legendre"
    rtol: float = 1e-9
    atol: float = 1e-12
    max_subdivisions: int = 4096
    nodes: int = 16

    def __post_init__(self):
        if self.method not in ("gauss-legendre", "simpson"):
            raise InvalidParameter("method", self.method, "must be 'gauss-legendre' or 'simpson'")
        if not (self.rtol > 0 and self.atol > 0):
            raise InvalidParameter("tolerance", (self.rtol, self.atol), "must be positive")
        if self.max_subdivisions < 1:
            raise InvalidParameter("max_subdivisions", self.max_subdivisions, "must be >= 1")
        if self.nodes < 2:
            raise InvalidParameter("nodes", self.nodes, "must be >= 2")


@dataclass(frozen=True)
class DiscretizationBridge:
    """Chain sizes used to approach the continuum limit.

    Consecutive sizes should grow by a constant factor; ``order`` is the
    number of Richardson eliminations (at most ``len(levels) - 1``).
    """

    levels: tuple = (64, 128, 256, 512)
    order: int = 3
    rtol: float = 1e-8
    max_workers: int = 1

    def __post_init__(self):
        levels = tuple(int(n) for n in self.levels)
        object.__setattr__(self, "levels", levels)
        if len(levels) < 1 or any(n < 2 for n in levels):
            raise InvalidParameter("levels", levels, "must all be >= 2")
        if any(b <= a for a, b in zip(levels, levels[1:])):
            raise InvalidParameter("levels", levels, "must be strictly increasing")
        if not 0 <= self.order <= len(levels) - 1:
            raise InvalidParameter("order", self.order, "must lie in [0, len(levels) - 1]")


@dataclass(frozen=True)
class QuadResult:
    value: float
    error: float
    panels: int


@dataclass(frozen=True)
class BridgeResult:
    value: float
    error: float
    levels: tuple
    raw: tuple
    table: tuple


# -- quadrature tables -------------------------------------------------------

@dataclass
class _Table:
    """Nodes/weights on ``[lo, hi]`` plus running integrals of ``exp(f)``.

    ``head[i] = int_lo^{x_i} exp(f - shift)`` and ``tail[i]`` the complement
    up to ``hi``; ``total`` is the full integral, all scaled by ``exp(-shift)``.
    """

    x: np.ndarray
    weights: np.ndarray
    head: np.ndarray
    tail: np.ndarray
    total: float
    shift: float


def _segments(breaks, panels_per_segment):
    edges = []
    for a, b in zip(breaks[:-1], breaks[1:]):
        edges.append(np.linspace(a, b, panels_per_segment + 1)[:-1])
    edges.append([breaks[-1]])
    return np.concatenate(edges)


def _gl_table(f, breaks, p, nodes, shift):
    t, omega = leggauss(nodes)
    edges = _segments(breaks, p)
    a, b = edges[:-1, None], edges[1:, None]
    half = (b - a) / 2.0
    x = a + half * (t + 1.0)                     # (P, m) outer nodes
    wts = half * omega
    vals = np.exp(f(x) - shift)
    panel_int = np.sum(vals * wts, axis=1)
    # partial integrals from the panel start / to the panel end, per node
    h_left = (x - a) / 2.0                        # (P, m)
    z_left = a[:, :, None] + h_left[:, :, None] * (t + 1.0)
    part_left = np.sum(np.exp(f(z_left) - shift) * omega, axis=2) * h_left
    h_right = (b - x) / 2.0
    z_right = x[:, :, None] + h_right[:, :, None] * (t + 1.0)
    part_right = np.sum(np.exp(f(z_right) - shift) * omega, axis=2) * h_right
    before = np.concatenate([[0.0], np.cumsum(panel_int)[:-1]])
    after = np.concatenate([np.cumsum(panel_int[::-1])[::-1][1:], [0.0]])
    head = before[:, None] + part_left
    tail = after[:, None] + part_right
    return _Table(x.ravel(), wts.ravel(), head.ravel(), tail.ravel(),
                  float(panel_int.sum()), shift)


def _simpson_table(f, breaks, p, nodes, shift):
    # composite Simpson with 2p intervals per segment; running integrals are
    # cumulative Simpson, so nodes are the grid points themselves
    from scipy.integrate import cumulative_simpson, simpson

    xs, ws, heads = [], [], []
    offset = 0.0
    for a, b in zip(breaks[:-1], breaks[1:]):
        x = np.linspace(a, b, 2 * p + 1)
        v = np.exp(f(x) - shift)
        head = offset + cumulative_simpson(v, x=x, initial=0.0)
        seg = float(simpson(v, x=x))
        w = np.full(len(x), (b - a) / (2 * p) / 3.0)
        w[1:-1:2] *= 4.0
        w[2:-1:2] *= 2.0
        if xs:
            # merge the shared breakpoint with the previous segment
            ws[-1][-1] += w[0]
            x, w, head = x[1:], w[1:], head[1:]
        xs.append(x)
        ws.append(w)
        heads.append(head)
        offset += seg
    x = np.concatenate(xs)
    w = np.concatenate(ws)
    head = np.concatenate(heads)
    return _Table(x, w, head, offset - head, offset, shift)


def _table(f, breaks, p, config, shift):
    if config.method == "gauss-legendre":
        return _gl_table(f, breaks, p, config.nodes, shift)
    return _simpson_table(f, breaks, p, config.nodes, shift)


def _converge(compute: Callable[[int], float], config: QuadratureConfig, nseg: int):
    """Double the panel count until two successive values agree."""
    p = 1 if config.method == "gauss-legendre" else 4
    prev = compute(p)
    while True:
        p *= 2
        if p * nseg > config.max_subdivisions:
            raise QuadratureFailure(prev, float("nan"), p // 2 * nseg)
        cur = compute(p)
        err = abs(cur - prev)
        if err <= config.atol + config.rtol * abs(cur):
            return QuadResult(cur, err, p * nseg)
        prev = cur


def _exponent_range(f, breaks):
    x = np.linspace(breaks[0], breaks[-1], 257)
    vals = f(np.concatenate([x, breaks]))
    return float(np.max(vals)), float(np.min(vals))


def _log_integral(model: ContinuousModel, config: QuadratureConfig, forward: bool):
    """``log I`` with the inner integral running backward (``[y-L, y]``) or
    forward (``[x, x+L]``); both equal ``log I`` analytically."""
    beta, F, L = model.beta, model.tilt_force, model.period_length
    sign = 1.0 if not forward else -1.0
    # outer exponent  sign*beta*Phi, inner exponent -sign*beta*Phi
    outer = lambda x: sign * beta * model.tilted(x)
    inner = lambda x: -sign * beta * model.tilted(x)
    breaks = model.breakpoints()
    o_max, _ = _exponent_range(outer, breaks)
    i_max, _ = _exponent_range(inner, breaks)
    fold = math.exp(-model.bias)

    def compute(p):
        tab = _table(inner, breaks, p, config, i_max)
        if forward:
            # int_x^{x+L} = tail(x) + e^{-beta F L} head(x)
            inner_vals = tab.tail + fold * tab.head
        else:
            # int_{y-L}^{y} = head(y) + e^{-beta F L} tail(y)
            inner_vals = tab.head + fold * tab.tail
        weights = np.exp(outer(tab.x) - o_max)
        return float(np.sum(tab.weights * weights * inner_vals))

    res = _converge(compute, config, len(breaks) - 1)
    log_scale = o_max + i_max
    if not (res.value > 0 and np.isfinite(res.value)):
        raise NumericalOverflow("double integral underflowed or overflowed")
    return math.log(res.value) + log_scale, res.error / res.value, res.panels


def continuous_velocity(model: ContinuousModel, config: QuadratureConfig = QuadratureConfig(),
                        check_tol: float = 1e-6) -> QuadResult:
    """Mean velocity ``V = D (1 - e^{-beta F L}) L / I``.

    Both orderings of the inner integral are evaluated; their relative
    disagreement is folded into the reported error and must stay below
    `check_tol`.
    """
    validate_continuous(model)
    lb, eb, pb = _log_integral(model, config, forward=False)
    lf, ef, pf = _log_integral(model, config, forward=True)
    mismatch = abs(math.expm1(lb - lf))
    if mismatch > check_tol:
        raise QuadratureFailure(math.exp(lb), mismatch, max(pb, pf))
    D, L = model.bare_diffusion, model.period_length
    V = -D * math.expm1(-model.bias) * L * math.exp(-lb)
    return QuadResult(V, abs(V) * max(eb, ef, mismatch), max(pb, pf))


def continuous_period_mfpt(model: ContinuousModel,
                           config: QuadratureConfig = QuadratureConfig()) -> QuadResult:
    """Mean time to reach ``+L`` or ``-L`` from 0, ``I / (D (1 + e^{-beta F L}))``."""
    validate_continuous(model)
    lb, eb, p = _log_integral(model, config, forward=False)
    log_T = lb - math.log(model.bare_diffusion) - np.logaddexp(0.0, -model.bias)
    T = math.exp(log_T)
    return QuadResult(T, T * eb, p)


def continuous_period_mfpt_unsimplified(model: ContinuousModel,
                                        config: QuadratureConfig = QuadratureConfig()
                                        ) -> QuadResult:
    """Same quantity as :func:`continuous_period_mfpt`, from the general
    two-boundary solution on ``[-L, L]`` before any use of periodicity:

        T(0) = [E(-L, L) H(0, L) - E(0, L) H(-L, L)] / (D E(-L, L))

    with ``E(a, b) = int_a^b e^{beta Phi}`` and
    ``H(a, b) = int_a^b e^{beta Phi(y)} int_0^y e^{-beta Phi(z)} dz dy``.
    This form subtracts, so it is only a cross-check for moderate tilts.
    """
    validate_continuous(model)
    beta, L = model.beta, model.period_length
    pos = lambda x: beta * model.tilted(x)
    neg = lambda x: -beta * model.tilted(x)
    br = model.breakpoints()
    br_left = br - L
    all_br = np.concatenate([br_left[:-1], br])
    p_max = max(_exponent_range(pos, br)[0], _exponent_range(pos, br_left)[0])
    n_max = max(_exponent_range(neg, br)[0], _exponent_range(neg, br_left)[0])

    def compute(p):
        right = _table(neg, br, p, config, n_max)        # int_0^y for y > 0
        left = _table(neg, br_left, p, config, n_max)    # int_y^0 is left.tail
        e_right = np.exp(pos(right.x) - p_max)
        e_left = np.exp(pos(left.x) - p_max)
        E_pos = float(np.sum(right.weights * e_right))
        E_all = E_pos + float(np.sum(left.weights * e_left))
        H_pos = float(np.sum(right.weights * e_right * right.head))
        H_all = H_pos - float(np.sum(left.weights * e_left * left.tail))
        return (E_all * H_pos - E_pos * H_all) / E_all

    res = _converge(compute, config, len(all_br) - 1)
    scale = math.exp(p_max + n_max) / model.bare_diffusion
    return QuadResult(res.value * scale, res.error * scale, res.panels)


def continuous_reduce_one_state(model: ContinuousModel,
                                config: QuadratureConfig = QuadratureConfig(),
                                check_tol: float = 1e-6) -> OneStateModel:
    """One-state model with the continuum V and T(0): ``u_r = D/I``, ``w_r = u_r e^{-beta F L}``.

    The identities ``u_r - w_r = V/L`` and ``u_r + w_r = 1/T(0)`` are checked
    against :func:`continuous_velocity` and :func:`continuous_period_mfpt`.
    """
    validate_continuous(model)
    lb, _, _ = _log_integral(model, config, forward=False)
    log_u = math.log(model.bare_diffusion) - lb
    u_r = math.exp(log_u)
    w_r = math.exp(log_u - model.bias)
    V = continuous_velocity(model, config, check_tol)
    T = continuous_period_mfpt(model, config)
    L = model.period_length
    scale = max(abs(V.value / L), u_r + w_r)
    if abs((u_r - w_r) - V.value / L) > check_tol * scale or \
            abs((u_r + w_r) * T.value - 1.0) > check_tol:
        raise QuadratureFailure(u_r, abs((u_r + w_r) * T.value - 1.0), T.panels)
    return OneStateModel(u_r, w_r, L)


def zero_force_diffusion(model: ContinuousModel,
                         config: QuadratureConfig = QuadratureConfig()) -> QuadResult:
    """``D L^2 / (int_0^L e^{beta phi} int_0^L e^{-beta phi})``, the untilted
    effective diffusion constant; `model`'s tilt is ignored."""
    validate_continuous(model)
    beta, L = model.beta, model.period_length
    breaks = model.breakpoints()
    pos = lambda x: beta * model.phi(x)
    neg = lambda x: -beta * model.phi(x)
    s_pos = _exponent_range(pos, breaks)[0]
    s_neg = _exponent_range(neg, breaks)[0]

    def compute(p):
        a = _table(pos, breaks, p, config, s_pos).total
        b = _table(neg, breaks, p, config, s_neg).total
        return L * L / (a * b)

    res = _converge(compute, config, len(breaks) - 1)
    scale = model.bare_diffusion * math.exp(-(s_pos + s_neg))
    return QuadResult(res.value * scale, res.error * scale, res.panels)


# -- discrete bridge ---------------------------------------------------------

def discretize(model: ContinuousModel, N: int) -> HoppingModel:
    """N-state chain on ``x_j = j L / N`` with local-detailed-balance rates.

    ``u_j = (D N^2/L^2) exp(-beta (Phi_{j+1} - Phi_j) / 2)`` and
    ``w_j = (D N^2/L^2) exp(-beta (Phi_{j-1} - Phi_j) / 2)``, so that
    ``prod_j w_j/u_j = e^{-beta F L}``.
    """
    validate_continuous(model)
    if N < 2:
        raise InvalidParameter("N", N, "must be >= 2")
    L, beta, F = model.period_length, model.beta, model.tilt_force
    phi = model.phi(np.arange(N) * (L / N))
    tilt = beta * F * L / (2.0 * N)
    base = model.bare_diffusion * N * N / (L * L)
    u = base * np.exp(-beta * (np.roll(phi, -1) - phi) / 2.0 + tilt)
    w = base * np.exp(-beta * (np.roll(phi, 1) - phi) / 2.0 - tilt)
    return HoppingModel(u, w, L)


def extrapolate(model: ContinuousModel, quantity: Callable[[HoppingModel], float],
                bridge: DiscretizationBridge = DiscretizationBridge()) -> BridgeResult:
    """Richardson-extrapolate ``quantity(discretize(model, N))`` to ``N -> oo``.

    The discretisation error is assumed to expand in even powers of ``1/N``.
    The error estimate is the change between the two best extrapolants.
    """
    levels = bridge.levels
    if bridge.max_workers > 1:
        with ThreadPoolExecutor(bridge.max_workers) as pool:
            raw = list(pool.map(lambda n: float(quantity(discretize(model, n))), levels))
    else:
        raw = [float(quantity(discretize(model, n))) for n in levels]
    table = [[v] for v in raw]
    for k in range(1, len(levels)):
        ratio = levels[k] / levels[k - 1]
        for j in range(1, min(k, bridge.order) + 1):
            factor = ratio ** (2 * j) - 1.0
            table[k].append(table[k][j - 1] + (table[k][j - 1] - table[k - 1][j - 1]) / factor)
    best = table[-1][-1]
    if len(table[-1]) > 1:
        error = abs(table[-1][-1] - table[-1][-2])
    elif len(levels) > 1:
        error = abs(raw[-1] - raw[-2])
    else:
        error = float("inf")
    return BridgeResult(best, error, levels, tuple(raw), tuple(tuple(r) for r in table))


def effective_diffusion(model: ContinuousModel,
                        bridge: DiscretizationBridge = DiscretizationBridge()) -> BridgeResult:
    """Long-time diffusion constant as the continuum limit of the discrete ``D_N``.

    Raises
    ------
    NonConvergent
        if the error estimate exceeds ``bridge.rtol`` relative to the result.
    """
    validate_continuous(model)
    res = extrapolate(model, lambda m: transport_stats(m).diffusion, bridge)
    if not res.error <= bridge.rtol * abs(res.value):
        raise NonConvergent(res.value, res.error, bridge.rtol)
    return res
