"""Stationary distribution, mean velocity and diffusion constant.

For the periodic chain the stationary occupation of state ``j`` is
``p_j = r_j / R_N`` with

    r_j = (1/u_j) [1 + sum_{k=1}^{N-1} prod_{i=j+1}^{j+k} w_i/u_i]
    s_j = (1/u_j) [1 + sum_{k=1}^{N-1} prod_{i=j-1}^{j-k} w_{i+1}/u_i]

and Derrida's closed forms give

    V = L (1 - Gamma) / R_N
    D = (L/N) [(L G_N + V S_N) / R_N^2 - (N + 2) V / 2]

where ``Gamma = prod_j w_j/u_j``, ``S_N = sum_j s_j sum_{k=0}^{N-1} (k+1) r_{k+j+1}``
and ``G_N = sum_j u_j r_j s_j``. Indices wrap modulo N.

The partial products are formed explicitly (O(N^2)). If any of them leaves
``[1e-300, 1e300]`` the sums are redone in log space.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import logsumexp

from .errors import NumericalOverflow
from .models import HoppingModel, validate

__all__ = [
    "SteadyStateReport",
    "TransportStats",
    "compute_weights",
    "transport_stats",
    "stationarity_residual",
    "log_gamma",
    "cycle_gamma",
]

_TINY = 1e-300
_HUGE = 1e300


@dataclass(frozen=True)
class SteadyStateReport:
    probabilities: np.ndarray
    r_values: np.ndarray
    s_values: np.ndarray
    r_sum: float
    s_weighted: float
    g_sum: float
    gamma: float
    log_r_sum: float
    log_s_weighted: float
    log_g_sum: float
    log_gamma: float
    log_space: bool = False


@dataclass(frozen=True)
class TransportStats:
    """Long-time transport statistics of a hopping model.

    ``randomness`` is ``2 D / (V L)``, or None when ``V == 0``.
    """

    velocity: float
    diffusion: float
    period_mfpt: float
    gamma: float
    r_sum: float
    s_weighted: float
    g_sum: float
    randomness: Optional[float]


def log_gamma(model: HoppingModel) -> float:
    """``log prod_j w_j/u_j``; ``-inf`` if any backward rate is zero."""
    w = model.w
    if np.any(w == 0):
        return -np.inf
    return float(np.sum(np.log(w) - np.log(model.u)))


def cycle_gamma(model: HoppingModel) -> float:
    lg = log_gamma(model)
    return 0.0 if lg == -np.inf else float(np.exp(lg))


def _index_tables(N):
    k = np.arange(N - 1)
    j = np.arange(N)[:, None]
    fwd = (j + 1 + k) % N     # i = j+1 .. j+N-1
    bwd = (j - 1 - k) % N     # i = j-1 .. j-N+1
    k2 = np.arange(N)
    shifted = (j + 1 + k2) % N  # r_{k+j+1}, k = 0 .. N-1
    return fwd, bwd, shifted


def _products_ok(p):
    nz = p[p != 0]
    return bool(np.all(np.isfinite(nz)) and np.all((nz >= _TINY) & (nz <= _HUGE)))


def compute_weights(model: HoppingModel) -> SteadyStateReport:
    """Evaluate ``r_j``, ``s_j``, ``R_N``, ``S_N``, ``G_N``, ``Gamma`` and ``p_j``."""
    validate(model)
    u, w = model.u, model.w
    N = len(u)
    lg = log_gamma(model)
    with np.errstate(over="ignore"):
        gamma = 0.0 if lg == -np.inf else float(np.exp(lg))
    fwd, bwd, shifted = _index_tables(N)

    with np.errstate(over="ignore", under="ignore", invalid="ignore"):
        rho = w / u                      # w_i / u_i
        sig = np.roll(w, -1) / u         # w_{i+1} / u_i
        prod_r = np.cumprod(rho[fwd], axis=1)
        prod_s = np.cumprod(sig[bwd], axis=1)
    weights = np.arange(1, N + 1, dtype=float)

    direct = _products_ok(prod_r) and _products_ok(prod_s) and (
        gamma == 0.0 or _TINY <= gamma <= _HUGE)
    if direct:
        with np.errstate(over="ignore"):
            r = (1.0 + prod_r.sum(axis=1)) / u
            s = (1.0 + prod_s.sum(axis=1)) / u
            R = float(r.sum())
            S = float(s @ (r[shifted] @ weights))
            G = float(np.sum(u * r * s))
        if all(np.isfinite(x) and x < _HUGE for x in (R, S, G)):
            with np.errstate(divide="ignore"):
                return SteadyStateReport(
                    probabilities=r / R, r_values=r, s_values=s,
                    r_sum=R, s_weighted=S, g_sum=G, gamma=gamma,
                    log_r_sum=float(np.log(R)), log_s_weighted=float(np.log(S)),
                    log_g_sum=float(np.log(G)), log_gamma=lg, log_space=False)
    return _compute_weights_log(model, lg, fwd, bwd, shifted)


def _compute_weights_log(model, lg, fwd, bwd, shifted):
    u, w = model.u, model.w
    N = len(u)
    log_u = np.log(u)
    with np.errstate(divide="ignore"):
        log_w = np.log(w)
    log_rho = log_w - log_u
    log_sig = np.roll(log_w, -1) - log_u
    zeros = np.zeros((N, 1))
    cum_r = np.cumsum(log_rho[fwd], axis=1) if N > 1 else np.zeros((N, 0))
    cum_s = np.cumsum(log_sig[bwd], axis=1) if N > 1 else np.zeros((N, 0))
    log_r = logsumexp(np.hstack([zeros, cum_r]), axis=1) - log_u
    log_s = logsumexp(np.hstack([zeros, cum_s]), axis=1) - log_u
    log_R = float(logsumexp(log_r))
    log_k = np.log(np.arange(1, N + 1, dtype=float))
    log_S = float(logsumexp(log_s[:, None] + log_r[shifted] + log_k[None, :]))
    log_G = float(logsumexp(log_u + log_r + log_s))
    with np.errstate(over="ignore"):
        r = np.exp(log_r)
        s = np.exp(log_s)
        gamma = 0.0 if lg == -np.inf else float(np.exp(lg))
        R, S, G = (float(np.exp(x)) for x in (log_R, log_S, log_G))
    return SteadyStateReport(
        probabilities=np.exp(log_r - log_R), r_values=r, s_values=s,
        r_sum=R, s_weighted=S, g_sum=G, gamma=gamma,
        log_r_sum=log_R, log_s_weighted=log_S, log_g_sum=log_G,
        log_gamma=lg, log_space=True)


def _log_abs_one_minus(lg):
    """``log|1 - e^lg|`` and its sign, accurate near ``lg = 0``."""
    if lg == 0.0:
        return -np.inf, 0.0
    if lg < 0:
        return float(np.log(-np.expm1(lg))), 1.0
    return float(lg + np.log(-np.expm1(-lg))), -1.0


def transport_stats(model: HoppingModel, report: Optional[SteadyStateReport] = None
                    ) -> TransportStats:
    """Mean velocity, diffusion constant and cycle first-passage time."""
    if report is None:
        report = compute_weights(model)
    L = model.step_length
    N = model.period_count
    R, S, G, gamma = report.r_sum, report.s_weighted, report.g_sum, report.gamma
    if not report.log_space:
        V = L * (1.0 - gamma) / R
        D = (L / N) * ((L * G + V * S) / R**2 - (N + 2) * V / 2.0)
        T = R / (1.0 + gamma)
    else:
        lR, lS, lG, lg = (report.log_r_sum, report.log_s_weighted,
                          report.log_g_sum, report.log_gamma)
        la, sign = _log_abs_one_minus(lg)
        with np.errstate(over="ignore"):
            V = sign * L * np.exp(la - lR)
            D = (L * L / N) * (np.exp(lG - 2 * lR) + sign * np.exp(la + lS - 3 * lR)
                               - sign * (N + 2) * np.exp(la - lR) / 2.0)
            T = np.exp(lR - np.logaddexp(0.0, lg))
        V, D, T = float(V), float(D), float(T)
    if not all(np.isfinite(x) for x in (V, D, T)):
        raise NumericalOverflow(
            f"transport statistics overflow (V={V!r}, D={D!r}, T={T!r})")
    randomness = 2.0 * D / (V * L) if V != 0 else None
    return TransportStats(
        velocity=V, diffusion=D, period_mfpt=T, gamma=gamma,
        r_sum=R, s_weighted=S, g_sum=G, randomness=randomness)


def stationarity_residual(model: HoppingModel, p: np.ndarray) -> float:
    """Largest balance-equation residual, relative to the largest flux term."""
    u, w = model.u, model.w
    inflow_fwd = np.roll(u * p, 1)     # u_{j-1} p_{j-1}
    inflow_bwd = np.roll(w * p, -1)    # w_{j+1} p_{j+1}
    outflow = (u + w) * p
    scale = max(inflow_fwd.max(), inflow_bwd.max(), outflow.max())
    return float(np.max(np.abs(inflow_fwd + inflow_bwd - outflow)) / scale)
