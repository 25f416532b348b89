"""Replace an N-state cycle by a one- or two-state cycle.

Three reductions are provided:

* :func:`reduce_one_state_vt` keeps the mean velocity V and the cycle
  first-passage time T: ``u_r = 1/R_N``, ``w_r = Gamma/R_N``.
* :func:`reduce_one_state_vd` keeps V and the diffusion constant D. It exists
  only when the randomness satisfies ``|2D/(VL)| >= 1``; otherwise
  :class:`~hopred.errors.Infeasible` is raised with the offending rates.
* :func:`reduce_two_state` keeps V, T and D. The three statistics fix only
  ``u = u_r0 u_r1``, ``w = w_r0 w_r1`` and ``sigma = u_r0+u_r1+w_r0+w_r1``;
  :func:`factorize_two_state` then picks four rates.

In the expressions below ``G_N`` plays the role of the quantity written
``U_N`` in the original derivation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from .errors import (
    DegenerateVelocity,
    Infeasible,
    InfeasibleAggregates,
    NoRealFactorization,
    NumericalError,
    NumericalOverflow,
)
from .models import HoppingModel, OneStateModel, TwoStateModel
from .steady_state import SteadyStateReport, compute_weights, transport_stats

__all__ = [
    "ReductionReport",
    "Aggregates",
    "one_state_stats",
    "two_state_stats",
    "reduce_one_state_vt",
    "reduce_one_state_vd",
    "two_state_aggregates",
    "factorize_two_state",
    "reduce_two_state",
]

# |1 - Gamma| below this counts as zero velocity
GAMMA_ONE_TOL = 1e-12
# relative size below which a denominator or rate is treated as rounding noise
ROUNDING_TOL = 1e-12


@dataclass(frozen=True)
class Aggregates:
    u: float
    w: float
    sigma: float


@dataclass(frozen=True)
class ReductionReport:
    """Outcome of a reduction.

    ``preserved`` maps statistic names to the original model's values;
    ``discarded`` maps names to ``(original, reduced)`` pairs for statistics
    the reduction does not keep. ``preservation_error`` holds the relative
    error of each preserved statistic recomputed from the reduced rates.
    """

    reduced: Union[OneStateModel, TwoStateModel]
    preserved: dict
    discarded: dict
    preservation_error: dict
    aggregates: Optional[Aggregates] = None
    flags: dict = field(default_factory=dict)


def one_state_stats(model: OneStateModel):
    """``(V, T, D)`` of a one-state model."""
    s = model.forward_rate + model.backward_rate
    L = model.step_length
    return (model.forward_rate - model.backward_rate) * L, 1.0 / s, s * L * L / 2.0


def two_state_stats(u: float, w: float, sigma: float, step_length: float = 1.0):
    """``(V, T, D)`` of a two-state model from its aggregates."""
    L = step_length
    V = (u - w) * L / sigma
    T = sigma / (u + w)
    D = L * L / (2.0 * T) - V * V / sigma
    return V, T, D


def _rel(a, b):
    if a == b:
        return 0.0
    return abs(a - b) / max(abs(a), abs(b))


def _stats_dict(stats):
    return {"V": stats.velocity, "T": stats.period_mfpt, "D": stats.diffusion}


def reduce_one_state_vt(model: HoppingModel) -> ReductionReport:
    """One-state model with the same V and T. Always feasible."""
    rep = compute_weights(model)
    stats = transport_stats(model, rep)
    inv_R = math.exp(-rep.log_r_sum) if rep.log_space else 1.0 / rep.r_sum
    reduced = OneStateModel(inv_R, rep.gamma * inv_R, model.step_length)
    V, T, D = one_state_stats(reduced)
    return ReductionReport(
        reduced=reduced,
        preserved={"V": stats.velocity, "T": stats.period_mfpt},
        discarded={"D": (stats.diffusion, D)},
        preservation_error={"V": _rel(V, stats.velocity), "T": _rel(T, stats.period_mfpt)},
    )


def _scaled_terms(rep: SteadyStateReport):
    """``1/R``, ``G/R^2`` and ``S/R^3`` evaluated without forming R^3."""
    if not rep.log_space:
        R = rep.r_sum
        return 1.0 / R, rep.g_sum / R**2, rep.s_weighted / R**3
    lR = rep.log_r_sum
    return (math.exp(-lR), math.exp(rep.log_g_sum - 2 * lR),
            math.exp(rep.log_s_weighted - 3 * lR))


def reduce_one_state_vd(model: HoppingModel) -> ReductionReport:
    """One-state model with the same V and D.

    Raises
    ------
    Infeasible
        if the resulting ``u_r <= 0`` or ``w_r < 0``; the exception carries
        both computed rates. Negative rates are never clamped.
    """
    rep = compute_weights(model)
    stats = transport_stats(model, rep)
    N = model.period_count
    g = 1.0 - rep.gamma
    inv_R, g_term, s_term = _scaled_terms(rep)
    common = g * s_term + g_term
    u_r = (common - g * inv_R) / N
    w_r = (common - (N + 1) * g * inv_R) / N
    scale = max(abs(common), abs((N + 1) * g * inv_R))
    if w_r < 0 and -w_r <= ROUNDING_TOL * scale:
        w_r = 0.0
    if not (u_r > 0 and w_r >= 0):
        raise Infeasible(u_r, w_r)
    reduced = OneStateModel(u_r, w_r, model.step_length)
    check = transport_stats(reduced.to_hopping())
    return ReductionReport(
        reduced=reduced,
        preserved={"V": stats.velocity, "D": stats.diffusion},
        discarded={"T": (stats.period_mfpt, check.period_mfpt)},
        preservation_error={"V": _rel(check.velocity, stats.velocity),
                            "D": _rel(check.diffusion, stats.diffusion)},
    )


def _arc_log_dets(u, w):
    """``LD[a, m]``: log-determinant of the tridiagonal block of ``-Q`` on the
    ``m`` consecutive states ``a, a+1, .., a+m-1`` (mod N), ``0 <= m <= N-2``.

    The block has diagonal ``u_k + w_k`` and off-diagonals ``-u_k``, ``-w_{k+1}``.
    Its elimination pivots are ``u_k + e_k`` with the slack recurrence
    ``e_a = w_a``, ``e_{k+1} = w_{k+1} e_k / (u_k + e_k)``, free of subtractions.
    """
    N = len(u)
    LD = np.zeros((N, max(N - 1, 1)))
    a = np.arange(N)
    e = w.copy()
    logdet = np.zeros(N)
    for m in range(1, N - 1):
        k = (a + m - 1) % N
        pivot = u[k] + e
        logdet = logdet + np.log(pivot)
        LD[:, m] = logdet
        e = w[(k + 1) % N] * e / pivot
    return LD


def _log_second_minor_sum(u, w):
    """Log of the sum of all ``(N-2) x (N-2)`` principal minors of ``-Q``.

    Deleting states ``i < j`` leaves two arcs of the ring whose blocks are
    decoupled, so each minor is a product of two arc determinants.
    """
    from scipy.special import logsumexp

    N = len(u)
    if N < 2:
        return -np.inf
    LD = _arc_log_dets(u, w)
    i, j = np.triu_indices(N, 1)
    terms = LD[(i + 1) % N, j - i - 1] + LD[(j + 1) % N, N - j + i - 1]
    return float(logsumexp(terms))


def two_state_aggregates(model: HoppingModel) -> Aggregates:
    """``(u, w, sigma)`` of the two-state model sharing V, T and D with `model`.

    The defining expressions are ``u = N (1-Gamma)^2 / den``, ``w = Gamma u``,
    ``sigma = R_N u`` with ``den = (N+1-Gamma) R_N^2 - G_N R_N - (1-Gamma) S_N``.
    The three terms of ``den`` nearly cancel whenever ``L^2 - 2 D T`` is small,
    so ``den`` is not formed. It factorizes as

        den = N (1 - Gamma)^2 C_2 / prod_j u_j

    where ``C_2`` is the sum of the ``(N-2) x (N-2)`` principal minors of the
    negated generator (the ``lambda^2`` coefficient of its characteristic
    polynomial), a sum of positive terms. Hence ``u = prod_j u_j / C_2``,
    ``w = prod_j w_j / C_2`` and ``den > 0`` for every ``N >= 2``.

    Raises
    ------
    DegenerateVelocity
        if ``Gamma == 1`` (to within ``GAMMA_ONE_TOL``).
    InfeasibleAggregates
        if ``den <= 0``, equivalently ``L^2 <= 2DT``; this happens for ``N = 1``.
    """
    rep = compute_weights(model)
    gamma = rep.gamma
    if abs(1.0 - gamma) <= GAMMA_ONE_TOL:
        raise DegenerateVelocity(gamma)
    u, w = model.u, model.w
    log_c2 = _log_second_minor_sum(u, w)
    if log_c2 == -np.inf:
        raise InfeasibleAggregates(
            0.0, "L^2 - 2DT is not positive; no two-state model matches V, T and D")
    log_u = float(np.sum(np.log(u))) - log_c2
    with np.errstate(over="ignore"):
        agg_u = math.exp(log_u) if log_u < 709 else math.inf
        agg_w = math.exp(rep.log_gamma + log_u) if rep.log_gamma > -np.inf else 0.0
        log_sigma = rep.log_r_sum + log_u
        sigma = math.exp(log_sigma) if log_sigma < 709 else math.inf
    if not all(math.isfinite(x) for x in (agg_u, agg_w, sigma)) or agg_u == 0.0:
        raise NumericalOverflow("two-state aggregates leave the floating-point range")
    return Aggregates(u=agg_u, w=agg_w, sigma=sigma)


def _two_state_aggregates_printed(model: HoppingModel) -> Aggregates:
    """Aggregates straight from the defining expressions (loses accuracy
    when ``L^2 - 2DT`` is small); kept as a cross-check."""
    rep = compute_weights(model)
    g = 1.0 - rep.gamma
    N = model.period_count
    inv_R, g_term, s_term = _scaled_terms(rep)
    den = (N + 1 - rep.gamma) - g_term / inv_R - g * s_term / inv_R
    u = N * g * g * inv_R * inv_R / den
    return Aggregates(u=u, w=rep.gamma * u, sigma=N * g * g * inv_R / den)


def _ordered_roots(total, product):
    """Roots ``a >= b >= 0`` of ``t^2 - total t + product``, or None."""
    disc = total * total - 4.0 * product
    if disc < 0:
        if disc < -4 * ROUNDING_TOL * total * total:
            return None
        disc = 0.0
    big = 0.5 * (total + math.sqrt(disc))
    small = product / big if big > 0 else 0.0
    return big, small


def factorize_two_state(u: float, w: float, sigma: float, policy: str = "symmetric",
                        free_parameter: Optional[float] = None,
                        step_length: float = 1.0) -> TwoStateModel:
    """Choose four rates with ``u_r0 u_r1 = u``, ``w_r0 w_r1 = w`` and sum ``sigma``.

    ``policy="symmetric"`` sets ``w_r0 = w_r1 = sqrt(w)`` and takes ``u_r0 >= u_r1``
    as the roots of ``t^2 - (sigma - 2 sqrt(w)) t + u``. It succeeds exactly when
    ``sigma >= 2 sqrt(u) + 2 sqrt(w)``.

    ``policy="free"`` fixes ``u_r0 = free_parameter`` and ``u_r1 = u / u_r0``;
    ``w_r0 >= w_r1`` are then the roots of
    ``t^2 - (sigma - u_r0 - u_r1) t + w``.
    """
    if not (u > 0 and w >= 0 and sigma > 0):
        raise NoRealFactorization(u, w, sigma, "need u > 0, w >= 0, sigma > 0")
    if policy in ("symmetric", "symmetric-backward"):
        sw = math.sqrt(w)
        roots = _ordered_roots(sigma - 2.0 * sw, u)
        if roots is None or sigma - 2.0 * sw <= 0:
            raise NoRealFactorization(
                u, w, sigma, "sigma < 2 sqrt(u) + 2 sqrt(w) (AM-GM bound violated)")
        u0, u1 = roots
        w0 = w1 = sw
    elif policy == "free":
        if free_parameter is None or not free_parameter > 0:
            raise NoRealFactorization(u, w, sigma, "free policy needs a positive u_r0")
        u0 = float(free_parameter)
        u1 = u / u0
        rest = sigma - u0 - u1
        roots = _ordered_roots(rest, w) if rest >= 0 else None
        if roots is None:
            raise NoRealFactorization(
                u, w, sigma, f"u_r0={u0!r} leaves no real nonnegative backward rates")
        w0, w1 = roots
    else:
        raise ValueError(f"unknown factorization policy {policy!r}")
    if min(u0, u1) <= 0 or min(w0, w1) < 0:
        raise NoRealFactorization(u, w, sigma, "factorization yields a negative rate")
    return TwoStateModel(u0, u1, w0, w1, step_length)


def reduce_two_state(model: HoppingModel, policy: str = "symmetric",
                     free_parameter: Optional[float] = None,
                     check_tol: float = 1e-8) -> ReductionReport:
    """Two-state model with the same V, T and D.

    The aggregates are pushed back through the two-state closed forms and the
    factorized model through the general N-state formulas; a relative
    mismatch above `check_tol` raises :class:`~hopred.errors.NumericalError`.
    """
    stats = transport_stats(model)
    agg = two_state_aggregates(model)
    reduced = factorize_two_state(agg.u, agg.w, agg.sigma, policy, free_parameter,
                                  model.step_length)
    target = _stats_dict(stats)
    from_agg = dict(zip("VTD", two_state_stats(agg.u, agg.w, agg.sigma, model.step_length)))
    from_model = _stats_dict(transport_stats(reduced.to_hopping()))
    errors = {k: max(_rel(from_agg[k], target[k]), _rel(from_model[k], target[k]))
              for k in target}
    worst = max(errors.values())
    if not worst <= check_tol:
        raise NumericalError(
            f"two-state reduction misses the target statistics by {worst:.3g}")
    return ReductionReport(
        reduced=reduced,
        preserved=target,
        discarded={},
        preservation_error=errors,
        aggregates=agg,
        flags={"policy": policy},
    )
