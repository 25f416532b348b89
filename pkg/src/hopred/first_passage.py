"""Mean first-passage times of nearest-neighbour chains.

States ``-M .. K`` are interior, ``-(M+1)`` and ``K+1`` absorb. The mean
absorption time ``T_n`` from state ``n`` satisfies

    U_n (T_{n+1} - T_n) + W_n (T_{n-1} - T_n) = -1,   T_{-(M+1)} = T_{K+1} = 0.

:func:`mfpt_closed_form` evaluates the explicit solution of this recursion,
:func:`mfpt_linear_solve` solves the tridiagonal system directly and serves as
its oracle.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameter, NegativeBackwardRate, NonPositiveForwardRate
from .errors import NumericalOverflow, RateLengthMismatch, SingularSystem
from .models import HoppingModel, validate
from .steady_state import compute_weights

__all__ = [
    "IntervalProblem",
    "MFPTProfile",
    "mfpt_closed_form",
    "mfpt_linear_solve",
    "period_mfpt",
    "period_interval_problem",
]

_TINY = 1e-300
_HUGE = 1e300


@dataclass(frozen=True)
class IntervalProblem:
    """Chain on ``-M .. K`` with absorbing sites ``-(M+1)`` and ``K+1``.

    ``forward_rates[i]`` and ``backward_rates[i]`` belong to state ``i - M``.
    """

    M: int
    K: int
    forward_rates: tuple
    backward_rates: tuple
    start_state: int = 0

    def __post_init__(self):
        object.__setattr__(self, "forward_rates", tuple(float(x) for x in self.forward_rates))
        object.__setattr__(self, "backward_rates", tuple(float(x) for x in self.backward_rates))

    @property
    def left_absorber(self) -> int:
        return -(self.M + 1)

    @property
    def right_absorber(self) -> int:
        return self.K + 1

    @property
    def states(self) -> np.ndarray:
        """Interior state labels ``-M .. K``."""
        return np.arange(-self.M, self.K + 1)

    def validate(self):
        if self.M < 0 or self.K < 0:
            raise InvalidParameter("M, K", (self.M, self.K), "must both be >= 0")
        n = self.M + self.K + 1
        if len(self.forward_rates) != n or len(self.backward_rates) != n:
            raise RateLengthMismatch(len(self.forward_rates), len(self.backward_rates))
        for i, (U, W) in enumerate(zip(self.forward_rates, self.backward_rates)):
            if not (np.isfinite(U) and U > 0):
                raise NonPositiveForwardRate(i - self.M, U)
            if not (np.isfinite(W) and W >= 0):
                raise NegativeBackwardRate(i - self.M, W)
        if not -self.M <= self.start_state <= self.K:
            raise InvalidParameter("start_state", self.start_state,
                                   f"must lie in [{-self.M}, {self.K}]")


@dataclass(frozen=True)
class MFPTProfile:
    """Mean absorption times on ``-(M+1) .. K+1`` (zero at both absorbers)."""

    states: np.ndarray
    times: np.ndarray

    def at(self, n: int) -> float:
        return float(self.times[n - self.states[0]])

    @property
    def interior(self) -> np.ndarray:
        return self.times[1:-1]


def _profile(problem, interior):
    states = np.arange(problem.left_absorber, problem.right_absorber + 1)
    times = np.concatenate([[0.0], interior, [0.0]])
    return MFPTProfile(states, times)


def mfpt_closed_form(problem: IntervalProblem) -> MFPTProfile:
    """Explicit solution for every start state.

    With ``a_k = prod_{j=-M}^{k} W_j/U_j`` (``a_{-M-1} = 1``),
    ``A(n) = sum_{k=-M-1}^{n-1} a_k`` and
    ``c_k = sum_{i=-M}^{k-1} prod_{j=i}^{k-1} W_{j+1}/U_j``, the solution reads

        T_n = A(n) B(K+1) / A(K+1) - B(n),   B(n) = sum_{k=-M}^{n-1} (1 + c_k)/U_k.

    Both terms grow like the largest partial product while ``T_n`` need not,
    so the difference is regrouped into positive terms before evaluation.
    Writing ``m_i = 1/(U_i a_i)`` and ``A(K+1) - A(i) = sum_{k=i}^{K} a_k``:

        T_n A(K+1) = (A(K+1) - A(n)) sum_{i<n} m_i A(i)
                     + A(n) sum_{i>=n} m_i (A(K+1) - A(i)).
    """
    problem.validate()
    U = np.array(problem.forward_rates)
    W = np.array(problem.backward_rates)
    with np.errstate(over="ignore", under="ignore", invalid="ignore", divide="ignore"):
        a = np.cumprod(W / U)
        ok = np.all(np.isfinite(a)) and np.all(a < _HUGE) and np.all((a == 0) | (a > _TINY))
        if ok and np.all(a > 0):
            A = np.concatenate([[1.0], 1.0 + np.cumsum(a)])
            tail = np.cumsum(a[::-1])[::-1]          # A(K+1) - A(i)
            m = 1.0 / (U * a)
            left = np.concatenate([[0.0], np.cumsum(m * A[:-1])])[:-1]
            right = np.cumsum((m * tail)[::-1])[::-1]
            T = (tail * left + A[:-1] * right) / A[-1]
            if np.all(np.isfinite(T)):
                return _profile(problem, T)
    return _profile(problem, _closed_form_log(U, W))


def _closed_form_log(U, W):
    # log of rho(i, k) = a_k / a_i = prod_{l=i+1}^{k} W_l/U_l for k >= i, which
    # stays defined when some W_l vanish
    n = len(U)
    log_U = np.log(U)
    with np.errstate(divide="ignore"):
        log_ratio = np.log(W) - log_U
    upper = np.triu(np.ones((n, n), dtype=bool), 1)
    L = np.cumsum(np.where(upper, log_ratio[None, :], 0.0), axis=1)
    L[np.tril(np.ones((n, n), dtype=bool), -1)] = -np.inf
    # Q[i, c] = log sum_{k >= c} rho(i, k)
    Q = np.logaddexp.accumulate(L[:, ::-1], axis=1)[:, ::-1]
    log_a = np.cumsum(log_ratio)
    log_A = np.concatenate([[0.0], np.logaddexp(0.0, np.logaddexp.accumulate(log_a))])
    left_terms = (log_A[:-1] - log_U)[:, None] + Q     # [i, n]
    left_terms[~upper] = -np.inf                        # keep i < n
    log_left = np.logaddexp.reduce(left_terms, axis=0)
    log_right = np.logaddexp.accumulate((np.diag(Q) - log_U)[::-1])[::-1]
    log_T = np.logaddexp(log_left, log_A[:-1] + log_right) - log_A[-1]
    with np.errstate(over="ignore"):
        T = np.exp(log_T)
    if not np.all(np.isfinite(T)):
        raise NumericalOverflow("mean first-passage times exceed the floating-point range")
    return T


def mfpt_linear_solve(problem: IntervalProblem) -> MFPTProfile:
    """Solve the tridiagonal balance equations with zero boundary values.

    Thomas elimination on ``(U_n + W_n) T_n - U_n T_{n+1} - W_n T_{n-1} = 1``.
    Each pivot is carried as ``U_n + e_n`` where the slack
    ``e_n = W_n e_{n-1} / (U_{n-1} + e_{n-1})`` (``e_{-M} = W_{-M}``) is the
    pivot's excess over the remaining off-diagonal entry. The recurrence
    never subtracts, so every intermediate keeps full relative accuracy.
    """
    problem.validate()
    U = np.array(problem.forward_rates)
    W = np.array(problem.backward_rates)
    n = len(U)
    pivot = np.empty(n)
    rhs = np.empty(n)
    e = W[0]
    pivot[0] = U[0] + e
    rhs[0] = 1.0
    for i in range(1, n):
        f = W[i] / pivot[i - 1]
        e = f * e
        pivot[i] = U[i] + e
        rhs[i] = 1.0 + f * rhs[i - 1]
    if not (np.all(pivot > 0) and np.all(np.isfinite(rhs))):
        raise SingularSystem("elimination produced a zero or non-finite pivot")
    T = np.empty(n)
    T[-1] = rhs[-1] / pivot[-1]
    for i in range(n - 2, -1, -1):
        T[i] = (rhs[i] + U[i] * T[i + 1]) / pivot[i]
    if not np.all(np.isfinite(T)):
        raise SingularSystem("back substitution overflowed")
    return _profile(problem, T)


def period_interval_problem(model: HoppingModel) -> IntervalProblem:
    """Absorbing-interval problem for completing one cycle from state 0.

    Uses ``M = K = N - 1`` and the periodic extension ``U_n = u_{n mod N}``,
    so that absorption happens one full step ``L`` forward or backward.
    """
    validate(model)
    N = model.period_count
    idx = np.arange(-(N - 1), N) % N
    return IntervalProblem(N - 1, N - 1, model.u[idx], model.w[idx], 0)


def period_mfpt(model: HoppingModel) -> float:
    """Mean time to complete one forward or backward cycle, ``R_N / (1 + Gamma)``."""
    rep = compute_weights(model)
    if not rep.log_space:
        return rep.r_sum / (1.0 + rep.gamma)
    T = float(np.exp(rep.log_r_sum - np.logaddexp(0.0, rep.log_gamma)))
    if not np.isfinite(T):
        raise NumericalOverflow("period mean first-passage time overflows")
    return T
