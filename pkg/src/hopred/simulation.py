"""Monte Carlo trajectories of periodic hopping models.

Trajectories are simulated exactly (exponential waiting times, then a
forward jump with probability ``u_j / (u_j + w_j)``). They are processed in
fixed blocks of ``BLOCK_SIZE`` trajectories, all trajectories of a block
advanced together with numpy. Block ``b`` draws from its own Philox stream
seeded by ``SeedSequence(seed, spawn_key=(stream, b))``, so results depend on
the seed only: blocks may run on any number of threads, and per-trajectory
results are reduced in trajectory order.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DegenerateHorizon, JumpCapExceeded, SimulationConfigError
from .models import HoppingModel, validate
from .steady_state import compute_weights

__all__ = [
    "SimConfig",
    "SimEstimate",
    "simulate_transport",
    "simulate_first_passage",
    "expected_jumps",
    "default_horizon",
    "stationary_distribution",
    "BLOCK_SIZE",
]

BLOCK_SIZE = 1024
_TRANSPORT_STREAM = 0
_PASSAGE_STREAM = 1


@dataclass(frozen=True)
class SimConfig:
    """Simulation settings.

    Parameters
    ----------
    trajectory_count : int
        Number of independent trajectories (or first-passage trials).
    horizon : float
        Length of each transport trajectory, in time or in jumps.
    horizon_unit : {"time", "jumps"}
    rng_seed : int
        Unsigned 64-bit seed.
    burn_in : float, optional
        Initial stretch discarded before measuring displacements, in the unit
        of `horizon`. Defaults to 1% of the horizon.
    threads : int, optional
        Worker threads; defaults to ``$HOPRED_THREADS`` or 1. Has no effect
        on the results.
    max_jumps : int
        Safety cap on jumps in a single first-passage trial.
    initial : {"stationary", "zero"}
        Initial internal state of transport trajectories: drawn from the
        stationary distribution or always state 0. First-passage trials always start in 0.
    """

    trajectory_count: int = 10_000
    horizon: float = 100.0
    horizon_unit: str = "time"
    rng_seed: int = 0
    burn_in: Optional[float] = None
    threads: Optional[int] = None
    max_jumps: int = 10**9
    initial: str = "stationary"

    def __post_init__(self):
        if self.trajectory_count < 1:
            raise SimulationConfigError("trajectory_count must be >= 1")
        if not (self.horizon > 0 and math.isfinite(self.horizon)):
            raise SimulationConfigError("horizon must be a finite positive number")
        if self.horizon_unit not in ("time", "jumps"):
            raise SimulationConfigError("horizon_unit must be 'time' or 'jumps'")
        if not 0 <= self.rng_seed < 2**64:
            raise SimulationConfigError("rng_seed must be an unsigned 64-bit integer")
        if self.burn_in is not None and not 0 <= self.burn_in < self.horizon:
            raise SimulationConfigError("burn_in must lie in [0, horizon)")
        if self.threads is not None and self.threads < 1:
            raise SimulationConfigError("threads must be >= 1")
        if self.initial not in ("stationary", "zero"):
            raise SimulationConfigError("initial must be 'stationary' or 'zero'")

    @property
    def burn_in_value(self) -> float:
        return 0.01 * self.horizon if self.burn_in is None else self.burn_in

    @property
    def worker_count(self) -> int:
        if self.threads is not None:
            return self.threads
        env = os.environ.get("HOPRED_THREADS")
        return max(1, int(env)) if env else 1


@dataclass(frozen=True)
class SimEstimate:
    estimate: float
    stderr: float
    trajectory_count: int
    effective_sample_size: float
    seed: int

    def within(self, target: float, n_se: float = 4.0) -> bool:
        """True if `target` lies within `n_se` standard errors of the estimate."""
        return abs(self.estimate - target) <= n_se * self.stderr


def expected_jumps(model: HoppingModel, horizon_time: float) -> float:
    """Rough jump count over `horizon_time`: horizon times the harmonic mean
    of the total exit rates (every state weighted equally)."""
    total = model.u + model.w
    return horizon_time * len(total) / float(np.sum(1.0 / total))


def default_horizon(model: HoppingModel, cycles: float = 100.0) -> float:
    """Time horizon of ``cycles * N`` mean dwell times of the slowest state.

    The across-trajectory variance of the displacement is ``2 D t + c + o(1)``
    for a constant ``c`` set by the internal states, so ``var / (2 t)`` carries
    a bias of relative order ``1 / (cycles completed)``. Scaling the horizon
    with ``N`` keeps that bias well below the statistical error at ``10^4``
    trajectories.
    """
    validate(model)
    return cycles * model.period_count / float(np.min(model.u + model.w))


def stationary_distribution(model: HoppingModel) -> np.ndarray:
    """Stationary occupation probabilities ``p_j = r_j / R_N``."""
    return compute_weights(model).probabilities


def _initial_states(p, rng, n):
    if p is None:
        return np.zeros(n, dtype=np.int64)
    cdf = np.cumsum(p)
    cdf[-1] = 1.0
    return np.searchsorted(cdf, rng.random(n), side="right").astype(np.int64)


def _rng(seed, stream, block):
    ss = np.random.SeedSequence(seed, spawn_key=(stream, block))
    return np.random.Generator(np.random.Philox(ss))


def _blocks(n):
    return [(b, min(BLOCK_SIZE, n - b * BLOCK_SIZE)) for b in range((n + BLOCK_SIZE - 1) // BLOCK_SIZE)]


def _run_blocks(fn, config):
    blocks = _blocks(config.trajectory_count)
    workers = config.worker_count
    if workers > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(fn, blocks))
    else:
        parts = [fn(b) for b in blocks]
    return [np.concatenate(arrays) for arrays in zip(*parts)]


def _transport_block_time(u, w, p0, t_burn, t_end, rng, n):
    N = len(u)
    total = u + w
    p_fwd = u / total
    state = _initial_states(p0, rng, n)
    pos = np.zeros(n, dtype=np.int64)
    t = np.zeros(n)
    x_burn = np.zeros(n, dtype=np.int64)
    x_end = np.zeros(n, dtype=np.int64)
    burned = np.zeros(n, dtype=bool)
    active = np.arange(n)
    while active.size:
        s = state[active]
        t_new = t[active] + rng.standard_exponential(active.size) / total[s]
        # position held over [t, t_new) is the current one
        hit = ~burned[active] & (t_new >= t_burn)
        idx = active[hit]
        x_burn[idx] = pos[idx]
        burned[idx] = True
        done = t_new >= t_end
        idx = active[done]
        x_end[idx] = pos[idx]
        keep = ~done
        active = active[keep]
        t[active] = t_new[keep]
        step = np.where(rng.random(active.size) < p_fwd[state[active]], 1, -1)
        pos[active] += step
        state[active] = (state[active] + step) % N
    return (x_end - x_burn,)


def _transport_block_jumps(u, w, p0, n_burn, n_jumps, rng, n):
    N = len(u)
    total = u + w
    p_fwd = u / total
    state = _initial_states(p0, rng, n)
    pos = np.zeros(n, dtype=np.int64)
    t = np.zeros(n)
    for k in range(n_jumps):
        if k == n_burn:
            pos0, t0 = pos.copy(), t.copy()
        t += rng.standard_exponential(n) / total[state]
        step = np.where(rng.random(n) < p_fwd[state], 1, -1)
        pos += step
        state = (state + step) % N
    if n_burn == 0 or n_burn >= n_jumps:
        pos0, t0 = np.zeros(n, dtype=np.int64), np.zeros(n)
    return pos - pos0, t - t0


def simulate_transport(model: HoppingModel, config: SimConfig):
    """Estimate the mean velocity and the diffusion constant.

    With a time horizon ``t_end`` and burn-in ``t_b`` each trajectory
    contributes its displacement ``X = x(t_end) - x(t_b)``;
    ``V = mean(X) / (t_end - t_b)`` and ``D = var(X) / (2 (t_end - t_b))``.
    With a jump horizon the elapsed times differ between trajectories and
    the ratio estimators ``V = sum X / sum t`` and
    ``D = mean((X - V t)^2) / (2 mean(t))`` are used instead.

    Returns
    -------
    (SimEstimate, SimEstimate)
        Estimates of V and D.

    Raises
    ------
    DegenerateHorizon
        if fewer than 100 jumps per trajectory are expected.
    """
    validate(model)
    u, w = model.u, model.w
    scale = model.step_length / model.period_count
    seed = config.rng_seed
    n = config.trajectory_count
    p0 = stationary_distribution(model) if config.initial == "stationary" else None
    if config.horizon_unit == "time":
        jumps = expected_jumps(model, config.horizon)
        if jumps < 100 * (1 - 1e-12):          # exactly 100 is accepted despite rounding
            raise DegenerateHorizon(jumps)
        t_b, t_end = config.burn_in_value, config.horizon
        (disp,) = _run_blocks(
            lambda blk: _transport_block_time(u, w, p0, t_b, t_end, _rng(seed, _TRANSPORT_STREAM, blk[0]),
                                              blk[1]), config)
        X = disp * scale
        dt = t_end - t_b
        mean = float(np.mean(X))
        dev2 = (X - mean) ** 2
        var = float(np.sum(dev2) / (n - 1)) if n > 1 else 0.0
        V = SimEstimate(mean / dt, _se(X) / dt, n, float(n), seed)
        D = SimEstimate(var / (2 * dt), _se(dev2) / (2 * dt), n, float(n), seed)
        return V, D
    if config.horizon < 100:
        raise DegenerateHorizon(config.horizon)
    n_jumps = int(round(config.horizon))
    n_burn = int(round(config.burn_in_value))
    disp, times = _run_blocks(
        lambda blk: _transport_block_jumps(u, w, p0, n_burn, n_jumps,
                                           _rng(seed, _TRANSPORT_STREAM, blk[0]), blk[1]),
        config)
    X = disp * scale
    t_mean = float(np.mean(times))
    v = float(np.sum(X) / np.sum(times))
    resid = X - v * times
    r2 = resid**2
    V = SimEstimate(v, _se(resid) / t_mean, n, float(n), seed)
    D = SimEstimate(float(np.mean(r2)) / (2 * t_mean), _se(r2) / (2 * t_mean), n, float(n), seed)
    return V, D


def _se(values):
    n = len(values)
    if n < 2:
        return 0.0
    return float(np.std(values, ddof=1) / math.sqrt(n))


def _passage_block(u, w, max_jumps, rng, n):
    N = len(u)
    total = u + w
    p_fwd = u / total
    state = np.zeros(n, dtype=np.int64)
    pos = np.zeros(n, dtype=np.int64)
    t = np.zeros(n)
    active = np.arange(n)
    jumps = 0
    while active.size:
        if jumps >= max_jumps:
            raise JumpCapExceeded(max_jumps)
        s = state[active]
        t[active] += rng.standard_exponential(active.size) / total[s]
        step = np.where(rng.random(active.size) < p_fwd[s], 1, -1)
        pos[active] += step
        state[active] = (s + step) % N
        active = active[np.abs(pos[active]) < N]
        jumps += 1
    return (t,)


def simulate_first_passage(model: HoppingModel, config: SimConfig) -> SimEstimate:
    """Estimate the mean time to move one full step ``L`` forward or backward.

    Each trial starts in state 0 at position 0 and stops when the walker is
    ``N`` net jumps away in either direction.
    """
    validate(model)
    u, w = model.u, model.w
    seed = config.rng_seed
    (times,) = _run_blocks(
        lambda blk: _passage_block(u, w, config.max_jumps,
                                   _rng(seed, _PASSAGE_STREAM, blk[0]), blk[1]), config)
    n = len(times)
    return SimEstimate(float(np.mean(times)), _se(times), n, float(n), seed)
