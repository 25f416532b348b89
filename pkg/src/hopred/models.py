"""Model types for periodic one-dimensional hopping processes.

A :class:`HoppingModel` is a continuous-time random walk on a lattice whose
rates repeat with period ``N``: from internal state ``j`` the walker jumps
forward with rate ``u_j`` and backward with rate ``w_j``. After ``N`` net
forward jumps it has advanced by one step of length ``L``.

The reduced one- and two-state models and the continuous tilted-potential
model live here as well. All types are frozen dataclasses; rate sequences are
stored as tuples of floats and exposed as numpy arrays through properties.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Sequence

import numpy as np

from .errors import (
    EmptyModel,
    InvalidParameter,
    NegativeBackwardRate,
    NonFiniteRate,
    NonPositiveForwardRate,
    NonPositiveScale,
    NonPositiveStep,
    RateLengthMismatch,
)

__all__ = [
    "HoppingModel",
    "OneStateModel",
    "TwoStateModel",
    "Potential",
    "ContinuousModel",
    "validate",
    "validate_continuous",
    "rotate",
    "scale_rates",
]


def _as_float_tuple(values):
    return tuple(float(v) for v in np.asarray(values, dtype=float).ravel())


@dataclass(frozen=True)
class HoppingModel:
    """N-state periodic hopping model.

    Parameters
    ----------
    forward_rates : sequence of float
        ``u_0 .. u_{N-1}``, rates of jumping from state ``j`` to ``j+1``.
    backward_rates : sequence of float
        ``w_0 .. w_{N-1}``, rates of jumping from state ``j`` to ``j-1``.
    step_length : float
        Distance ``L`` travelled after one full forward cycle.

    Construction does not check invariants; call :func:`validate` (every
    computational routine does so on entry).
    """

    forward_rates: tuple
    backward_rates: tuple
    step_length: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "forward_rates", _as_float_tuple(self.forward_rates))
        object.__setattr__(self, "backward_rates", _as_float_tuple(self.backward_rates))
        object.__setattr__(self, "step_length", float(self.step_length))

    @property
    def period_count(self) -> int:
        return len(self.forward_rates)

    @property
    def u(self) -> np.ndarray:
        return np.array(self.forward_rates)

    @property
    def w(self) -> np.ndarray:
        return np.array(self.backward_rates)

    def __len__(self):
        return self.period_count


@dataclass(frozen=True)
class OneStateModel:
    """Single-state hopping model with rates ``u_r`` and ``w_r``."""

    forward_rate: float
    backward_rate: float
    step_length: float = 1.0

    def __post_init__(self):
        if not self.forward_rate > 0:
            raise NonPositiveForwardRate(0, self.forward_rate)
        if not self.backward_rate >= 0:
            raise NegativeBackwardRate(0, self.backward_rate)
        if not self.step_length > 0:
            raise NonPositiveStep(self.step_length)

    def to_hopping(self) -> HoppingModel:
        return HoppingModel([self.forward_rate], [self.backward_rate], self.step_length)


@dataclass(frozen=True)
class TwoStateModel:
    """Two-state hopping model.

    ``u``, ``w`` and ``sigma`` are the products of forward rates, products of
    backward rates and the sum of all four rates; together they determine the
    mean velocity, the cycle first-passage time and the diffusion constant.
    """

    u_r0: float
    u_r1: float
    w_r0: float
    w_r1: float
    step_length: float = 1.0

    def __post_init__(self):
        for i, rate in enumerate((self.u_r0, self.u_r1)):
            if not rate > 0:
                raise NonPositiveForwardRate(i, rate)
        for i, rate in enumerate((self.w_r0, self.w_r1)):
            if not rate >= 0:
                raise NegativeBackwardRate(i, rate)
        if not self.step_length > 0:
            raise NonPositiveStep(self.step_length)

    @property
    def u(self) -> float:
        return self.u_r0 * self.u_r1

    @property
    def w(self) -> float:
        return self.w_r0 * self.w_r1

    @property
    def sigma(self) -> float:
        return self.u_r0 + self.u_r1 + self.w_r0 + self.w_r1

    def to_hopping(self) -> HoppingModel:
        return HoppingModel([self.u_r0, self.u_r1], [self.w_r0, self.w_r1], self.step_length)


def validate(model: HoppingModel) -> None:
    """Raise a :class:`~hopred.errors.ModelError` unless `model` is valid.

    Checks, in order: non-empty, equal rate lengths, finite rates, ``u_j > 0``,
    ``w_j >= 0`` and ``L > 0``. The first offending index is reported.
    """
    u, w = model.forward_rates, model.backward_rates
    if len(u) == 0:
        raise EmptyModel()
    if len(u) != len(w):
        raise RateLengthMismatch(len(u), len(w))
    for j, (uj, wj) in enumerate(zip(u, w)):
        if not math.isfinite(uj):
            raise NonFiniteRate("forward", j, uj)
        if not math.isfinite(wj):
            raise NonFiniteRate("backward", j, wj)
        if not uj > 0:
            raise NonPositiveForwardRate(j, uj)
        if not wj >= 0:
            raise NegativeBackwardRate(j, wj)
    if not (math.isfinite(model.step_length) and model.step_length > 0):
        raise NonPositiveStep(model.step_length)


def rotate(model: HoppingModel, shift: int) -> HoppingModel:
    """Relabel states so that new state ``j`` is old state ``j + shift``."""
    validate(model)
    k = int(shift) % model.period_count
    return HoppingModel(
        np.roll(model.u, -k), np.roll(model.w, -k), model.step_length)


def scale_rates(model: HoppingModel, c: float) -> HoppingModel:
    """Multiply every rate by ``c > 0`` (a change of time unit)."""
    if not (c > 0 and math.isfinite(c)):
        raise NonPositiveScale(c)
    validate(model)
    return HoppingModel(model.u * c, model.w * c, model.step_length)


# -- continuous model --------------------------------------------------------

FAMILIES = ("sinusoidal", "sawtooth", "samples")


@dataclass(frozen=True)
class Potential:
    """Periodic part ``phi`` of a tilted potential.

    Families (``t = x / L`` is the position in units of the period):

    ``sinusoidal``
        ``amplitude * sin(2*pi*t + phase)``
    ``sawtooth``
        continuous piecewise-linear ratchet: rises from 0 to ``amplitude`` on
        ``[0, peak)`` and falls back to 0 on ``[peak, 1)``, with the pattern
        shifted left by ``phase / (2*pi)`` periods.
    ``samples``
        ``values`` taken at ``x_k = k L / M``, joined by a periodic cubic spline.
    """

    family: str = "sinusoidal"
    amplitude: float = 0.0
    phase: float = 0.0
    peak: float = 0.5
    values: Optional[tuple] = None

    def __post_init__(self):
        if self.values is not None:
            object.__setattr__(self, "values", _as_float_tuple(self.values))

    @classmethod
    def flat(cls) -> "Potential":
        return cls("sinusoidal", 0.0)

    @classmethod
    def sinusoidal(cls, amplitude, phase=0.0) -> "Potential":
        return cls("sinusoidal", float(amplitude), float(phase))

    @classmethod
    def sawtooth(cls, amplitude, peak=0.5, phase=0.0) -> "Potential":
        return cls("sawtooth", float(amplitude), float(phase), float(peak))

    @classmethod
    def from_samples(cls, values: Sequence[float]) -> "Potential":
        return cls("samples", values=values)


@dataclass(frozen=True)
class ContinuousModel:
    """Brownian particle in the tilted periodic potential ``phi(x) - F x``.

    Parameters
    ----------
    period_length : float
        Period ``L`` of ``phi``.
    tilt_force : float
        Constant force ``F``; positive values drive the particle forward.
    beta : float
        Inverse thermal energy ``1 / k_B T``.
    bare_diffusion : float
        Free diffusion constant ``D``.
    potential : Potential
        Periodic part of the potential.
    """

    period_length: float = 1.0
    tilt_force: float = 0.0
    beta: float = 1.0
    bare_diffusion: float = 1.0
    potential: Potential = field(default_factory=Potential.flat)

    @cached_property
    def _spline(self):
        from scipy.interpolate import CubicSpline

        vals = np.asarray(self.potential.values)
        M = len(vals)
        x = np.arange(M + 1) * (self.period_length / M)
        return CubicSpline(x, np.append(vals, vals[0]), bc_type="periodic")

    def phi(self, x):
        """Periodic part of the potential at `x` (vectorised)."""
        x = np.asarray(x, dtype=float)
        L = self.period_length
        pot = self.potential
        if pot.family == "sinusoidal":
            return pot.amplitude * np.sin(2 * np.pi * x / L + pot.phase)
        t = np.mod(x / L + pot.phase / (2 * np.pi), 1.0)
        if pot.family == "sawtooth":
            a = pot.peak
            return pot.amplitude * np.where(t < a, t / a, (1.0 - t) / (1.0 - a))
        return self._spline(t * L)

    def tilted(self, x):
        """Full potential ``Phi(x) = phi(x) - F x``."""
        x = np.asarray(x, dtype=float)
        return self.phi(x) - self.tilt_force * x

    def breakpoints(self) -> np.ndarray:
        """Points in ``[0, L]`` where ``phi`` may lose smoothness, endpoints included."""
        L = self.period_length
        pot = self.potential
        if pot.family == "sawtooth":
            shift = pot.phase / (2 * np.pi)
            kinks = np.mod(np.array([0.0, pot.peak]) - shift, 1.0) * L
        elif pot.family == "samples":
            kinks = np.arange(len(pot.values)) * (L / len(pot.values))
        else:
            kinks = np.array([])
        pts = np.unique(np.concatenate([[0.0, L], kinks]))
        # drop slivers produced by rounding next to the endpoints
        keep = np.concatenate([[True], np.diff(pts) > 1e-12 * L])
        pts = pts[keep]
        pts[-1] = L
        return pts

    @property
    def bias(self) -> float:
        """Dimensionless tilt ``beta F L``."""
        return self.beta * self.tilt_force * self.period_length


def validate_continuous(model: ContinuousModel) -> None:
    """Raise a :class:`~hopred.errors.ModelError` unless `model` is valid."""
    for name in ("period_length", "beta", "bare_diffusion"):
        value = getattr(model, name)
        if not (math.isfinite(value) and value > 0):
            raise InvalidParameter(name, value, "must be a finite positive number")
    if not math.isfinite(model.tilt_force):
        raise InvalidParameter("tilt_force", model.tilt_force, "must be finite")
    pot = model.potential
    if pot.family not in FAMILIES:
        raise InvalidParameter("potential.family", pot.family, f"must be one of {FAMILIES}")
    if pot.family == "samples":
        if pot.values is None or len(pot.values) < 3:
            raise InvalidParameter("potential.values", pot.values, "needs at least 3 samples")
        if not all(math.isfinite(v) for v in pot.values):
            raise InvalidParameter("potential.values", pot.values, "must be finite")
    else:
        for name in ("amplitude", "phase"):
            value = getattr(pot, name)
            if not math.isfinite(value):
                raise InvalidParameter(f"potential.{name}", value, "must be finite")
        if pot.family == "sawtooth" and not 0 < pot.peak < 1:
            raise InvalidParameter("potential.peak", pot.peak, "must lie strictly between 0 and 1")
