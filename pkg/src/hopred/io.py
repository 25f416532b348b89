"""JSON model files.

Discrete::

    {"kind": "discrete", "period_count": 2, "step_length": 1.0,
     "forward_rates": [2, 3], "backward_rates": [1, 0.5]}

Continuous::

    {"kind": "continuous", "period_length": 1.0, "tilt_force": 1.0,
     "beta": 1.0, "bare_diffusion": 1.0,
     "potential": {"family": "sinusoidal", "amplitude": 2.0, "phase": 0.0}}

``potential`` may also be ``{"family": "sawtooth", "amplitude": A, "phase": p}``
(optional ``"peak"`` in (0, 1), default 0.5) or
``{"family": "samples", "values": [...]}``. Unknown fields are rejected, and
NaN/Infinity literals are refused.
"""
from __future__ import annotations

import json
import math
import os
from typing import Union

from .errors import ModelError, ParseError, SchemaError
from .models import ContinuousModel, HoppingModel, Potential, validate, validate_continuous

__all__ = ["load_model", "save_model", "model_from_dict", "model_to_dict"]

AnyModel = Union[HoppingModel, ContinuousModel]

_DISCRETE_KEYS = {"kind", "period_count", "step_length", "forward_rates", "backward_rates"}
_CONTINUOUS_KEYS = {"kind", "period_length", "tilt_force", "beta", "bare_diffusion", "potential"}
_POTENTIAL_KEYS = {
    "sinusoidal": ({"family", "amplitude", "phase"}, set()),
    "sawtooth": ({"family", "amplitude", "phase"}, {"peak"}),
    "samples": ({"family", "values"}, set()),
}


def _reject_constant(name):
    raise ValueError(f"non-finite literal {name} is not allowed")


def _check_keys(obj, required, optional, where):
    if not isinstance(obj, dict):
        raise SchemaError(where, "must be a JSON object")
    for key in obj:
        if key not in required and key not in optional:
            raise SchemaError(f"{where}.{key}" if where else key, "unknown field")
    for key in sorted(required):
        if key not in obj:
            raise SchemaError(f"{where}.{key}" if where else key, "missing required field")


def _number(obj, key, where=""):
    value = obj[key]
    name = f"{where}.{key}" if where else key
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaError(name, f"must be a number, got {type(value).__name__}")
    if not math.isfinite(value):
        raise SchemaError(name, "must be finite")
    return float(value)


def _number_list(obj, key):
    value = obj[key]
    if not isinstance(value, list):
        raise SchemaError(key, "must be an array of numbers")
    out = []
    for i, item in enumerate(value):
        if isinstance(item, bool) or not isinstance(item, (int, float)):
            raise SchemaError(f"{key}[{i}]", "must be a number")
        out.append(float(item))
    return out


def model_from_dict(data: dict) -> AnyModel:
    """Build and validate a model from its decoded JSON object."""
    if not isinstance(data, dict):
        raise SchemaError("", "top level must be a JSON object")
    kind = data.get("kind")
    if kind == "discrete":
        _check_keys(data, _DISCRETE_KEYS, set(), "")
        n = data["period_count"]
        if isinstance(n, bool) or not isinstance(n, int):
            raise SchemaError("period_count", "must be an integer")
        if n < 1:
            raise SchemaError("period_count", f"must be >= 1, got {n}")
        u = _number_list(data, "forward_rates")
        w = _number_list(data, "backward_rates")
        for key, rates in (("forward_rates", u), ("backward_rates", w)):
            if len(rates) != n:
                raise SchemaError(key, f"has {len(rates)} entries, period_count is {n}")
        model = HoppingModel(u, w, _number(data, "step_length"))
        validate(model)
        return model
    if kind == "continuous":
        _check_keys(data, _CONTINUOUS_KEYS, set(), "")
        pot = data["potential"]
        if not isinstance(pot, dict):
            raise SchemaError("potential", "must be a JSON object")
        family = pot.get("family")
        if family not in _POTENTIAL_KEYS:
            raise SchemaError("potential.family",
                              f"must be one of {sorted(_POTENTIAL_KEYS)}, got {family!r}")
        required, optional = _POTENTIAL_KEYS[family]
        _check_keys(pot, required, optional, "potential")
        if family == "samples":
            values = _number_list(pot, "values")
            potential = Potential.from_samples(values)
        else:
            potential = Potential(
                family,
                _number(pot, "amplitude", "potential"),
                _number(pot, "phase", "potential"),
                _number(pot, "peak", "potential") if "peak" in pot else 0.5,
            )
        model = ContinuousModel(
            period_length=_number(data, "period_length"),
            tilt_force=_number(data, "tilt_force"),
            beta=_number(data, "beta"),
            bare_diffusion=_number(data, "bare_diffusion"),
            potential=potential,
        )
        try:
            validate_continuous(model)
        except ModelError as exc:
            raise SchemaError(getattr(exc, "name", "potential"), str(exc)) from exc
        return model
    raise SchemaError("kind", f"must be 'discrete' or 'continuous', got {kind!r}")


def model_to_dict(model: AnyModel) -> dict:
    if isinstance(model, HoppingModel):
        return {
            "kind": "discrete",
            "period_count": model.period_count,
            "step_length": model.step_length,
            "forward_rates": list(model.forward_rates),
            "backward_rates": list(model.backward_rates),
        }
    if isinstance(model, ContinuousModel):
        pot = model.potential
        if pot.family == "samples":
            pdict = {"family": "samples", "values": list(pot.values)}
        else:
            pdict = {"family": pot.family, "amplitude": pot.amplitude, "phase": pot.phase}
            if pot.family == "sawtooth":
                pdict["peak"] = pot.peak
        return {
            "kind": "continuous",
            "period_length": model.period_length,
            "tilt_force": model.tilt_force,
            "beta": model.beta,
            "bare_diffusion": model.bare_diffusion,
            "potential": pdict,
        }
    raise TypeError(f"cannot serialise {type(model).__name__}")


def load_model(path: Union[str, os.PathLike]) -> AnyModel:
    """Read a discrete or continuous model from a JSON file."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    try:
        data = json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno, exc.colno) from exc
    except ValueError as exc:
        raise ParseError(str(exc)) from exc
    return model_from_dict(data)


def save_model(model: AnyModel, path: Union[str, os.PathLike]) -> None:
    """Write `model` as JSON; floats use the shortest round-tripping repr."""
    data = model_to_dict(model)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(data, fh, indent=2, allow_nan=False)
        fh.write("\n")
