"""Runtime-tunable loop parameters.

Changes arrive through the gateway queue and are applied only between
iterations, so a running iteration always sees one consistent set. The
scan interval is capped at 2 s: decisions any slower cannot track a
walking user.
"""

from __future__ import annotations

from dataclasses import dataclass, fields

MAX_SCAN_INTERVAL_S = 2.0


class ParamError(ValueError):
    """Unknown parameter name or value outside its allowed range."""


@dataclass(frozen=True)
class Parameters:
    alpha: float = 0.8
    scan_interval: float = 1.0
    hysteresis: float = 6.0
    load_penalty_beta: float = 3.0
    stale_scans_limit: int = 3
    scan_duration: float = 0.06

    def replace(self, name: str, value) -> "Parameters":
        validated = validate_param(name, value)
        data = {f.name: getattr(self, f.name) for f in fields(self)}
        data[name] = validated
        return Parameters(**data)

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def _float_in(lo: float, hi: float, lo_open: bool = False):
    def check(value):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ParamError(f"must be a number, got {value!r}")
        value = float(value)
        if lo_open and value <= lo or not lo_open and value < lo or value > hi:
            bound = f"({lo}, {hi}]" if lo_open else f"[{lo}, {hi}]"
            raise ParamError(f"must be in {bound}, got {value}")
        return value

    return check


def _positive_int(value):
    if isinstance(value, bool) or not isinstance(value, int):
        raise ParamError(f"must be an integer, got {value!r}")
    if value < 1:
        raise ParamError(f"must be >= 1, got {value}")
    return value


_VALIDATORS = {
    "alpha": _float_in(0.0, 1.0),
    "scan_interval": _float_in(0.0, MAX_SCAN_INTERVAL_S, lo_open=True),
    "hysteresis": _float_in(0.0, float("inf")),
    "load_penalty_beta": _float_in(0.0, float("inf")),
    "stale_scans_limit": _positive_int,
    "scan_duration": _float_in(0.0, MAX_SCAN_INTERVAL_S, lo_open=True),
}

PARAM_NAMES = tuple(_VALIDATORS)


def validate_param(name: str, value):
    """Coerce and range-check one parameter value; raises ParamError."""
    validator = _VALIDATORS.get(name)
    if validator is None:
        raise ParamError(f"unknown parameter {name!r} (known: {', '.join(PARAM_NAMES)})")
    try:
        return validator(value)
    except ParamError as exc:
        raise ParamError(f"{name}: {exc}") from None


def parameters_from_overrides(overrides: dict) -> Parameters:
    params = Parameters()
    for name, value in overrides.items():
        params = params.replace(name, value)
    return params
