"""Job configuration for the command-line front end.

A job is one JSON document::

    {
      "model": "two_tone",
      "method": "floquet",
      "truncation": 2,
      "params": {"g_minus": 0.28, "gp_over_gm": 0.7, "kappa": 0.2},
      "sweep": {"variable": "g_minus", "start": 0.01, "stop": 0.4, "points": 40},
      "observables": ["V_sq", "V_asq", "ratio"]
    }

Missing params fall back to per-model defaults. ``--set key=value`` flags
override the document using dotted keys (``params.g=0.2``).
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import Any

import numpy as np

from .errors import ConfigError
from .models import CoolingParams, LevitatedParams, TwoToneParams

MODELS = ("cooling", "two_tone", "levitated")
METHODS = ("lab", "rwa", "floquet", "time_domain")
OBSERVABLES = (
    "n_f",
    "V_sq",
    "V_asq",
    "V_sq_db",
    "V_asq_db",
    "ratio",
    "spectral_abscissa",
    "stable",
)
SCALES = ("linear", "log")

DEFAULT_PARAMS: dict[str, dict[str, float]] = {
    "cooling": {"g": 0.1, "kappa": 0.2, "gamma": 1e-6, "nbar": 1e3, "delta": 1.0},
    "two_tone": {"g_minus": 0.28, "g_plus": 0.196, "kappa": 0.2, "gamma": 2e-6, "nbar": 1e4},
    "levitated": {"g": 0.35, "alpha": 0.32, "kappa": 0.3, "gamma": 1e-9, "nbar": 2e7},
}
DEFAULT_TRUNCATION = {"cooling": 1, "two_tone": 2, "levitated": 3}
DEFAULT_OBSERVABLES = {
    "cooling": ("n_f",),
    "two_tone": ("V_sq", "V_asq", "ratio"),
    "levitated": ("V_sq", "V_asq", "ratio"),
}
PARAM_TYPES = {"cooling": CoolingParams, "two_tone": TwoToneParams, "levitated": LevitatedParams}
# two-tone jobs may fix g_plus as a multiple of g_minus
RATIO_KEY = "gp_over_gm"


@dataclass(frozen=True)
class Sweep:
    variable: str
    start: float
    stop: float
    points: int
    scale: str = "linear"

    def grid(self) -> np.ndarray:
        if self.points == 1:
            return np.array([self.start])
        if self.scale == "log":
            return np.geomspace(self.start, self.stop, self.points)
        return np.linspace(self.start, self.stop, self.points)

    def to_dict(self) -> dict[str, Any]:
        return {
            "variable": self.variable,
            "start": self.start,
            "stop": self.stop,
            "points": self.points,
            "scale": self.scale,
        }


@dataclass(frozen=True)
class JobConfig:
    model: str
    params: dict[str, float]
    method: str = "floquet"
    truncation: int | None = None
    sweep: Sweep | None = None
    sweep2: Sweep | None = None
    observables: tuple[str, ...] = ()
    k_max: int = 3
    rtol: float = 1e-3
    converge_on: str = "V_sq"

    @property
    def k(self) -> int:
        return DEFAULT_TRUNCATION[self.model] if self.truncation is None else self.truncation

    def with_point(self, **values: float) -> "JobConfig":
        return replace(self, params={**self.params, **values}, sweep=None, sweep2=None)

    def model_params(self):
        """Build the model's parameter record (resolving ``gp_over_gm``)."""
        values = dict(self.params)
        ratio = values.pop(RATIO_KEY, None)
        if ratio is not None:
            values["g_plus"] = ratio * values["g_minus"]
        try:
            return PARAM_TYPES[self.model](**values)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"params: {exc}") from exc

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "model": self.model,
            "method": self.method,
            "params": dict(sorted(self.params.items())),
            "observables": list(self.observables),
            "k_max": self.k_max,
            "rtol": self.rtol,
            "converge_on": self.converge_on,
        }
        if self.truncation is not None:
            out["truncation"] = self.truncation
        if self.sweep is not None:
            out["sweep"] = self.sweep.to_dict()
        if self.sweep2 is not None:
            out["sweep2"] = self.sweep2.to_dict()
        return out


def _number(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where}: expected a number, got {value!r}")
    if not np.isfinite(value):
        raise ConfigError(f"{where}: must be finite")
    return float(value)


def _integer(value, where: str, minimum: int) -> int:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or int(value) != value:
        raise ConfigError(f"{where}: expected an integer, got {value!r}")
    if value < minimum:
        raise ConfigError(f"{where}: must be >= {minimum}")
    return int(value)


def _parse_sweep(raw, model: str, params: dict, where: str) -> Sweep:
    if not isinstance(raw, dict):
        raise ConfigError(f"{where}: expected an object")
    unknown = set(raw) - {"variable", "start", "stop", "points", "scale"}
    if unknown:
        raise ConfigError(f"{where}: unknown field(s) {sorted(unknown)}")
    try:
        variable = raw["variable"]
        start, stop = raw["start"], raw["stop"]
    except KeyError as exc:
        raise ConfigError(f"{where}.{exc.args[0]}: required") from None
    allowed = set(DEFAULT_PARAMS[model]) | ({RATIO_KEY} if model == "two_tone" else set())
    if variable not in allowed:
        raise ConfigError(f"{where}.variable: {variable!r} is not a {model} parameter")
    if model == "two_tone" and variable == "g_plus" and RATIO_KEY in params:
        raise ConfigError(f"{where}.variable: g_plus is fixed by params.{RATIO_KEY}")
    sweep = Sweep(
        variable=variable,
        start=_number(start, f"{where}.start"),
        stop=_number(stop, f"{where}.stop"),
        points=_integer(raw.get("points", 1), f"{where}.points", 1),
        scale=raw.get("scale", "linear"),
    )
    if sweep.scale not in SCALES:
        raise ConfigError(f"{where}.scale: must be one of {SCALES}")
    if sweep.scale == "log" and (sweep.start <= 0 or sweep.stop <= 0):
        raise ConfigError(f"{where}: log sweeps need positive endpoints")
    return sweep


def parse_config(raw: dict) -> JobConfig:
    """Validate a decoded JSON document and build a :class:`JobConfig`."""
    if not isinstance(raw, dict):
        raise ConfigError("config: top level must be a JSON object")
    known = {
        "model", "method", "truncation", "params", "sweep", "sweep2",
        "observables", "k_max", "rtol", "converge_on",
    }
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"config: unknown field(s) {sorted(unknown)}")
    model = raw.get("model")
    if model not in MODELS:
        raise ConfigError(f"model: must be one of {MODELS}, got {model!r}")
    method = raw.get("method", "floquet")
    if method not in METHODS:
        raise ConfigError(f"method: must be one of {METHODS}, got {method!r}")
    if method == "lab" and model != "cooling":
        raise ConfigError("method: 'lab' is only available for the cooling model")

    given = raw.get("params", {})
    if not isinstance(given, dict):
        raise ConfigError("params: expected an object")
    allowed = set(DEFAULT_PARAMS[model]) | ({RATIO_KEY} if model == "two_tone" else set())
    for key in given:
        if key not in allowed:
            raise ConfigError(f"params.{key}: not a {model} parameter")
    params = {**DEFAULT_PARAMS[model]}
    params.update({k: _number(v, f"params.{k}") for k, v in given.items()})
    if RATIO_KEY in given and "g_plus" in given:
        raise ConfigError(f"params: give either g_plus or {RATIO_KEY}, not both")
    if RATIO_KEY in params:
        params.pop("g_plus", None)

    truncation = raw.get("truncation")
    if truncation is not None:
        truncation = _integer(truncation, "truncation", 0)

    sweep = _parse_sweep(raw["sweep"], model, params, "sweep") if raw.get("sweep") else None
    sweep2 = _parse_sweep(raw["sweep2"], model, params, "sweep2") if raw.get("sweep2") else None
    if sweep2 is not None and sweep is None:
        raise ConfigError("sweep2: requires sweep")
    if sweep and sweep2 and sweep.variable == sweep2.variable:
        raise ConfigError("sweep2.variable: must differ from sweep.variable")

    observables = raw.get("observables") or list(DEFAULT_OBSERVABLES[model])
    if isinstance(observables, str) or not isinstance(observables, list):
        raise ConfigError("observables: expected a list")
    for i, name in enumerate(observables):
        if name not in OBSERVABLES:
            raise ConfigError(f"observables[{i}]: unknown observable {name!r}")
    if len(set(observables)) != len(observables):
        raise ConfigError("observables: duplicates are not allowed")

    converge_on = raw.get("converge_on", "V_sq")
    if converge_on not in ("n_f", "V_sq", "V_asq", "ratio"):
        raise ConfigError("converge_on: must be one of n_f, V_sq, V_asq, ratio")

    config = JobConfig(
        model=model,
        params=params,
        method=method,
        truncation=truncation,
        sweep=sweep,
        sweep2=sweep2,
        observables=tuple(observables),
        k_max=_integer(raw.get("k_max", 3), "k_max", 1),
        rtol=_number(raw.get("rtol", 1e-3), "rtol"),
        converge_on=converge_on,
    )
    config.model_params()  # surfaces range errors (e.g. alpha >= 1) at parse time
    return config


def _set_path(doc: dict, dotted: str, value) -> None:
    keys = dotted.split(".")
    node = doc
    for key in keys[:-1]:
        child = node.get(key)
        if child is None:
            child = node[key] = {}
        if not isinstance(child, dict):
            raise ConfigError(f"--set {dotted}: {key} is not an object")
        node = child
    node[keys[-1]] = value


def apply_overrides(doc: dict, overrides: list[str]) -> dict:
    """Apply ``key=value`` overrides; values are JSON when they parse as JSON."""
    doc = json.loads(json.dumps(doc))
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"--set {item!r}: expected key=value")
        key, text = item.split("=", 1)
        try:
            value = json.loads(text)
        except json.JSONDecodeError:
            value = text
        _set_path(doc, key.strip(), value)
    return doc


def load_document(text: str, source: str = "config") -> dict:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{source}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
