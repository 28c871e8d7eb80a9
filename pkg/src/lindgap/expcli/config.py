"""Scenario configuration: JSON documents with a fixed set of keys.

Unknown keys anywhere are rejected so a typo never silently falls back to a
default.  See ``docs/config.md`` for an annotated example of every scenario.
"""
from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import UsageError

SCENARIOS = (
    "isolated",
    "micro_random",
    "micro_gravitational",
    "lindblad",
    "lindblad_tdep",
    "compare",
    "threshold_scan",
)

# key -> (type(s), default); nested sections listed separately
TOP_LEVEL = {
    "scenario": (str, None),
    "omega": ((int, float), 1.0),
    "lambda": ((int, float, type(None)), None),
    "lambda_tilde": ((int, float, type(None)), None),
    "n_env": (int, 6),
    "seed": (int, 0),
    "coupling_scale": ((int, float), 1.0),
    "local_terms": (list, [0.0, 0.0]),
    "tolerance": ((int, float), 1e-9),
    "self_check": (bool, False),
    "gravity": ((dict, type(None)), None),
    "time_grid": (dict, {}),
    "fit_grid": (dict, {}),
    "calibration": (dict, {}),
    "threshold": (dict, {}),
    "sweep": ((dict, type(None)), None),
    "output": (dict, {}),
}

SECTIONS = {
    "gravity": {
        "G": ((int, float), 1.0),
        "m1": ((int, float), 2.0),
        "m2": ((int, float), 1.0),
        "dA": ((list, type(None)), None),
        "dB": ((list, type(None)), None),
        "d_ab": ((int, float), 1.0),
        "d_range": (list, [1.0, 5.0]),
    },
    "time_grid": {
        "t_max": ((int, float, type(None)), None),
        "t_min": ((int, float, type(None)), None),
        "points": (int, 200),
        "spacing": (str, "linear"),
    },
    "fit_grid": {
        "t_min": ((int, float), 1e-5),
        "t_max": ((int, float), 1e-3),
        "per_decade": (int, 25),
    },
    "calibration": {
        "lambda_factor": ((int, float), 1.0),
        "lambda_tilde_factor": ((int, float), 0.5),
    },
    "threshold": {
        "low": ((int, float, type(None)), None),
        "high": ((int, float, type(None)), None),
        "resolution": ((int, float), 1e-3),
        "mode": (str, "numeric"),
    },
    "sweep": {
        "parameter": (str, "lambda_ratio"),
        "values": (list, []),
        "resume": (bool, False),
        "workers": (int, 1),
    },
    "output": {
        "dir": (str, "out"),
        "stem": ((str, type(None)), None),
        "plot": (bool, True),
        "loglog": (bool, False),
    },
}

# Settings that change how a run executes but not what it computes.
NON_PHYSICS = {("sweep", "resume"), ("sweep", "workers"), ("output", "dir")}


def _check_section(name, data, spec):
    if not isinstance(data, dict):
        raise UsageError(f"{name} must be an object")
    unknown = sorted(set(data) - set(spec))
    if unknown:
        raise UsageError(f"unknown key(s) in {name}: {', '.join(unknown)}")
    out = {}
    for key, (types, default) in spec.items():
        value = data.get(key, copy.deepcopy(default))
        if isinstance(value, bool) and bool not in (types if isinstance(types, tuple) else (types,)):
            raise UsageError(f"{name}.{key} has the wrong type")
        if not isinstance(value, types):
            raise UsageError(f"{name}.{key} has the wrong type ({type(value).__name__})")
        out[key] = value
    return out


@dataclass
class ScenarioConfig:
    """Validated configuration. ``data`` holds every key with defaults filled in."""

    data: dict = field(default_factory=dict)
    source: str | None = None

    def __getitem__(self, key):
        return self.data[key]

    @property
    def scenario(self) -> str:
        return self.data["scenario"]

    def section(self, name) -> dict:
        return self.data[name]

    def physics_dict(self) -> dict:
        d = copy.deepcopy(self.data)
        for sec, key in NON_PHYSICS:
            if isinstance(d.get(sec), dict):
                d[sec].pop(key, None)
        return d

    def config_hash(self) -> str:
        blob = json.dumps(self.physics_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    @property
    def stem(self) -> str:
        return self.data["output"]["stem"] or self.scenario

    @property
    def out_dir(self) -> Path:
        return Path(self.data["output"]["dir"])


def validate_config(raw: dict, source=None) -> ScenarioConfig:
    """Check keys and types, fill defaults, and apply cross-field rules."""
    if not isinstance(raw, dict):
        raise UsageError("configuration must be a JSON object")
    if "scenario" not in raw:
        raise UsageError("configuration needs a 'scenario' key")
    data = _check_section("config", raw, TOP_LEVEL)
    if data["scenario"] not in SCENARIOS:
        raise UsageError(f"scenario must be one of {', '.join(SCENARIOS)}")
    for name, spec in SECTIONS.items():
        if data[name] is None:
            continue
        data[name] = _check_section(name, data[name], spec)
    for key in ("omega", "coupling_scale", "tolerance"):
        data[key] = float(data[key])
    if data["tolerance"] <= 0:
        raise UsageError("tolerance must be positive")
    if data["lambda"] is not None and data["lambda"] < 0:
        raise UsageError("lambda must be non-negative")
    if data["lambda_tilde"] is not None and data["lambda_tilde"] < 0:
        raise UsageError("lambda_tilde must be non-negative")
    if not 0 <= data["n_env"] <= 12:
        raise UsageError("n_env must be between 0 and 12")
    if len(data["local_terms"]) != 2:
        raise UsageError("local_terms must be [cA, cB]")
    tg = data["time_grid"]
    if tg["spacing"] not in ("linear", "log"):
        raise UsageError("time_grid.spacing must be 'linear' or 'log'")
    if tg["points"] < 1:
        raise UsageError("time_grid.points must be positive")
    if tg["spacing"] == "log" and tg["t_min"] is not None and tg["t_min"] <= 0:
        raise UsageError("log time grids need t_min > 0")
    fg = data["fit_grid"]
    if not 0 < fg["t_min"] < fg["t_max"]:
        raise UsageError("fit_grid needs 0 < t_min < t_max")
    if data["threshold"]["mode"] not in ("numeric", "analytic"):
        raise UsageError("threshold.mode must be 'numeric' or 'analytic'")
    if data["scenario"] == "lindblad" and data["lambda"] is None:
        raise UsageError("scenario 'lindblad' needs lambda")
    if data["scenario"] == "lindblad_tdep" and data["lambda_tilde"] is None:
        raise UsageError("scenario 'lindblad_tdep' needs lambda_tilde")
    if data["scenario"] == "threshold_scan" and data["omega"] == 0:
        raise UsageError("threshold scan needs omega != 0")
    sw = data["sweep"]
    if sw is not None:
        if sw["parameter"] not in ("lambda_ratio", "n_env"):
            raise UsageError("sweep.parameter must be 'lambda_ratio' or 'n_env'")
        if sw["workers"] < 1:
            raise UsageError("sweep.workers must be at least 1")
        for v in sw["values"]:
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise UsageError("sweep.values must be numbers")
        if sw["parameter"] == "n_env" and any(int(v) != v or not 1 <= v <= 12 for v in sw["values"]):
            raise UsageError("n_env sweep values must be integers in [1, 12]")
    return ScenarioConfig(data, source)


def load_config(path, overrides=None) -> ScenarioConfig:
    """Read a JSON config file and apply ``overrides`` (e.g. from CLI flags)."""
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except FileNotFoundError:
        raise UsageError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: invalid JSON ({exc})") from None
    raw = apply_overrides(raw, overrides or {})
    return validate_config(raw, str(path))


def apply_overrides(raw: dict, overrides: dict) -> dict:
    raw = copy.deepcopy(raw)
    for key, value in overrides.items():
        if value is None:
            continue
        if "." in key:
            sec, sub = key.split(".", 1)
            section = raw.get(sec)
            if section is None:
                section = raw[sec] = {}
            section[sub] = value
        else:
            raw[key] = value
    return raw


def config_schema() -> dict:
    """JSON-schema style description of every accepted key."""
    def describe(spec):
        props = {}
        for key, (types, default) in spec.items():
            tt = types if isinstance(types, tuple) else (types,)
            names = sorted({_JSON_NAMES[t] for t in tt})
            props[key] = {"type": names if len(names) > 1 else names[0], "default": default}
        return {"type": "object", "additionalProperties": False, "properties": props}

    schema = describe(TOP_LEVEL)
    schema["properties"]["scenario"]["enum"] = list(SCENARIOS)
    schema["required"] = ["scenario"]
    for name, spec in SECTIONS.items():
        schema["properties"][name] = describe(spec)
    return schema


_JSON_NAMES = {str: "string", int: "number", float: "number", bool: "boolean",
               list: "array", dict: "object", type(None): "null"}
