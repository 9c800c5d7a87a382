"""Scenario files: INI-style key/value text with optional sections.

Recognised sections and keys (every key is optional; missing keys take the
standard defaults)::

    [physics]    k
    [grid]       S, M
    [data]       N, J, phantom, sigma, seed, noise
    [algorithm]  algorithm, schedule, alpha, rho, outer_iterations, r
    [output]     snapshots, timing
    [sweep]      axis, values, algorithms

Keys may also appear before any section header. Strings may be quoted and
lists are comma separated. Every key name is unique across sections, which
is what lets ``--set key=value`` overrides use the bare key.
"""

import configparser
from dataclasses import dataclass, field
from pathlib import Path

from .experiments import ALGORITHMS, ScenarioConfig
from .filters import RegularizationSchedule

SECTIONS = {
    "physics": ("k",),
    "grid": ("S", "M"),
    "data": ("N", "J", "phantom", "sigma", "seed", "noise"),
    "algorithm": ("algorithm", "schedule", "alpha", "rho", "outer_iterations", "r"),
    "output": ("snapshots", "timing"),
    "sweep": ("axis", "values", "algorithms"),
}
KEY_SECTION = {key: sec for sec, keys in SECTIONS.items() for key in keys}

_ROOT = "__root__"
SWEEP_AXES = ("sigma", "alpha")
DEFAULT_SWEEP_ALGORITHMS = ("kfl_init", "kfl_carry", "ekf_init", "ekf_carry")


class ConfigError(ValueError):
    """Malformed or invalid scenario file; ``key`` names the offending entry."""

    def __init__(self, message, key=None, line=None):
        super().__init__(message)
        self.key = key
        self.line = line


@dataclass(frozen=True)
class OutputOptions:
    snapshots: bool = False
    timing: bool = False


@dataclass(frozen=True)
class SweepSpec:
    axis: str
    values: tuple
    algorithms: tuple = DEFAULT_SWEEP_ALGORITHMS


@dataclass(frozen=True)
class RunSettings:
    scenario: ScenarioConfig
    output: OutputOptions = field(default_factory=OutputOptions)
    sweep: SweepSpec | None = None
    raw: dict = field(default_factory=dict)


def _strip(value: str) -> str:
    value = value.strip()
    if len(value) >= 2 and value[0] == value[-1] and value[0] in "\"'":
        return value[1:-1]
    return value


def _read_pairs(text: str, source: str) -> dict:
    parser = configparser.ConfigParser(
        interpolation=None, comment_prefixes=("#", ";"), inline_comment_prefixes=("#",)
    )
    parser.optionxform = str  # keys are case sensitive: S, M, N, J
    try:
        parser.read_string(f"[{_ROOT}]\n" + text, source=source)
    except configparser.Error as exc:
        line = getattr(exc, "lineno", None)
        if line is None and getattr(exc, "errors", None):
            line = exc.errors[0][0]
        line = line - 1 if line else None
        raise ConfigError(f"{source}: parse error near line {line}: {exc.message.splitlines()[0]}",
                          line=line) from None

    pairs = {}
    for section in parser.sections():
        if section != _ROOT and section not in SECTIONS:
            raise ConfigError(f"{source}: unknown section [{section}]", key=section)
        for key, value in parser.items(section):
            expected = KEY_SECTION.get(key)
            if expected is None:
                raise ConfigError(f"{source}: unknown key {key!r}", key=key)
            if section not in (_ROOT, expected):
                raise ConfigError(f"{source}: key {key!r} belongs in [{expected}], not [{section}]", key=key)
            pairs[key] = _strip(value)
    return pairs


def _convert(key, raw, kind):
    try:
        if kind is bool:
            low = str(raw).lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        if kind is int:
            as_float = float(raw)
            if as_float != int(as_float):
                raise ValueError(raw)
            return int(as_float)
        return kind(raw)
    except (TypeError, ValueError):
        raise ConfigError(f"invalid value for {key}: {raw!r}", key=key) from None


_TYPES = {
    "k": float, "S": float, "M": int, "N": int, "J": int, "phantom": str, "sigma": float,
    "seed": int, "noise": str, "algorithm": str, "schedule": str, "alpha": float, "rho": float,
    "outer_iterations": int, "r": float, "snapshots": bool, "timing": bool,
}


def _positive_checks(values):
    checks = {
        "k": lambda v: v > 0, "S": lambda v: v > 0, "M": lambda v: v >= 1, "N": lambda v: v >= 1,
        "J": lambda v: v >= 1, "sigma": lambda v: v >= 0, "alpha": lambda v: v > 0,
        "rho": lambda v: 0 < v < 1, "outer_iterations": lambda v: v >= 0, "r": lambda v: v > 0,
    }
    for key, ok in checks.items():
        if key in values and not ok(values[key]):
            raise ConfigError(f"invalid value for {key}: {values[key]!r}", key=key)


def parse_overrides(items) -> dict:
    """Turn ``["key=value", ...]`` into a dict, validating key names."""
    out = {}
    for item in items or ():
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not of the form key=value")
        key, value = item.split("=", 1)
        key = key.strip().split(".")[-1]
        if key not in KEY_SECTION:
            raise ConfigError(f"unknown key {key!r} in override", key=key)
        out[key] = _strip(value)
    return out


def build_settings(pairs: dict) -> RunSettings:
    values = {key: _convert(key, pairs[key], kind) for key, kind in _TYPES.items() if key in pairs}
    _positive_checks(values)

    schedule_mode = values.pop("schedule", "constant")
    if schedule_mode not in ("constant", "morozov"):
        raise ConfigError(f"invalid value for schedule: {schedule_mode!r}", key="schedule")
    schedule = RegularizationSchedule(schedule_mode, values.pop("alpha", 100.0), values.pop("rho", 0.8))
    output = OutputOptions(values.pop("snapshots", False), values.pop("timing", False))

    fields = dict(values)
    for key in ("phantom", "algorithm", "noise"):
        if key in fields:
            fields[key] = fields[key].strip()
    try:
        scenario = ScenarioConfig(schedule=schedule, **fields)
    except ValueError as exc:
        key = next((k for k in ("phantom", "algorithm", "noise") if k in str(exc)), None)
        raise ConfigError(str(exc), key=key) from None

    sweep = None
    if any(k in pairs for k in ("axis", "values", "algorithms")):
        sweep = _build_sweep(pairs)
    return RunSettings(scenario, output, sweep, dict(pairs))


def _split_list(raw):
    return [item.strip().strip("\"'") for item in str(raw).strip("[]").split(",") if item.strip()]


def _build_sweep(pairs) -> SweepSpec:
    axis = pairs.get("axis", "sigma")
    if axis not in SWEEP_AXES:
        raise ConfigError(f"invalid value for axis: {axis!r}", key="axis")
    values = tuple(_convert("values", v, float) for v in _split_list(pairs.get("values", "")))
    if not values:
        raise ConfigError("sweep needs a nonempty values list", key="values")
    check = (lambda v: v >= 0) if axis == "sigma" else (lambda v: v > 0)
    if not all(check(v) for v in values):
        raise ConfigError(f"invalid value in values for axis {axis}", key="values")
    algorithms = tuple(_split_list(pairs["algorithms"])) if "algorithms" in pairs else DEFAULT_SWEEP_ALGORITHMS
    if not algorithms or any(a not in ALGORITHMS for a in algorithms):
        raise ConfigError(f"invalid value for algorithms: {algorithms!r}", key="algorithms")
    return SweepSpec(axis, values, algorithms)


def load_settings(path=None, overrides=None) -> RunSettings:
    """Read a scenario file (or nothing) and apply ``key=value`` overrides."""
    pairs = {}
    if path is not None:
        path = Path(path)
        if not path.is_file():
            raise ConfigError(f"config file not found: {path}")
        pairs = _read_pairs(path.read_text(), str(path))
    pairs.update(parse_overrides(overrides))
    return build_settings(pairs)


def parse_config(path) -> ScenarioConfig:
    """Validated :class:`ScenarioConfig` from a scenario file."""
    return load_settings(path).scenario
