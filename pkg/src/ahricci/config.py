"""Line-based ``key = value`` run configuration with ``[section]`` headers.

Keys may appear under their section or, when the key name is unambiguous,
before any section header (``n = 3`` is ``grid.n``).  Overrides given as
``section.key=value`` or ``key=value`` are applied after the file.  Every
error names the offending line; a repeated key names both lines.  Unset
keys take their defaults, and the resolved table records where each value
came from so that defaults can be echoed into run metadata.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

from .experiments import ExperimentConfig
from .flow import INTEGRATORS

COMMANDS = ("flow", "spectrum", "sector", "indicial", "experiment", "gauge-check")
EXPERIMENTS = ("convergence", "stability", "dependence", "gauge", "scan")


class ConfigError(ValueError):
    """Invalid configuration; ``lines`` holds the offending line numbers (0 for overrides)."""

    def __init__(self, message: str, lines: Sequence[int] = ()):
        super().__init__(message)
        self.lines = tuple(lines)


# -- value types -------------------------------------------------------------

def _bool(s: str) -> bool:
    v = s.strip().lower()
    if v in ("true", "yes", "on", "1"):
        return True
    if v in ("false", "no", "off", "0"):
        return False
    raise ValueError(f"expected a boolean, got {s!r}")


def _float(s: str) -> float:
    v = s.strip().lower()
    if v in ("pi", "+pi"):
        return math.pi
    if v.startswith("pi/"):
        return math.pi / float(v[3:])
    x = float(s)
    if not math.isfinite(x):
        raise ValueError(f"expected a finite number, got {s!r}")
    return x


def _int(s: str) -> int:
    return int(s.strip())


def _float_list(s: str) -> Tuple[float, ...]:
    items = [x for x in s.split(",") if x.strip()]
    if not items:
        raise ValueError("expected a comma-separated list of numbers")
    return tuple(_float(x) for x in items)


def _str_list(s: str) -> Tuple[str, ...]:
    items = tuple(x.strip() for x in s.split(",") if x.strip())
    if not items:
        raise ValueError("expected a comma-separated list")
    return items


def _optional_float(s: str) -> Optional[float]:
    return None if s.strip().lower() in ("none", "auto", "") else _float(s)


def _choice(*options: str) -> Callable[[str], str]:
    def parse(s: str) -> str:
        v = s.strip()
        if v not in options:
            raise ValueError(f"expected one of {', '.join(options)}, got {v!r}")
        return v
    parse.__name__ = "one of " + "|".join(options)
    return parse


_TYPE_NAMES = {_bool: "bool", _float: "float", _int: "int", _float_list: "list of floats",
               _str_list: "list of names", _optional_float: "float or 'auto'", str: "string"}


@dataclass(frozen=True)
class Key:
    parse: Callable[[str], Any]
    default: Any
    check: Optional[Callable[[Any], Optional[str]]] = None

    @property
    def type_name(self) -> str:
        return _TYPE_NAMES.get(self.parse, getattr(self.parse, "__name__", "value"))


def _positive(x):
    return None if x > 0 else "must be positive"


def _all_positive(xs):
    return None if all(x > 0 for x in xs) else "entries must be positive"


def _nonneg_all(xs):
    return None if all(x >= 0 for x in xs) else "entries must be nonnegative"


def _range(lo, hi, lo_open=False, hi_open=False):
    def check(x):
        ok_lo = x > lo if lo_open else x >= lo
        ok_hi = x < hi if hi_open else x <= hi
        if ok_lo and ok_hi:
            return None
        return f"must lie in {'(' if lo_open else '['}{lo}, {hi}{')' if hi_open else ']'}"
    return check


SCHEMA: Dict[str, Dict[str, Key]] = {
    "grid": {
        "n": Key(_int, 3, _range(3, 64)),
        "r_max": Key(_float, 10.0, _range(5, 200)),
        "h": Key(_float, 0.05, _positive),
    },
    "norm": {
        "mu": Key(_float, 1.0),
        "k": Key(_int, 2, _range(0, 2)),
    },
    "flow": {
        "profile": Key(str, "zero"),
        "gauge": Key(_choice("deturck", "none", "chained"), "deturck"),
        "normalized": Key(_bool, True),
        "integrator": Key(_choice(*INTEGRATORS), "explicit-rk4"),
        "cfl_safety": Key(_float, 0.9, _range(0, 1, lo_open=True)),
        "dt": Key(_optional_float, None, lambda x: None if x is None or x > 0 else "must be positive"),
        "t_end": Key(_float, 5.0, _positive),
        "record_every": Key(_float, 0.1, _positive),
        "dissipation": Key(_float, 0.5, lambda x: None if x >= 0 else "must be nonnegative"),
        "segments": Key(_int, 4, _range(1, 10000)),
    },
    "spectral": {
        "base": Key(str, "zero"),
        "refine": Key(_bool, False),
        "tolerance": Key(_float, 0.1, _positive),
        "omega": Key(_float, 0.5),
        "theta": Key(_float, math.pi / 3, _range(0, math.pi, True, True)),
        "samples": Key(_int, 2048, _range(64, 10 ** 6)),
        "rmax": Key(_float, 1e4, _positive),
        "workers": Key(_int, 1, _range(1, 256)),
        "model": Key(_choice("scalar", "tensor"), "scalar"),
        "lam": Key(_float_list, (0.0, -1.0, -3.0)),
        "gamma_min": Key(_float, -0.25),
        "gamma_max": Key(_float, 5.0),
        "gamma_steps": Key(_int, 85, _range(3, 100000)),
        "root_tolerance": Key(_float, 0.05, _positive),
    },
    "experiment": {
        "name": Key(_choice(*EXPERIMENTS), "convergence"),
        "profile": Key(str, "gauss"),
        "t_end": Key(_float, 20.0, _positive),
        "record_every": Key(_float, 0.1, _positive),
        "eps_target": Key(_float, 1e-3, _positive),
        "floor_ratio": Key(_float, 100.0, _range(1, 1e12)),
        "r2_min": Key(_float, 0.99, _range(0, 1, lo_open=True)),
        "perturbations": Key(_str_list, ("rr-near", "rr-far", "sph-near", "both-mid", "rr-neg")),
        "random_bumps": Key(_int, 0, _range(0, 1000)),
        "deltas": Key(_float_list, (1e-2,), _nonneg_all),
        "tau": Key(_float, 1.0, _positive),
        "levels": Key(_float_list, (0.04, 0.02, 0.01), _all_positive),
        "segments": Key(_int, 4, _range(1, 10000)),
        "amplitudes": Key(_float_list, (0.0, 0.5, 1.0, 1.5, 2.0), _nonneg_all),
        "workers": Key(_int, 1, _range(1, 256)),
    },
}


def _index() -> Dict[str, List[str]]:
    idx: Dict[str, List[str]] = {}
    for sec, keys in SCHEMA.items():
        for k in keys:
            idx.setdefault(k, []).append(sec)
    return idx


_KEY_SECTIONS = _index()


@dataclass
class RunConfig:
    """Parsed configuration: ``values`` maps ``section.key`` to typed values."""

    values: Dict[str, Any]
    sources: Dict[str, str]
    command: Optional[str] = None
    config_path: Optional[str] = None
    out_dir: Optional[str] = None
    seed: int = 0
    overrides: List[str] = field(default_factory=list)

    def __getitem__(self, dotted: str) -> Any:
        return self.values[dotted]

    def section(self, name: str) -> Dict[str, Any]:
        return {k.split(".", 1)[1]: v for k, v in self.values.items() if k.startswith(name + ".")}

    def defaults_used(self) -> List[str]:
        return sorted(k for k, s in self.sources.items() if s == "default")

    def resolved(self) -> Dict[str, Dict[str, Any]]:
        """``{section.key: {"value": ..., "source": ...}}`` for every key, defaults included."""
        out = {}
        for k in sorted(self.values):
            v = self.values[k]
            out[k] = {"value": list(v) if isinstance(v, tuple) else v, "source": self.sources[k]}
        return out

    def experiment_config(self) -> ExperimentConfig:
        e = self.section("experiment")
        f = self.section("flow")
        g = self.section("grid")
        gauge = "none" if f["gauge"] == "none" else "deturck"
        return ExperimentConfig(n=g["n"], r_max=g["r_max"], h=g["h"], mu=self["norm.mu"],
                                t_end=e["t_end"], record_every=e["record_every"],
                                eps_target=e["eps_target"], integrator=f["integrator"],
                                cfl_safety=f["cfl_safety"], gauge=gauge,
                                floor_ratio=e["floor_ratio"], r2_min=e["r2_min"],
                                workers=e["workers"])


def _resolve_key(raw: str, section: Optional[str], line: int) -> str:
    raw = raw.strip()
    if "." in raw:
        sec, key = raw.split(".", 1)
        if sec not in SCHEMA:
            raise ConfigError(f"line {line}: unknown section {sec!r}", [line])
        section, raw = sec, key
    if section is not None:
        if raw not in SCHEMA[section]:
            raise ConfigError(f"line {line}: unknown key {raw!r} in section [{section}]", [line])
        return f"{section}.{raw}"
    secs = _KEY_SECTIONS.get(raw)
    if not secs:
        raise ConfigError(f"line {line}: unknown key {raw!r}", [line])
    if len(secs) > 1:
        opts = ", ".join(f"{s}.{raw}" for s in secs)
        raise ConfigError(f"line {line}: key {raw!r} is ambiguous outside a section ({opts})", [line])
    return f"{secs[0]}.{raw}"


def _convert(dotted: str, text: str, line: int, where: str) -> Any:
    sec, key = dotted.split(".", 1)
    spec = SCHEMA[sec][key]
    try:
        value = spec.parse(text.strip())
    except ValueError as exc:
        raise ConfigError(f"{where}: {dotted} expects {spec.type_name}, got {text.strip()!r} ({exc})",
                          [line]) from None
    if spec.check is not None:
        problem = spec.check(value)
        if problem:
            raise ConfigError(f"{where}: {dotted} = {text.strip()} {problem}", [line])
    return value


def parse_config(text: str, overrides: Sequence[str] = ()) -> RunConfig:
    """Parse configuration text plus ``key=value`` overrides into a validated :class:`RunConfig`."""
    values: Dict[str, Any] = {}
    sources: Dict[str, str] = {}
    lines_of: Dict[str, int] = {}
    section: Optional[str] = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].split(";", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ConfigError(f"line {lineno}: malformed section header {raw.strip()!r}", [lineno])
            name = line[1:-1].strip()
            if name not in SCHEMA:
                raise ConfigError(f"line {lineno}: unknown section [{name}]", [lineno])
            section = name
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}", [lineno])
        k, v = line.split("=", 1)
        dotted = _resolve_key(k, section, lineno)
        if dotted in lines_of:
            first = lines_of[dotted]
            raise ConfigError(f"line {lineno}: duplicate key {dotted} (first set on line {first})",
                              [first, lineno])
        values[dotted] = _convert(dotted, v, lineno, f"line {lineno}")
        sources[dotted] = f"line {lineno}"
        lines_of[dotted] = lineno
    for i, ov in enumerate(overrides, start=1):
        if "=" not in ov:
            raise ConfigError(f"override {i} ({ov!r}): expected key=value", [0])
        k, v = ov.split("=", 1)
        try:
            dotted = _resolve_key(k, None, 0)
        except ConfigError as exc:
            raise ConfigError(f"override {i} ({ov!r}): {str(exc).split(': ', 1)[1]}", [0]) from None
        values[dotted] = _convert(dotted, v, 0, f"override {i}")
        sources[dotted] = f"override {i}"
        lines_of[dotted] = 0
    for sec, keys in SCHEMA.items():
        for k, spec in keys.items():
            dotted = f"{sec}.{k}"
            if dotted not in values:
                values[dotted] = spec.default
                sources[dotted] = "default"
    _cross_checks(values, lines_of)
    return RunConfig(values, sources, overrides=list(overrides))


def _where(dotted: str, lines_of: Dict[str, int]) -> str:
    ln = lines_of.get(dotted)
    if ln is None:
        return f"default {dotted}"
    return f"line {ln}" if ln > 0 else f"override of {dotted}"


def _cross_checks(values: Dict[str, Any], lines_of: Dict[str, int]) -> None:
    n = values["grid.n"]
    mu = values["norm.mu"]
    if not 0 < mu < n - 1:
        ln = lines_of.get("norm.mu", 0)
        raise ConfigError(f"{_where('norm.mu', lines_of)}: mu = {mu:g} outside the admissible range "
                          f"μ ∈ (0, n−1) = (0, {n - 1}) for n = {n}", [ln])
    nodes = int(round(values["grid.r_max"] / values["grid.h"])) + 1
    if nodes < 16:
        ln = lines_of.get("grid.h", 0)
        raise ConfigError(f"{_where('grid.h', lines_of)}: h = {values['grid.h']:g} leaves only {nodes} "
                          "nodes (at least 16 needed)", [ln])
    if values["spectral.gamma_max"] <= values["spectral.gamma_min"]:
        ln = lines_of.get("spectral.gamma_max", 0)
        raise ConfigError(f"{_where('spectral.gamma_max', lines_of)}: gamma_max must exceed gamma_min", [ln])


def default_config_text() -> str:
    """A config file listing every key at its default value."""
    out = []
    for sec, keys in SCHEMA.items():
        out.append(f"[{sec}]")
        for k, spec in keys.items():
            v = spec.default
            if isinstance(v, tuple):
                v = ", ".join(repr(x) if isinstance(x, float) else str(x) for x in v)
            elif v is None:
                v = "auto"
            elif isinstance(v, bool):
                v = "true" if v else "false"
            out.append(f"{k} = {v}")
        out.append("")
    return "\n".join(out)
