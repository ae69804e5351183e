"""Run configuration: an INI-style text with flat sections.

Every key has a type, a default and a validator; unknown sections or keys
are rejected by name, and errors carry the line they come from.
"""
from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

from .core import DomainError, PhysicalParams, SpectralGrid, make_log_grid
from .manifold import QuadSettings


class ConfigError(ValueError):
    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line else message)


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _floats(text: str) -> tuple:
    return tuple(float(v) for v in text.split(",") if v.strip())


def _pairs(text: str) -> tuple:
    out = []
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        a, b = item.split(":")
        out.append((float(a), float(b)))
    return tuple(out)


def _ints(text: str) -> tuple:
    return tuple(int(v) for v in text.split(",") if v.strip())


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        if value and isinstance(value[0], tuple):
            return ", ".join(f"{_fmt(a)}:{_fmt(b)}" for a, b in value)
        return ", ".join(_fmt(v) for v in value)
    return str(value)


def _pos(v):
    return v > 0 and (not isinstance(v, float) or math.isfinite(v))


def _nonneg(v):
    return v >= 0 and math.isfinite(v)


def _finite(v):
    return math.isfinite(v)


@dataclass(frozen=True)
class Key:
    kind: Callable
    default: object
    check: Optional[Callable] = None
    rule: str = ""
    help: str = ""


SCHEMA = {
    "physics": {
        "f": Key(float, 1.0e-4, _nonneg, "f >= 0", "Coriolis parameter"),
        "g": Key(float, 9.81, _pos, "g > 0", "gravity"),
        "N": Key(float, 5.0e-3, _pos, "N > 0", "buoyancy frequency"),
        "rho0": Key(float, 1025.0, _pos, "rho0 > 0", "reference density"),
    },
    "grid": {
        "k_min": Key(float, 0.01, _pos, "k_min > 0"),
        "k_max": Key(float, 100.0, _pos, "k_max > 0"),
        "nk": Key(int, 8, lambda v: v >= 2, "nk >= 2"),
        "m_min": Key(float, 0.01, _pos, "m_min > 0"),
        "m_max": Key(float, 100.0, _pos, "m_max > 0"),
        "nm": Key(int, 8, lambda v: v >= 2, "nm >= 2"),
    },
    "quadrature": {
        "n_theta": Key(int, 24, lambda v: v >= 2, "n_theta >= 2"),
        "n_gauss": Key(int, 12, lambda v: v >= 2, "n_gauss >= 2"),
        "max_panel": Key(float, 0.25, _pos, "max_panel > 0"),
        "n_scan": Key(int, 1500, lambda v: v >= 2, "n_scan >= 2"),
        "refinement": Key(int, 0, lambda v: v >= 0, "refinement >= 0"),
        "truncation": Key(str, "box", lambda v: v in ("box", "window"), "box or window"),
        "window": Key(float, 30.0, lambda v: v > 1, "window > 1"),
        "edge_mapping": Key(_bool, True),
        "mixed_sign": Key(_bool, True),
        "kernel_norm": Key(float, 1.0, _pos, "kernel_norm > 0"),
        "k_prefactor_quarter": Key(_bool, False),
        "extrapolate": Key(_bool, True),
    },
    "spectrum": {
        "kind": Key(str, "power", lambda v: v in ("power", "equipartition", "bump"),
                    "power, equipartition or bump"),
        "amplitude": Key(float, 1.0, _pos, "amplitude > 0"),
        "x": Key(float, -3.5, _finite, "finite"),
        "y": Key(float, -0.5, _finite, "finite"),
        "width": Key(float, 1.0, _pos, "width > 0", "log-width of the bump spectrum"),
    },
    "scan": {
        "x_min": Key(float, -4.5, _finite, "finite"),
        "x_max": Key(float, -2.5, _finite, "finite"),
        "nx": Key(int, 9, lambda v: v >= 1, "nx >= 1"),
        "y_min": Key(float, -1.5, _finite, "finite"),
        "y_max": Key(float, 0.5, _finite, "finite"),
        "ny": Key(int, 9, lambda v: v >= 1, "ny >= 1"),
        "probes": Key(_pairs, ((1.0, 1.0), (3.0, 1.0), (1.0, 3.0)),
                      lambda v: len(v) > 0 and all(a > 0 and b != 0 for a, b in v),
                      "non-empty list of k:m with k > 0, m != 0"),
        "truncation": Key(str, "window", lambda v: v in ("box", "window"), "box or window"),
        "window": Key(float, 30.0, lambda v: v > 1, "window > 1"),
    },
    "locality": {
        "node_k": Key(float, 1.0, _pos, "node_k > 0"),
        "node_m": Key(float, 1.0, _pos, "node_m > 0"),
        "factors": Key(_floats, (4.0,), lambda v: len(v) > 0 and all(x > 1 for x in v),
                       "non-empty list of factors > 1"),
        "mode": Key(str, "each", lambda v: v in ("each", "sequence"), "each or sequence"),
        "tolerance": Key(float, 0.01, _pos, "tolerance > 0"),
    },
    "evolve": {
        "dt": Key(float, 1.0, _pos, "dt > 0"),
        "steps": Key(int, 10, lambda v: v >= 0, "steps >= 0"),
        "cfl": Key(float, 0.1, _pos, "cfl > 0"),
        "energy_tolerance": Key(float, 0.5, _pos, "energy_tolerance > 0"),
        "snapshot_every": Key(int, 1, lambda v: v >= 0, "snapshot_every >= 0"),
    },
    "triads": {
        "count": Key(int, 100, lambda v: v >= 1, "count >= 1"),
        "scale": Key(float, 1.0, _pos, "scale > 0", "typical wavenumber magnitude"),
    },
    "gm": {
        "E": Key(float, 1.0, _pos, "E > 0"),
        "m_star": Key(float, 1.0, _pos, "m_star > 0"),
        "f": Key(float, 1.0e-4, _pos, "f > 0"),
        "N": Key(float, 1.0e-2, _pos, "N > 0"),
        "k_min": Key(float, 1.0e4, _pos, "k_min > 0"),
        "k_max": Key(float, 1.0e5, _pos, "k_max > 0"),
        "m_min": Key(float, 1.0e3, _pos, "m_min > 0"),
        "m_max": Key(float, 1.0e4, _pos, "m_max > 0"),
        "n": Key(int, 11, lambda v: v >= 4, "n >= 4"),
        "wt_amplitude": Key(float, 1.0, _pos, "wt_amplitude > 0"),
    },
    "hamlab": {
        "model": Key(str, "LinearSW", lambda v: v in (
            "LinearSW", "NonlinearSW", "RotatingLinearSW", "RotatingNonlinearSW",
            "InternalWaves", "RotatingInternalWaves"), "a model kind name"),
        "f": Key(float, -1.0, lambda v: v == -1.0 or _nonneg(v), "f >= 0 (or -1 for the model default)"),
        "g": Key(float, 1.0, _pos, "g > 0"),
        "N": Key(float, 1.0, _pos, "N > 0"),
        "rho0": Key(float, 1.0, _pos, "rho0 > 0"),
        "shape": Key(_ints, (32, 32), lambda v: len(v) in (2, 3) and all(n >= 4 and n % 2 == 0 for n in v),
                     "2 or 3 even sizes >= 4"),
        "length": Key(float, 2 * math.pi, _pos, "length > 0"),
        "initial": Key(str, "random", lambda v: v in ("random", "plane"), "random or plane"),
        "mode": Key(_ints, (1, 0), None),
        "amplitude": Key(float, 1.0e-3, _pos, "amplitude > 0"),
        "dt": Key(float, 0.01, _pos, "dt > 0"),
        "steps": Key(int, 100, lambda v: v >= 0, "steps >= 0"),
        "scheme": Key(str, "rk4", lambda v: v in ("rk4", "midpoint"), "rk4 or midpoint"),
        "snapshot_every": Key(int, 0, lambda v: v >= 0, "snapshot_every >= 0"),
    },
    "run": {
        "seed": Key(int, 0, lambda v: v >= 0, "seed >= 0"),
        "deterministic": Key(_bool, False),
        "threads": Key(int, 0, lambda v: v >= 0, "threads >= 0 (0 = environment/default)"),
    },
}


@dataclass(frozen=True)
class RunConfig:
    values: dict = field(default_factory=dict)

    def __getitem__(self, section):
        return self.values[section]

    def __eq__(self, other):
        return isinstance(other, RunConfig) and self.values == other.values

    @property
    def params(self) -> PhysicalParams:
        p = self.values["physics"]
        return PhysicalParams(f=p["f"], g=p["g"], N=p["N"], rho0=p["rho0"])

    @property
    def grid(self) -> SpectralGrid:
        g = self.values["grid"]
        return make_log_grid(g["k_min"], g["k_max"], g["nk"], g["m_min"], g["m_max"], g["nm"])

    def quad(self, **override) -> QuadSettings:
        q = dict(self.values["quadrature"])
        q.update(override)
        return QuadSettings(**q)

    def to_text(self) -> str:
        lines = []
        for sec, keys in SCHEMA.items():
            lines.append(f"[{sec}]")
            for key in keys:
                lines.append(f"{key} = {_fmt(self.values[sec][key])}")
            lines.append("")
        return "\n".join(lines)


def default_config() -> RunConfig:
    return RunConfig({sec: {k: spec.default for k, spec in keys.items()} for sec, keys in SCHEMA.items()})


def _line_index(text):
    """(section, key) -> 1-based line number, and section -> header line."""
    where, sect, cur = {}, {}, None
    for no, raw in enumerate(text.splitlines(), start=1):
        s = raw.strip()
        if not s or s[0] in "#;":
            continue
        if s.startswith("[") and s.endswith("]"):
            cur = s[1:-1].strip()
            sect.setdefault(cur, no)
            continue
        for sep in ("=", ":"):
            if sep in s:
                where[(cur, s.split(sep, 1)[0].strip())] = no
                break
    return where, sect


def parse_config(text: str, base: Optional[RunConfig] = None) -> RunConfig:
    """Parse and validate configuration text on top of ``base`` (defaults)."""
    cp = configparser.ConfigParser(interpolation=None, delimiters=("=",),
                                   comment_prefixes=("#", ";"), inline_comment_prefixes=None)
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.MissingSectionHeaderError as e:
        raise ConfigError("expected a [section] header before the first key", e.lineno)
    except configparser.DuplicateOptionError as e:
        raise ConfigError(f"duplicate key {e.option!r} in [{e.section}]", e.lineno)
    except configparser.DuplicateSectionError as e:
        raise ConfigError(f"duplicate section [{e.section}]", e.lineno)
    except configparser.ParsingError as e:
        line = e.errors[0][0] if e.errors else None
        raise ConfigError(f"cannot parse {e.errors[0][1].strip()!r}" if e.errors else str(e), line)
    where, sect = _line_index(text)
    base = base or default_config()
    values = {s: dict(v) for s, v in base.values.items()}
    for sec in cp.sections():
        if sec not in SCHEMA:
            raise ConfigError(f"unknown section [{sec}]", sect.get(sec))
        for key, raw in cp.items(sec):
            line = where.get((sec, key))
            if key not in SCHEMA[sec]:
                raise ConfigError(f"unknown key {key!r} in [{sec}]", line)
            spec = SCHEMA[sec][key]
            try:
                value = spec.kind(raw)
            except (ValueError, TypeError):
                raise ConfigError(f"{sec}.{key}: cannot read {raw!r} as {spec.kind.__name__.strip('_')}", line)
            if spec.check is not None and not spec.check(value):
                raise ConfigError(f"{sec}.{key} = {raw}: must satisfy {spec.rule}", line)
            values[sec][key] = value
    cfg = RunConfig(values)
    _cross_validate(cfg, where)
    return cfg


def _cross_validate(cfg: RunConfig, where):
    g = cfg.values["grid"]
    for lo, hi in (("k_min", "k_max"), ("m_min", "m_max")):
        if not g[lo] < g[hi]:
            raise ConfigError(f"grid.{lo} must be < grid.{hi}", where.get(("grid", hi)))
    gm = cfg.values["gm"]
    for lo, hi in (("k_min", "k_max"), ("m_min", "m_max")):
        if not gm[lo] < gm[hi]:
            raise ConfigError(f"gm.{lo} must be < gm.{hi}", where.get(("gm", hi)))
    s = cfg.values["scan"]
    for lo, hi, n in (("x_min", "x_max", "nx"), ("y_min", "y_max", "ny")):
        if s[n] > 1 and not s[lo] < s[hi]:
            raise ConfigError(f"scan.{lo} must be < scan.{hi}", where.get(("scan", hi)))
    h = cfg.values["hamlab"]
    internal = "Internal" in h["model"]
    if len(h["shape"]) != (3 if internal else 2):
        raise ConfigError(f"hamlab.shape needs {3 if internal else 2} sizes for {h['model']}",
                          where.get(("hamlab", "shape")))
    if len(h["mode"]) != len(h["shape"]):
        raise ConfigError("hamlab.mode needs one integer per grid axis", where.get(("hamlab", "mode")))
    if h["f"] > 0 and "Rotating" not in h["model"]:
        raise ConfigError(f"hamlab.f must be 0 for the non-rotating {h['model']}", where.get(("hamlab", "f")))
    try:
        cfg.params
        cfg.quad()
    except DomainError as e:
        raise ConfigError(str(e))


def describe_defaults() -> str:
    return default_config().to_text()
