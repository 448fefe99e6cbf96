"""Scenario configuration: a YAML file with nested blocks.

Parsing keeps the node marks from PyYAML so every schema error names the
line it comes from.  Unknown keys are errors.

Example::

    domain: {kind: torus, d: 1, period: 1.0}
    alpha: 1.5
    perturbation:
      drift: {family: bump, center: [0.5], width: 0.1, vector: [1.0]}
      potential: {family: bump, center: [0.3], width: 0.1, height: 1.0}
    grid: {nodes_per_axis: 64, time_slices: 16}
    solve: {t_max: 0.2}
    kato: {gamma: 1, beta: 1}
    report: {checks: [laplace, kato], seed: 0}
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import yaml
from yaml.constructor import SafeConstructor

from .duhamel import SolveConfig
from .fields import (
    Bump, BumpDrift, Constant, ConstantDrift, RadialPower, ScalarField, Separable, SwirlDrift,
    TimeProfile, VectorField,
)
from .geometry import Domain, GridSpec, euclidean_box, torus

DRIFT_FAMILIES = ("zero", "constant", "bump", "swirl")
POTENTIAL_FAMILIES = ("zero", "constant", "bump", "radial_power")


class ConfigError(Exception):
    """Schema violations, each prefixed with its line number."""

    def __init__(self, errors: list[str]):
        self.errors = list(errors)
        super().__init__("\n".join(self.errors))


@dataclass
class DomainBlock:
    kind: str = "torus"
    d: int = 1
    period: float = 1.0
    half_width: float = 10.0

    def build(self) -> Domain:
        return torus(self.d, self.period) if self.kind == "torus" else euclidean_box(self.d, self.half_width)


@dataclass
class FamilyBlock:
    family: str = "zero"
    params: dict = field(default_factory=dict)


@dataclass
class SolveBlock:
    t_max: float = 0.2
    s: float = 0.0
    window: float | None = None
    tol: float = 1e-9
    max_iterations: int = 40
    smallness_target: float = 1 / 3
    source: list | None = None


@dataclass
class KatoBlock:
    gamma: float = 1.0
    beta: float = 1.0
    sign: str = "max"
    eps_levels: int = 11
    assert_membership: bool = False


@dataclass
class ReportBlock:
    checks: list | None = None
    seed: int = 0
    out: str | None = None
    sample_size: int = 512


@dataclass
class ScenarioConfig:
    domain: DomainBlock = field(default_factory=DomainBlock)
    alpha: float = 1.5
    drift: FamilyBlock = field(default_factory=FamilyBlock)
    potential: FamilyBlock = field(default_factory=FamilyBlock)
    grid: GridSpec = field(default_factory=GridSpec)
    solve: SolveBlock = field(default_factory=SolveBlock)
    kato: KatoBlock = field(default_factory=KatoBlock)
    report: ReportBlock = field(default_factory=ReportBlock)
    source: str = "<defaults>"

    # -------------------------------------------------- builders
    def build_domain(self) -> Domain:
        return self.domain.build()

    def build_drift(self) -> VectorField | None:
        return _build_drift(self.build_domain(), self.drift)

    def build_potential(self) -> ScalarField | None:
        return _build_potential(self.build_domain(), self.potential)

    def solve_config(self) -> SolveConfig:
        s = self.solve
        return SolveConfig(grid=self.grid, window=s.window, tol=s.tol, max_iterations=s.max_iterations,
                           smallness_target=s.smallness_target)

    def source_point(self):
        d = self.domain.d
        return [0.0] * d if self.solve.source is None else list(self.solve.source)


# ---------------------------------------------------------------- node helpers

_constructor = SafeConstructor()


def _line(node) -> int:
    return node.start_mark.line + 1


def _value(node):
    return _constructor.construct_object(node, deep=True)


class _Reader:
    def __init__(self):
        self.errors: list[str] = []

    def error(self, node, msg: str):
        self.errors.append(f"line {_line(node)}: {msg}")

    def mapping(self, node, name: str, allowed) -> dict:
        if not isinstance(node, yaml.MappingNode):
            self.error(node, f"{name} must be a mapping")
            return {}
        out = {}
        for knode, vnode in node.value:
            key = _value(knode)
            if key not in allowed:
                self.error(knode, f"unknown key '{key}' in {name}; allowed: {', '.join(allowed)}")
                continue
            if key in out:
                self.error(knode, f"duplicate key '{key}' in {name}")
            out[key] = vnode
        return out

    def number(self, node, name, lo=-math.inf, hi=math.inf, open_lo=False, open_hi=False, integer=False):
        v = _value(node)
        if isinstance(v, bool) or not isinstance(v, (int, float)) or (integer and not isinstance(v, int)):
            self.error(node, f"{name} must be {'an integer' if integer else 'a number'}, got {v!r}")
            return None
        bad_lo = v <= lo if open_lo else v < lo
        bad_hi = v >= hi if open_hi else v > hi
        if bad_lo or bad_hi:
            lb = "(" if open_lo else "["
            rb = ")" if open_hi else "]"
            self.error(node, f"{name} = {v} outside {lb}{lo}, {hi}{rb}")
            return None
        return v

    def choice(self, node, name, options):
        v = _value(node)
        if v not in options:
            self.error(node, f"{name} '{v}' is not one of: {', '.join(options)}")
            return None
        return v

    def boolean(self, node, name):
        v = _value(node)
        if not isinstance(v, bool):
            self.error(node, f"{name} must be true or false")
            return None
        return v

    def vector(self, node, name, length=None):
        v = _value(node)
        if isinstance(v, (int, float)) and not isinstance(v, bool):
            v = [v]
        if not isinstance(v, list) or not all(isinstance(u, (int, float)) and not isinstance(u, bool) for u in v):
            self.error(node, f"{name} must be a list of numbers")
            return None
        if length is not None and len(v) != length:
            self.error(node, f"{name} needs {length} components, got {len(v)}")
            return None
        return [float(u) for u in v]


_FAMILY_KEYS = {
    "drift": {
        "zero": (),
        "constant": ("vector",),
        "bump": ("center", "width", "vector"),
        "swirl": ("center", "width", "strength"),
    },
    "potential": {
        "zero": (),
        "constant": ("kappa", "time"),
        "bump": ("center", "width", "height", "time"),
        "radial_power": ("center", "theta", "cutoff", "time"),
    },
}


def _read_family(rd: _Reader, node, kind: str, d: int) -> FamilyBlock:
    families = _FAMILY_KEYS[kind]
    if not isinstance(node, yaml.MappingNode):
        rd.error(node, f"{kind} must be a mapping with a 'family' key")
        return FamilyBlock()
    raw = {_value(k): (k, v) for k, v in node.value}
    if "family" not in raw:
        rd.error(node, f"{kind} block needs 'family'; valid families: {', '.join(families)}")
        return FamilyBlock()
    fam = _value(raw["family"][1])
    if fam not in families:
        rd.error(raw["family"][1], f"unknown {kind} family '{fam}'; valid families: {', '.join(families)}")
        return FamilyBlock()
    m = rd.mapping(node, f"{kind} ({fam})", ("family",) + families[fam])
    params = {}
    for key, vn in m.items():
        if key == "family":
            continue
        if key in ("center", "vector"):
            params[key] = rd.vector(vn, f"{kind}.{key}", d)
        elif key == "time":
            tm = rd.mapping(vn, f"{kind}.time", ("exponent", "center", "windowed"))
            tp = {}
            if "exponent" in tm:
                tp["exponent"] = rd.number(tm["exponent"], "time.exponent", 0.0, 1.0, open_hi=True)
            if "center" in tm:
                tp["center"] = rd.number(tm["center"], "time.center")
            if "windowed" in tm:
                tp["windowed"] = rd.boolean(tm["windowed"], "time.windowed")
            params[key] = tp
        elif key in ("width", "cutoff"):
            params[key] = rd.number(vn, f"{kind}.{key}", 0.0, open_lo=True)
        elif key == "theta":
            params[key] = rd.number(vn, f"{kind}.theta", 0.0)
        else:
            params[key] = rd.number(vn, f"{kind}.{key}")
    if fam == "swirl" and d != 2:
        rd.error(raw["family"][1], "the swirl drift needs d = 2")
    required = {"constant": ("vector",) if kind == "drift" else ("kappa",),
                "bump": ("center", "width", "vector") if kind == "drift" else ("center", "width", "height"),
                "swirl": ("center", "width", "strength"),
                "radial_power": ("center", "theta", "cutoff")}.get(fam, ())
    for key in required:
        if key not in params:
            rd.error(node, f"{kind} family '{fam}' needs '{key}'")
    return FamilyBlock(fam, params)


def _time_profile(params: dict) -> TimeProfile:
    tp = params.get("time")
    return TimeProfile() if not tp else TimeProfile(**tp)


def _build_drift(dom: Domain, blk: FamilyBlock) -> VectorField | None:
    p = blk.params
    if blk.family == "zero":
        return None
    if blk.family == "constant":
        return ConstantDrift(dom, vector=tuple(p["vector"]))
    if blk.family == "bump":
        return BumpDrift(dom, center=tuple(p["center"]), width=p["width"], vector=tuple(p["vector"]))
    return SwirlDrift(dom, center=tuple(p["center"]), width=p["width"], strength=p["strength"])


def _build_potential(dom: Domain, blk: FamilyBlock) -> ScalarField | None:
    p = blk.params
    if blk.family == "zero":
        return None
    if blk.family == "constant":
        f = Constant(dom, kappa=p["kappa"])
    elif blk.family == "bump":
        f = Bump(dom, center=tuple(p["center"]), width=p["width"], height=p["height"])
    else:
        f = RadialPower(dom, center=tuple(p["center"]), theta=p["theta"], cutoff=p["cutoff"])
    if p.get("time"):
        f = Separable(dom, spatial_field=f, time=_time_profile(p))
    return f


# ---------------------------------------------------------------- parsing

_TOP = ("domain", "alpha", "perturbation", "grid", "solve", "kato", "report")


def parse_config_text(text: str, source: str = "<string>") -> ScenarioConfig:
    """Validate ``text`` and build a :class:`ScenarioConfig`."""
    from .suite import known_checks  # deferred: the suite imports the config

    try:
        root = yaml.compose(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f"line {mark.line + 1}: " if mark is not None else ""
        raise ConfigError([f"{where}invalid YAML: {getattr(exc, 'problem', exc)}"]) from None
    cfg = ScenarioConfig(source=source)
    if root is None:
        return cfg
    rd = _Reader()
    top = rd.mapping(root, "config", _TOP)

    if "domain" in top:
        m = rd.mapping(top["domain"], "domain", ("kind", "d", "period", "half_width"))
        if "kind" in m:
            cfg.domain.kind = rd.choice(m["kind"], "domain.kind", ("torus", "box")) or "torus"
        if "d" in m:
            cfg.domain.d = rd.number(m["d"], "domain.d", 1, 2, integer=True) or 1
        if "period" in m:
            if cfg.domain.kind != "torus":
                rd.error(m["period"], "period applies to the torus; use half_width for a box")
            cfg.domain.period = rd.number(m["period"], "domain.period", 0, open_lo=True) or 1.0
        if "half_width" in m:
            if cfg.domain.kind != "box":
                rd.error(m["half_width"], "half_width applies to a box; use period for the torus")
            cfg.domain.half_width = rd.number(m["half_width"], "domain.half_width", 0, open_lo=True) or 10.0
    d = cfg.domain.d

    if "alpha" in top:
        a = rd.number(top["alpha"], "alpha", 0.0, 2.0, open_lo=True, open_hi=True)
        if a is not None:
            cfg.alpha = float(a)
            if not 1 < a < 2:
                warnings.warn(f"{source} line {_line(top['alpha'])}: alpha = {a} lies outside (1, 2); "
                              "gradient and perturbation results do not apply", stacklevel=2)

    if "perturbation" in top:
        m = rd.mapping(top["perturbation"], "perturbation", ("drift", "potential"))
        if "drift" in m:
            cfg.drift = _read_family(rd, m["drift"], "drift", d)
        if "potential" in m:
            cfg.potential = _read_family(rd, m["potential"], "potential", d)

    if "grid" in top:
        m = rd.mapping(top["grid"], "grid", ("nodes_per_axis", "time_slices"))
        n = rd.number(m["nodes_per_axis"], "grid.nodes_per_axis", 3, integer=True) if "nodes_per_axis" in m else 64
        s = rd.number(m["time_slices"], "grid.time_slices", 2, integer=True) if "time_slices" in m else 16
        cfg.grid = GridSpec(n or 64, s or 16)

    if "solve" in top:
        m = rd.mapping(top["solve"], "solve", ("t_max", "s", "window", "tol", "max_iterations",
                                               "smallness_target", "source"))
        sb = cfg.solve
        if "t_max" in m:
            sb.t_max = rd.number(m["t_max"], "solve.t_max", 0, open_lo=True) or sb.t_max
        if "s" in m:
            v = rd.number(m["s"], "solve.s", 0.0)
            sb.s = sb.s if v is None else float(v)
        if "window" in m and _value(m["window"]) is not None:
            sb.window = rd.number(m["window"], "solve.window", 0, 1, open_lo=True)
        if "tol" in m:
            sb.tol = rd.number(m["tol"], "solve.tol", 0, open_lo=True) or sb.tol
        if "max_iterations" in m:
            sb.max_iterations = rd.number(m["max_iterations"], "solve.max_iterations", 1, integer=True) or 40
        if "smallness_target" in m:
            v = rd.number(m["smallness_target"], "solve.smallness_target", 0, 1, open_lo=True, open_hi=True)
            sb.smallness_target = v or sb.smallness_target
        if "source" in m:
            sb.source = rd.vector(m["source"], "solve.source", d)

    if "kato" in top:
        m = rd.mapping(top["kato"], "kato", ("gamma", "beta", "sign", "eps_levels", "assert_membership"))
        kb = cfg.kato
        a = cfg.alpha
        for key in ("gamma", "beta"):
            if key in m:
                v = rd.number(m[key], f"kato.{key}", 0.0, a, open_hi=True)
                if v is not None:
                    setattr(kb, key, float(v))
        if "sign" in m:
            kb.sign = rd.choice(m["sign"], "kato.sign", ("plus", "minus", "max")) or "max"
        if "eps_levels" in m:
            kb.eps_levels = rd.number(m["eps_levels"], "kato.eps_levels", 6, 30, integer=True) or 11
        if "assert_membership" in m:
            v = rd.boolean(m["assert_membership"], "kato.assert_membership")
            kb.assert_membership = bool(v)

    if "report" in top:
        m = rd.mapping(top["report"], "report", ("checks", "seed", "out", "sample_size"))
        rb = cfg.report
        if "checks" in m:
            names = _value(m["checks"])
            if names is None:
                names = []
            if not isinstance(names, list) or not all(isinstance(x, str) for x in names):
                rd.error(m["checks"], "report.checks must be a list of check names")
            else:
                valid = known_checks()
                for item in m["checks"].value:
                    if _value(item) not in valid:
                        rd.error(item, f"unknown check '{_value(item)}'; valid checks: {', '.join(valid)}")
                if len(set(names)) != len(names):
                    rd.error(m["checks"], "report.checks lists a check twice")
                rb.checks = names
        if "seed" in m:
            v = rd.number(m["seed"], "report.seed", 0, 2**32 - 1, integer=True)
            rb.seed = 0 if v is None else v
        if "out" in m:
            v = _value(m["out"])
            if not isinstance(v, str):
                rd.error(m["out"], "report.out must be a path string")
            else:
                rb.out = v
        if "sample_size" in m:
            rb.sample_size = rd.number(m["sample_size"], "report.sample_size", 16, integer=True) or 512

    if rd.errors:
        # report in file order
        raise ConfigError(sorted(rd.errors, key=lambda e: int(e.split(":")[0].split()[1])))
    return cfg


def parse_config(path) -> ScenarioConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError([f"config file not found: {path}"])
    return parse_config_text(path.read_text(), str(path))
