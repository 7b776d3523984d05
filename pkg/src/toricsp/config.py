"""TOML configuration: divisors, measures, point families and adelic sets.

Numbers may be written as integers, rationals ("3/2") or LogScalar text
("1/2*log(2) - 1").  Every parse error carries the dotted field path.
"""
from __future__ import annotations

import os
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Mapping

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover - depends on the interpreter
    import tomli as tomllib

from .exactlog import LogScalar, parse_logscalar

__all__ = [
    "Config",
    "load_config",
    "parse_config",
    "parse_rational",
    "parse_scalar",
    "divisor_from_mapping",
    "measure_from_mapping",
    "adelic_measure_from_mapping",
    "family_from_mapping",
    "adelic_set_from_mapping",
]


def _err(msg, path):
    from .adelic import DivisorValidationError
    return DivisorValidationError(msg, path)


def parse_rational(x, path="") -> Fraction:
    if isinstance(x, bool):
        raise _err(f"expected a rational, got {x!r}", path)
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        if not x.is_integer():
            raise _err("write non-integer rationals as strings like \"3/2\"", path)
        return Fraction(int(x))
    if isinstance(x, str):
        try:
            return Fraction(x.strip())
        except (ValueError, ZeroDivisionError):
            pass
    raise _err(f"expected a rational, got {x!r}", path)


def parse_scalar(x, path="") -> LogScalar:
    if isinstance(x, (int, Fraction)) and not isinstance(x, bool):
        return LogScalar(Fraction(x))
    if isinstance(x, float) and x.is_integer():
        return LogScalar(Fraction(int(x)))
    if isinstance(x, str):
        try:
            return parse_logscalar(x)
        except ValueError as e:
            raise _err(str(e), path) from None
    raise _err(f"expected a LogScalar literal, got {x!r}", path)


def _vec(x, path, parse=parse_rational):
    if not isinstance(x, (list, tuple)) or not x:
        raise _err("expected a nonempty list", path)
    return tuple(parse(c, f"{path}[{i}]") for i, c in enumerate(x))


# divisors -----------------------------------------------------------------------

def _polytope(m, path):
    from .convexcore.polytope import PolytopeError, QPolytope

    if isinstance(m, Mapping):
        if "box" in m:
            lo, hi = m["box"]
            return QPolytope.box(_vec(lo, f"{path}.box[0]"), _vec(hi, f"{path}.box[1]"))
        if "simplex" in m:
            return QPolytope.simplex(int(m["simplex"]))
        if "vertices" in m:
            m = m["vertices"]
        else:
            raise _err("expected vertices, box or simplex", path)
    if not isinstance(m, list) or not m:
        raise _err("expected a list of vertices", path)
    pts = [_vec(v, f"{path}[{i}]") for i, v in enumerate(m)]
    if len({len(p) for p in pts}) != 1:
        raise _err("vertices of differing dimension", path)
    try:
        return QPolytope.from_points(pts)
    except (PolytopeError, ValueError) as e:
        raise _err(str(e), path) from None


def _metric(m, P, path):
    from .adelic import Canonical, Piecewise, Smooth1D
    from .convexcore.pa import PAConcave
    from .convexcore.smooth import fubini_study

    if not isinstance(m, Mapping):
        raise _err("metric must be a table", path)
    kind = str(m.get("kind", "canonical")).lower()
    if kind == "canonical":
        return Canonical()
    if kind == "piecewise":
        raw = m.get("pieces")
        if not isinstance(raw, list) or not raw:
            raise _err("piecewise metric needs a nonempty 'pieces' list", f"{path}.pieces")
        pieces = []
        for i, pc in enumerate(raw):
            pp = f"{path}.pieces[{i}]"
            if not isinstance(pc, Mapping) or "slope" not in pc:
                raise _err("piece needs 'slope' and 'const'", pp)
            pieces.append((_vec(pc["slope"], f"{pp}.slope"), parse_scalar(pc.get("const", 0), f"{pp}.const")))
        return Piecewise(PAConcave(pieces))
    if kind in ("translate", "shift"):
        # psi(u) = Psi_D(u - u0) + c
        u0 = _vec(m.get("shift"), f"{path}.shift", parse_scalar)
        c = parse_scalar(m.get("const", 0), f"{path}.const")
        if len(u0) != P.dim:
            raise _err("shift dimension differs from the polytope", f"{path}.shift")
        pieces = []
        for v in P.vertices:
            off = sum((s.scale(mi) for mi, s in zip(v, u0)), LogScalar())
            pieces.append((v, c - off))
        return Piecewise(PAConcave(pieces))
    if kind in ("fubini-study", "fubinistudy", "fs"):
        return Smooth1D(fubini_study())
    raise _err(f"unknown metric kind {kind!r}", f"{path}.kind")


def divisor_from_mapping(m: Mapping, norm: str = "l1"):
    from .adelic import AdelicToricDivisor
    from .places import Place

    if not isinstance(m, Mapping):
        raise _err("divisor must be a table", "divisor")
    if "polytope" not in m:
        raise _err("missing polytope", "divisor.polytope")
    P = _polytope(m["polytope"], "divisor.polytope")
    metrics = {}
    for key, spec in (m.get("metrics") or {}).items():
        try:
            v = Place.parse(key)
        except ValueError as e:
            raise _err(str(e), f"divisor.metrics.{key}") from None
        metrics[v] = _metric(spec, P, f"divisor.metrics.{key}")
    norm = str(m.get("norm", norm))
    if norm not in ("l1", "linf"):
        raise _err("norm must be 'l1' or 'linf'", "divisor.norm")
    return AdelicToricDivisor(P, metrics, norm=norm, name=str(m.get("name", "")))


# measures ---------------------------------------------------------------------------------

def measure_from_mapping(m, path="measure", norm="l1"):
    from .transport import DiscreteMeasure

    atoms = m.get("atoms") if isinstance(m, Mapping) else m
    if not isinstance(atoms, list) or not atoms:
        raise _err("measure needs a nonempty atoms list", path)
    out = []
    for i, a in enumerate(atoms):
        ap = f"{path}.atoms[{i}]"
        if not isinstance(a, Mapping) or "point" not in a:
            raise _err("atom needs 'point' and 'weight'", ap)
        out.append((_vec(a["point"], f"{ap}.point", parse_scalar), parse_rational(a.get("weight", 1), f"{ap}.weight")))
    try:
        return DiscreteMeasure(out, norm=norm)
    except ValueError as e:
        raise _err(str(e), path) from None


def adelic_measure_from_mapping(m, dim, path="adelic_measure", norm="l1"):
    from .places import Place
    from .transport import AdelicMeasure, CenteringError

    entries = {}
    for key, spec in m.items():
        entries[Place.parse(key)] = measure_from_mapping(spec, f"{path}.{key}", norm)
    try:
        return AdelicMeasure(entries, dim)
    except CenteringError as e:
        raise _err(str(e), path) from None


def family_from_mapping(m, path="family"):
    from . import points

    if not isinstance(m, Mapping) or "kind" not in m:
        raise _err("family needs a 'kind'", path)
    kind = str(m["kind"]).lower()
    try:
        if kind == "roots-of-unity":
            return points.RootsOfUnity(int(m.get("n", 1)))
        if kind == "torsion-translate":
            return points.TorsionTranslate(_vec(m["alpha"], f"{path}.alpha"), parse_rational(m.get("r", 1)))
        if kind == "scaled-radical":
            return points.ScaledRadical(int(m["a"]), int(m["r"]))
        if kind == "quadratic-cyclotomic":
            return points.QuadraticCyclotomic()
    except KeyError as e:
        raise _err(f"missing field {e.args[0]}", path) from None
    except ValueError as e:
        raise _err(str(e), path) from None
    raise _err(f"unknown family kind {kind!r}", f"{path}.kind")


def adelic_set_from_mapping(m, path="sets"):
    from . import potential
    from .places import Place

    entries = {}
    for key, spec in m.items():
        sp = f"{path}.{key}"
        v = Place.parse(key)
        if not isinstance(spec, Mapping):
            raise _err("set must be a table", sp)
        try:
            if "interval" in spec:
                a, b = spec["interval"]
                s = potential.Interval(parse_rational(a, f"{sp}.interval[0]"), parse_rational(b, f"{sp}.interval[1]"))
            elif "disc" in spec:
                d = spec["disc"]
                s = potential.Disc(parse_rational(d.get("center", 0)), parse_rational(d["radius"], f"{sp}.disc.radius"))
            elif "ball" in spec:
                d = spec["ball"]
                s = potential.NonArchBall(parse_rational(d.get("center", 0)), parse_rational(d["radius"], f"{sp}.ball.radius"))
            elif spec.get("unit_ball"):
                s = potential.UnitBall()
            else:
                raise _err("expected interval, disc, ball or unit_ball", sp)
        except (KeyError, ValueError) as e:
            raise _err(str(e), sp) from None
        if v.is_archimedean == isinstance(s, (potential.NonArchBall,)):
            raise _err("set shape does not match the place type", sp)
        entries[v] = s
    return potential.AdelicSet(entries)


# whole files ------------------------------------------------------------------------------

@dataclass
class Config:
    divisor: Any = None
    families: dict = field(default_factory=dict)
    measures: dict = field(default_factory=dict)
    adelic_measures: dict = field(default_factory=dict)
    sets: Any = None
    output: dict = field(default_factory=dict)
    raw: dict = field(default_factory=dict)


def parse_config(raw: Mapping) -> Config:
    from .adelic import validate_divisor

    cfg = Config(raw=dict(raw))
    norm = "l1"
    if "divisor" in raw:
        cfg.divisor = validate_divisor(divisor_from_mapping(raw["divisor"]))
        norm = cfg.divisor.norm
    for name, spec in (raw.get("families") or {}).items():
        cfg.families[name] = family_from_mapping(spec, f"families.{name}")
    for name, spec in (raw.get("measures") or {}).items():
        cfg.measures[name] = measure_from_mapping(spec, f"measures.{name}", norm)
    if raw.get("adelic_measures"):
        if cfg.divisor is None:
            raise _err("adelic measures need a divisor", "adelic_measures")
        for name, spec in raw["adelic_measures"].items():
            cfg.adelic_measures[name] = adelic_measure_from_mapping(spec, cfg.divisor.dim, f"adelic_measures.{name}", norm)
    if raw.get("sets"):
        cfg.sets = adelic_set_from_mapping(raw["sets"])
    cfg.output = dict(raw.get("output") or {})
    return cfg


def load_config(path) -> Config:
    try:
        with open(os.fspath(path), "rb") as fh:
            raw = tomllib.load(fh)
    except tomllib.TOMLDecodeError as e:
        raise _err(f"TOML syntax: {e}", os.fspath(path)) from None
    return parse_config(raw)
