"""Report documents: JSON trees with exact values in text form.

Serialization is deterministic: keys sorted, floats printed with 17
significant digits, infinities as the strings "+inf"/"-inf".
"""
from __future__ import annotations

import json
import math
from fractions import Fraction
from importlib import resources

import numpy as np

from .exactlog import LogScalar, format_logscalar

__all__ = [
    "SCHEMA_VERSION",
    "to_jsonable",
    "dumps",
    "loads",
    "validate_report",
    "analysis_document",
    "describe_set",
    "describe_pa",
]

SCHEMA_VERSION = "1.0"


def _float(x: float):
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "+inf" if x > 0 else "-inf"
    return float(x)


def to_jsonable(x):
    """Plain JSON tree: LogScalars and Fractions become text, tuples lists."""
    from .adelic import NumInterval
    from .convexcore.polyhedron import LogPolyhedron, _EmptyType
    from .convexcore.polytope import QPolytope
    from .places import Place

    if x is None or isinstance(x, (bool, str)):
        return x
    if isinstance(x, LogScalar):
        return format_logscalar(x)
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        return _float(float(x))
    if isinstance(x, Place):
        return str(x)
    if isinstance(x, (LogPolyhedron, NumInterval, _EmptyType, QPolytope)):
        return describe_set(x)
    if isinstance(x, dict):
        return {str(k): to_jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, np.ndarray)):
        return [to_jsonable(v) for v in x]
    raise TypeError(f"cannot serialize {type(x).__name__}")


def _emit(x, indent, level, out):
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(x, dict):
        if not x:
            out.append("{}")
            return
        out.append("{\n")
        items = sorted(x.items())
        for i, (k, v) in enumerate(items):
            out.append(pad + json.dumps(k) + ": ")
            _emit(v, indent, level + 1, out)
            out.append(",\n" if i + 1 < len(items) else "\n")
        out.append(end + "}")
    elif isinstance(x, list):
        if not x:
            out.append("[]")
            return
        out.append("[\n")
        for i, v in enumerate(x):
            out.append(pad)
            _emit(v, indent, level + 1, out)
            out.append(",\n" if i + 1 < len(x) else "\n")
        out.append(end + "]")
    elif isinstance(x, float):
        s = format(x, ".17g")
        if all(ch not in s for ch in ".en"):
            s += ".0"
        out.append(s)
    else:
        out.append(json.dumps(x))


def dumps(doc, indent: int = 2) -> str:
    out: list[str] = []
    _emit(to_jsonable(doc), indent, 0, out)
    return "".join(out) + "\n"


def loads(text: str):
    return json.loads(text)


def _schema():
    text = resources.files("toricsp").joinpath("data/report.schema.json").read_text()
    return json.loads(text)


def validate_report(doc) -> None:
    import jsonschema

    jsonschema.validate(to_jsonable(doc), _schema())


# document builders ---------------------------------------------------------------------

def describe_set(S):
    from .adelic import NumInterval
    from .convexcore.polyhedron import LogPolyhedron
    from .convexcore.polytope import QPolytope

    if isinstance(S, NumInterval):
        return {"interval": [_float(S.lo), _float(S.hi)], "numeric": True}
    if isinstance(S, QPolytope):
        return {"vertices": [[str(c) for c in v] for v in S.vertices], "rays": []}
    if isinstance(S, LogPolyhedron):
        if S.is_empty():
            return {"empty": True}
        d = {"vertices": [[format_logscalar(c) for c in v] for v in S.vertices],
             "rays": [[str(c) for c in r] for r in S.rays]}
        if S.dim == 1:
            d["text"] = repr(S)
        return d
    return {"empty": True}


def describe_pa(f) -> dict:
    d = {"pieces": [{"slope": [str(c) for c in m], "const": format_logscalar(c)} for m, c in f.pieces]}
    if not f.is_metric:
        d["domain"] = [[str(c) for c in v] for v in f.domain.vertices]
        d["breakpoints"] = [{"x": [str(c) for c in x], "value": format_logscalar(t)} for x, t in f.vertices]
    return d


def _describe_divisor(d) -> dict:
    from .adelic import Canonical, Piecewise

    metrics = {}
    for v, m in d.metrics.items():
        if isinstance(m, Piecewise):
            metrics[str(v)] = {"kind": "piecewise", **describe_pa(m.psi)}
        else:
            metrics[str(v)] = {"kind": m.psi.kind}
    return {
        "name": d.name,
        "dim": d.dim,
        "norm": d.norm,
        "polytope": [[str(c) for c in v] for v in d.polytope.vertices],
        "metrics": metrics,
    }


def _value(x):
    if isinstance(x, LogScalar):
        return {"exact": format_logscalar(x), "float": float(x)}
    return {"exact": None, "float": float(x)}


def analysis_document(rep) -> dict:
    from .adelic import AnalysisReport

    assert isinstance(rep, AnalysisReport)
    roofs = {str(v): describe_pa(r) for v, r in rep.roofs.items()}
    if rep.global_roof is not None:
        roofs["global"] = describe_pa(rep.global_roof)
    places = {str(v): {"A": describe_set(s.A), "B": describe_set(s.B), "F": describe_set(s.F)}
              for v, s in rep.abf.items()}
    crit = None
    if rep.critical_point is not None:
        crit = {str(v): [format_logscalar(c) if isinstance(c, LogScalar) else _float(float(c)) for c in u]
                for v, u in rep.critical_point.items()}
    if rep.numeric_flag:
        cmax = {"interval": [_float(rep.cmax[0]), _float(rep.cmax[1])], "numeric": True}
    else:
        cmax = describe_set(rep.cmax)
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "analysis",
        "divisor": _describe_divisor(rep.divisor),
        "numeric": rep.numeric_flag,
        "ess_min": _value(rep.ess_min),
        "cmax": cmax,
        "ri_point": [str(c) if isinstance(c, Fraction) else _float(float(c)) for c in rep.ri_point],
        "roofs": roofs,
        "places": places,
        "global_supdifferential": describe_set(rep.global_supdiff),
        "monocritical": rep.monocritical,
        "consistency": dict(rep.consistency),
        "critical_point": crit,
        "quasi_canonical": rep.quasi_canonical,
    }
