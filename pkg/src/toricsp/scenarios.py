"""Named scenarios reproducing the worked examples, with golden verdicts.

Each scenario computes a table of observed values.  Values that were
fixed in advance live in data/expected/<name>.json; a verdict compares
observed to expected (text equality for exact values, absolute
tolerance for floats).  A few internal invariants are checked even when
the parameters differ from the golden run.
"""
from __future__ import annotations

import json
import math
import re
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from importlib import resources

from .exactlog import LogScalar, ZERO, format_logscalar, log
from .places import INF, Place

__all__ = ["SCENARIOS", "parse_scenario", "run_scenario", "load_shipped", "expected_for"]

BANNER_VIOLATED = "Bogomolov property: violated"
BANNER_HOLDS = "Bogomolov property: holds"


# helpers ---------------------------------------------------------------------------

def load_shipped(name: str):
    from .config import load_config

    with resources.as_file(resources.files("toricsp").joinpath(f"data/{name}.toml")) as p:
        return load_config(p)


def expected_for(name: str) -> dict | None:
    f = resources.files("toricsp").joinpath(f"data/expected/{name}.json")
    if not f.is_file():
        return None
    return json.loads(f.read_text())


def _txt(x) -> str:
    if isinstance(x, LogScalar):
        return format_logscalar(x)
    return str(x)


def _pt(p) -> str:
    return "(" + ", ".join(_txt(c) for c in p) + ")"


def _pts(ps) -> str:
    return "[" + "; ".join(_pt(p) for p in ps) + "]"


def _pieces(f) -> str:
    return "; ".join(f"<{_pt(m)}, x> + {_txt(c)}" for m, c in f.pieces)


def _breakpoints(f) -> str:
    return "; ".join(f"({', '.join(map(str, x))}, {_txt(t)})" for x, t in f.vertices)


def _same(values) -> str:
    """The common text of a list of exact values, or all distinct ones."""
    texts = sorted({_txt(v) for v in values})
    return texts[0] if len(texts) == 1 else "mixed: " + ", ".join(texts)


def _pmap(fn, items):
    items = list(items)
    with ThreadPoolExecutor(max_workers=4) as ex:
        return list(ex.map(fn, items))


# name parsing ------------------------------------------------------------------------

_CALL = re.compile(r"^\s*([A-Za-z0-9_-]+)\s*(?:\((.*)\))?\s*$")


def _split_top(s: str) -> list[str]:
    out, depth, cur = [], 0, []
    for ch in s:
        if ch == "[":
            depth += 1
        elif ch == "]":
            depth -= 1
        if ch == "," and depth == 0:
            out.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    if "".join(cur).strip():
        out.append("".join(cur))
    return [t.strip() for t in out]


def _param(text: str):
    from .config import parse_scalar

    text = text.strip()
    if text.startswith("["):
        if not text.endswith("]"):
            raise ValueError(f"unbalanced brackets in {text!r}")
        return tuple(_param(t) for t in _split_top(text[1:-1]))
    v = parse_scalar(text)
    return v.constant if v.is_rational() else v


def parse_scenario(text: str):
    """'prop8(c=5/4)' -> ('prop8', {'c': Fraction(5, 4)})."""
    m = _CALL.match(text)
    if not m:
        raise ValueError(f"cannot parse scenario {text!r}")
    name, args = m.group(1), m.group(2)
    params = {}
    if args and args.strip():
        for item in _split_top(args):
            if "=" not in item:
                raise ValueError(f"scenario argument {item!r} must be key=value")
            k, v = item.split("=", 1)
            params[k.strip()] = _param(v)
    return name, params


# scenarios ---------------------------------------------------------------------------

def _sets_rows(rep, obs, places):
    from .adelic import DEFAULT

    for v in places:
        key = "default" if v is DEFAULT else str(v)
        s = rep.abf[v]
        obs[f"A.{key}"] = repr(s.A)
        obs[f"B.{key}"] = repr(s.B)
        obs[f"F.{key}"] = repr(s.F)


def _example5(params):
    from .adelic import DEFAULT, analyze
    from .points import corollary3_check, height

    cfg = load_shipped("example5")
    d = cfg.divisor
    rep = analyze(d)
    obs = {
        "roof.2.pieces": _pieces(rep.roofs[Place(2)]),
        "ess_min": _txt(rep.ess_min),
        "argmax": _pts(rep.cmax.vertices),
        "monocritical": rep.monocritical,
        "quasi_canonical": rep.quasi_canonical,
    }
    _sets_rows(rep, obs, [Place(2), DEFAULT])
    roots, rad = cfg.families["roots"], cfg.families["radical"]
    obs["height.roots-of-unity.l1-50"] = _same(_pmap(lambda l: height(d, roots, l), range(1, 51)))
    obs["height.scaled-radical(3,2)"] = _txt(height(d, rad, 1))
    obs["corollary3.roots-of-unity"] = all(corollary3_check(d, roots, l) for l in (1, 2, 7))
    inv = {"corollary3 matches height = ess_min": obs["corollary3.roots-of-unity"] == (height(d, roots, 1) == rep.ess_min)}
    return rep, obs, inv, {}, None


def _example8(params):
    from .adelic import DEFAULT, analyze
    from .convexcore.polyhedron import supdifferential
    from .potential import theorem13_check

    cfg = load_shipped("example8")
    d = cfg.divisor
    rep = analyze(d)
    obs = {
        "roof.global.breakpoints": _breakpoints(rep.global_roof),
        "argmax": _pts(rep.cmax.vertices),
        "supdiff.2.at0": repr(supdifferential(rep.roofs[Place(2)], (Fraction(0),))),
        "monocritical": rep.monocritical,
        "theorem13.ball(1,1)@2": theorem13_check(d, cfg.sets)["passed"],
    }
    _sets_rows(rep, obs, [Place(2), DEFAULT])
    return rep, obs, {}, {}, None


def _example7(params):
    from .adelic import DEFAULT, analyze, construct_special_point
    from .points import corollary3_check

    cfg = load_shipped("example7")
    d = cfg.divisor
    rep = analyze(d)
    q, ell = construct_special_point(d)
    obs = {
        "roof.global.breakpoints": _breakpoints(rep.global_roof),
        "argmax": _pts(rep.cmax.vertices),
        "monocritical": rep.monocritical,
        "critical.2": _pt(rep.critical_point[Place(2)]),
        "critical.default": _pt(rep.critical_point[DEFAULT]),
        "special_point": f"q={_pt(q)}, l={ell}",
        "corollary3.scaled-radical(3,1)": corollary3_check(d, cfg.families["radical"], 1),
    }
    _sets_rows(rep, obs, [Place(2), DEFAULT])
    return rep, obs, {}, {}, None


def _qc_heights(d, f, levels, target):
    from .points import corollary3_check, height

    hs = _pmap(lambda l: float(height(d, f, l)), levels)
    dev = max(abs(h - float(target)) for h in hs)
    cor = all(_pmap(lambda l: corollary3_check(d, f, l), levels))
    return hs, dev, cor


def _example10(params):
    from .adelic import DEFAULT, analyze
    from .points import product_formula_residual, weyl_sum

    cfg = load_shipped("example10")
    d = cfg.divisor
    rep = analyze(d)
    f = cfg.families["curve"]
    levels = range(3, 201)
    hs, dev, cor = _qc_heights(d, f, levels, rep.ess_min)
    obs = {
        "ess_min": _txt(rep.ess_min),
        "argmax": _pts(rep.cmax.vertices),
        "height.quadratic-cyclotomic.maxdev.l3-200": dev,
        "corollary3.quadratic-cyclotomic.l3-200": cor,
        "monocritical": rep.monocritical,
    }
    _sets_rows(rep, obs, [INF, DEFAULT])
    resid = max(product_formula_residual(f, l) for l in (3, 50, 200))
    inv = {"product formula residual <= 1e-9": resid <= 1e-9}
    tables = {
        "heights": [[l, h] for l, h in zip(levels, hs) if l in (3, 5, 10, 25, 50, 100, 200)],
        "weyl_sum_m10": [[l, weyl_sum(f, l, (1, 0))] for l in (25, 50, 100, 211)],
    }
    banner = BANNER_VIOLATED if (dev <= 1e-6 and cor) else None
    return rep, obs, inv, tables, banner


def _fubini_study(params):
    from .adelic import analyze

    d = load_shipped("fubini-study").divisor
    rep = analyze(d)
    lo, hi = rep.cmax
    obs = {
        "ess_min": float(rep.ess_min),
        "maximizer": 0.5 * (lo + hi),
        "monocritical": rep.monocritical,
        "critical.inf": float(rep.critical_point[INF][0]),
    }
    return rep, obs, {}, {}, None


def _canonical(params):
    from .adelic import DEFAULT, analyze, flattened_divisor, is_monocritical, is_quasi_canonical, phi
    from .points import height
    from .transport import DiscreteMeasure

    cfg = load_shipped("canonical")
    d = cfg.divisor
    rep = analyze(d)

    def mu(l):
        atoms = [((Fraction(0),), Fraction(l - 1, l)), ((Fraction(-l),), Fraction(1, l))]
        return DiscreteMeasure([a for a in atoms if a[1]])

    obs = {
        "ess_min": _txt(rep.ess_min),
        "quasi_canonical": rep.quasi_canonical,
        "monocritical": rep.monocritical,
        "phi.mu_l.l1-20": _same(phi(d, INF, mu(l)) for l in range(1, 21)),
        "phi.dirac0": _txt(phi(d, INF, cfg.measures["dirac0"])),
        "height.roots-of-unity.l1-20": _same(height(d, cfg.families["torsion"], l) for l in range(1, 21)),
    }
    shifts = {INF: (log(2),), Place(2): (-log(2),)}
    fd = flattened_divisor(d, shifts)
    mono, crit = is_monocritical(fd)
    obs["flattened.quasi_canonical"] = is_quasi_canonical(fd)
    obs["flattened.monocritical"] = mono
    obs["flattened.critical.inf"] = _pt(crit[INF]) if mono else None
    obs["flattened.critical.2"] = _pt(crit[Place(2)]) if mono else None
    inv = {"critical point recovers the shifts": mono and all(tuple(crit[v]) == tuple(u) for v, u in shifts.items())
           and all(c.is_zero() for c in crit[DEFAULT])}
    return rep, obs, inv, {}, None


def _prop8(params):
    from .potential import prop8_window

    c = Fraction(params.get("c", Fraction(5, 4)))
    w = prop8_window(c, params.get("v0", "inf"), params.get("v", "2"))
    lo, hi = w.window
    obs = {
        "global_capacity": str(w.capacity),
        "delta": _txt(w.delta_exact) if w.delta_exact is not None else w.delta,
        "window": f"[{_txt(lo)}, {_txt(hi)}]",
        "samples_ok": all(w.samples_ok.values()),
    }
    inv = {
        "global capacity = 1": w.capacity == 1,
        "delta = log(c + sqrt(c^2 - 1))": abs(w.delta - math.log(float(c) + math.sqrt(float(c) ** 2 - 1))) <= 1e-12,
        "all samples inside the window": all(w.samples_ok.values()),
    }
    tables = {"sets": w.sets.describe(), "samples_ok": w.samples_ok}
    return None, obs, inv, tables, None


def _prop2_data(n0, a0, u0):
    """eps0, k0 and the monomial matrix of the Prop. 2 curve."""
    from .adelic import DEFAULT, AdelicToricDivisor, Piecewise, analyze
    from .convexcore.pa import PAConcave
    from .convexcore.polytope import QPolytope

    P = QPolytope.simplex(2)
    pieces = [(m, -sum((c.scale(mi) for mi, c in zip(m, u0)), ZERO)) for m in P.vertices]
    d = AdelicToricDivisor(P, {INF: Piecewise(PAConcave(pieces))}, name="bogomolov-prop2")
    rep = analyze(d)
    F_inf, sigma0 = rep.abf[INF].F, rep.abf[DEFAULT].F
    if not sigma0.contains(tuple(LogScalar(q) for q in n0)):
        raise ValueError("n0 must lie in the cone sigma_0")
    det = a0[0] * n0[1] - a0[1] * n0[0]
    if abs(det) != 1:
        raise ValueError("n0 and a0 must span a saturated rank-2 sublattice")
    # largest eps with +-eps n0 in u0 + sigma0, from the constraints <a, u> >= b
    eps = None
    for a, b in F_inf.constraints:
        an = sum(ai * ni for ai, ni in zip(a, n0))
        if an != 0:
            e = (-b).scale(1 / abs(Fraction(an)))
            eps = e if eps is None or e < eps else eps
    if eps is None:
        eps = LogScalar(1)
    if eps.sign() <= 0:
        raise ValueError("0 is not interior to F_inf along n0")
    k0 = math.ceil(1 / float(eps) - 1e-12)
    while LogScalar(Fraction(1, k0)) > eps:
        k0 += 1
    b0 = tuple(x + y for x, y in zip(n0, a0))
    # val(q) = L^{-1} val(iota q), L(s a0 + t b0) = k0 (s, t)
    M = tuple((Fraction(a0[i], k0), Fraction(b0[i], k0)) for i in range(2))
    return d, rep, eps, k0, M


def _bogomolov_prop2(params):
    from .adelic import DEFAULT
    from .points import MonomialImage, QuadraticCyclotomic

    n0 = tuple(int(x) for x in params.get("n0", (1, 1)))
    a0 = tuple(int(x) for x in params.get("a0", (1, 0)))
    u0 = tuple(LogScalar(x) if not isinstance(x, LogScalar) else x
               for x in params.get("u0", (-log(2), -log(2))))
    if len(n0) != 2 or len(a0) != 2 or len(u0) != 2:
        raise ValueError("the shipped construction is two-dimensional")
    if all(c.is_zero() for c in u0):
        # the canonical metric: Bogomolov holds, there is no special curve to build
        from .adelic import AdelicToricDivisor, analyze
        from .convexcore.polytope import QPolytope

        rep = analyze(AdelicToricDivisor(QPolytope.simplex(2), {}, name="bogomolov-prop2"))
        obs = {"ess_min": _txt(rep.ess_min), "quasi_canonical": rep.quasi_canonical}
        return rep, obs, {"canonical metric is quasi-canonical": rep.quasi_canonical}, {}, BANNER_HOLDS
    d, rep, eps, k0, M = _prop2_data(n0, a0, u0)
    f = MonomialImage(QuadraticCyclotomic(), M)
    levels = range(3, 101)
    hs, dev, cor = _qc_heights(d, f, levels, rep.ess_min)
    obs = {
        "ess_min": _txt(rep.ess_min),
        "F.inf": repr(rep.abf[INF].F),
        "F.default": repr(rep.abf[DEFAULT].F),
        "zero_in_B": all(s.B.contains((ZERO, ZERO)) for s in rep.abf.values()),
        "eps0": _txt(eps),
        "k0": k0,
        "height.maxdev.l3-100": dev,
        "corollary3.l3-100": cor,
    }
    inv = {"heights at ess_min": dev <= 1e-6, "corollary3 holds": cor}
    banner = BANNER_VIOLATED if (dev <= 1e-6 and cor) else None
    tables = {"matrix": [[str(x) for x in row] for row in M],
              "heights": [[l, h] for l, h in zip(levels, hs) if l in (3, 10, 50, 100)]}
    return rep, obs, inv, tables, banner


SCENARIOS = {
    "example5": _example5,
    "example8": _example8,
    "example7": _example7,
    "example10": _example10,
    "fubini-study": _fubini_study,
    "canonical": _canonical,
    "prop8": _prop8,
    "bogomolov-prop2": _bogomolov_prop2,
}


# verdicts ------------------------------------------------------------------------------

def _compare(exp: dict, got):
    want = exp["value"]
    if isinstance(want, bool) or isinstance(got, bool):
        return got is want
    if isinstance(want, (int, float)) and not isinstance(want, bool):
        if not isinstance(got, (int, float)):
            return False
        return abs(float(got) - float(want)) <= float(exp.get("tol", 0.0))
    return got == want


def _norm_params(params):
    return {k: (list(map(str, v)) if isinstance(v, tuple) else str(v)) for k, v in params.items()}


def run_scenario(text: str) -> dict:
    from .report import SCHEMA_VERSION, analysis_document

    name, params = parse_scenario(text)
    if name not in SCENARIOS:
        raise ValueError(f"unknown scenario {name!r}; known: {', '.join(sorted(SCENARIOS))}")
    rep, obs, inv, tables, banner = SCENARIOS[name](params)
    golden = expected_for(name)
    verdicts = []
    gold_ok = golden is not None and golden.get("params", {}) == {
        k: v for k, v in {**golden.get("params", {}), **_norm_params(params)}.items()}
    if gold_ok:
        for check, exp in sorted(golden["checks"].items()):
            got = obs.get(check)
            verdicts.append({"check": check, "expected": exp["value"], "observed": got,
                             "source": exp.get("source"), "pass": check in obs and _compare(exp, got)})
    for check, ok in sorted(inv.items()):
        verdicts.append({"check": check, "expected": True, "observed": bool(ok),
                         "source": "invariant", "pass": bool(ok)})
    doc = {
        "schema_version": SCHEMA_VERSION,
        "kind": "scenario",
        "scenario": name,
        "params": _norm_params(params),
        "golden": gold_ok,
        "observed": obs,
        "verdicts": verdicts,
        "passed": all(v["pass"] for v in verdicts),
        "banner": banner,
        "tables": tables,
    }
    if rep is not None:
        doc["analysis"] = analysis_document(rep)
    return doc
