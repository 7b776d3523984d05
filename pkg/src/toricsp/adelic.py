"""Adelic toric metrized divisors over Q and their small-point analysis.

Conventions (fixed once, checked against the worked examples):
  val_v(x) = -log|x|_v, so val_p(x) = ord_p(x) log p;
  psi_v is a concave min of affine pieces, theta_v = psi_v^dual;
  the height of a measure is eta(nu) = -sum_v int psi_v dnu_v.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from math import lcm
from typing import Mapping, Union

import numpy as np

from .convexcore.linalg import dot_q, qvec, lsvec
from .convexcore.pa import PAConcave, exact_max, legendre_dual, pac_add, pac_argmax, sup_convolution
from .convexcore.polyhedron import (
    Empty,
    LogPolyhedron,
    is_vertex,
    minimal_face_containing,
    minkowski_sum,
    poly_intersect,
    supdifferential,
)
from .convexcore.polytope import PolytopeError, QPolytope
from .convexcore.smooth import Smooth1DConcave, conjugate_point, maximize_1d, smooth_roof
from .exactlog import LogScalar, ZERO, ls
from .places import INF, Place, val
from .transport import AdelicMeasure, DiscreteMeasure, vec_norm

__all__ = [
    "Canonical",
    "Piecewise",
    "Smooth1D",
    "AdelicToricDivisor",
    "DivisorValidationError",
    "NumericPathError",
    "InternalConsistencyError",
    "DEFAULT",
    "validate_divisor",
    "roof_local",
    "global_roof",
    "essential_minimum",
    "abf_sets",
    "is_quasi_canonical",
    "is_monocritical",
    "phi",
    "eta",
    "smallness_gap",
    "lemma2_constants",
    "special_point_exists",
    "construct_special_point",
    "analyze",
    "AnalysisReport",
    "flattened_divisor",
    "g2_dual_by_supconvolution",
    "set_tolerance",
    "NumInterval",
]

NUM_TOL = 1e-9


def set_tolerance(tol: float) -> None:
    """Tolerance of the numeric (smooth) path; the exact path ignores it."""
    global NUM_TOL
    if not tol > 0:
        raise ValueError("tolerance must be positive")
    NUM_TOL = float(tol)


def _tol(tol):
    return NUM_TOL if tol is None else tol


class DivisorValidationError(ValueError):
    def __init__(self, message: str, path: str = ""):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path
        self.reason = message


class NumericPathError(TypeError):
    """Raised when an exact-only operation meets a smooth metric."""


class InternalConsistencyError(RuntimeError):
    pass


# metric specs ----------------------------------------------------------------------

@dataclass(frozen=True)
class Canonical:
    kind: str = "canonical"


@dataclass(frozen=True)
class Piecewise:
    psi: PAConcave
    kind: str = "piecewise"


@dataclass(frozen=True)
class Smooth1D:
    psi: Smooth1DConcave
    kind: str = "smooth"


MetricSpec = Union[Canonical, Piecewise, Smooth1D]


class _Default:
    """Stand-in for every place carrying the canonical metric."""

    def __str__(self):
        return "default"

    __repr__ = __str__

    def sort_key(self):
        return (2, 0)

    @property
    def is_archimedean(self):
        return False


DEFAULT = _Default()


class AdelicToricDivisor:
    """Polytope Delta_D plus non-canonical metrics at finitely many places."""

    def __init__(self, polytope: QPolytope, metrics: Mapping[Place, MetricSpec] | None = None,
                 norm: str = "l1", name: str = ""):
        self.polytope = polytope
        self.metrics = {Place.parse(v): m for v, m in (metrics or {}).items() if not isinstance(m, Canonical)}
        self.metrics = dict(sorted(self.metrics.items(), key=lambda kv: kv[0].sort_key()))
        self.norm = norm
        self.name = name

    @property
    def dim(self) -> int:
        return self.polytope.dim

    @property
    def places(self) -> list[Place]:
        return list(self.metrics)

    @property
    def numeric(self) -> bool:
        return any(isinstance(m, Smooth1D) for m in self.metrics.values())

    def metric(self, v) -> MetricSpec:
        if v is DEFAULT:
            return Canonical()
        return self.metrics.get(Place.parse(v), Canonical())

    @cached_property
    def canonical_psi(self) -> PAConcave:
        return PAConcave.support_function(self.polytope)

    def psi(self, v) -> PAConcave:
        m = self.metric(v)
        if isinstance(m, Piecewise):
            return m.psi
        if isinstance(m, Canonical):
            return self.canonical_psi
        raise NumericPathError(f"place {v} carries a smooth metric")

    def psi_float(self, v, u) -> float:
        m = self.metric(v)
        if isinstance(m, Smooth1D):
            return m.psi(float(u[0]))
        return float(self.psi(v).eval_float([[float(c) for c in u]])[0])

    def __repr__(self):
        ms = ", ".join(f"{v}: {m.kind}" for v, m in self.metrics.items())
        return f"AdelicToricDivisor({self.polytope!r}; {ms or 'canonical'})"


# validation ----------------------------------------------------------------------------

def validate_divisor(spec, norm: str = "l1") -> AdelicToricDivisor:
    """Check the divisor invariants; accepts a divisor object or a raw mapping.

    Raw form: {"polytope": [[...], ...], "metrics": {place: {...}}}, see config.
    """
    if isinstance(spec, AdelicToricDivisor):
        d = spec
    else:
        from .config import divisor_from_mapping
        d = divisor_from_mapping(spec, norm=norm)
    P = d.polytope
    if not P.full_dimensional:
        raise DivisorValidationError("polytope has empty interior (D not big)", "divisor.polytope")
    for v, m in d.metrics.items():
        path = f"divisor.metrics.{v}"
        if isinstance(m, Piecewise):
            psi = m.psi
            if not psi.is_metric:
                raise DivisorValidationError("metric function must be defined on all of N_R", path)
            if psi.ambient_dim != d.dim:
                raise DivisorValidationError("slope dimension differs from the polytope", path)
            if psi.slope_polytope != P:
                raise DivisorValidationError(
                    "unbounded difference: conv(slopes) differs from the polytope", path)
            if not v.is_archimedean:
                for _, c in psi.pieces:
                    if c.constant or any(q != v.p for q in c.primes()):
                        raise DivisorValidationError(
                            f"lambda_v-rationality: constant {c} is not in Q*log({v.p})", path)
        elif isinstance(m, Smooth1D):
            if d.dim != 1:
                raise DivisorValidationError("smooth metrics are supported in dimension 1 only", path)
            a, b = m.psi.slopes
            if P.vertices != ((Fraction(a),), (Fraction(b),)):
                raise DivisorValidationError(
                    "unbounded difference: asymptotic slopes differ from the polytope", path)
        elif not isinstance(m, Canonical):
            raise DivisorValidationError(f"unknown metric kind {m!r}", path)
    return d


# roofs -------------------------------------------------------------------------------------

def roof_local(d: AdelicToricDivisor, v) -> PAConcave:
    m = d.metric(v)
    if isinstance(m, Canonical):
        return PAConcave.zero_on(d.polytope)
    if isinstance(m, Smooth1D):
        raise NumericPathError(f"place {v} is smooth; use the numeric path")
    return legendre_dual(m.psi)


def _exact_roofs(d) -> dict:
    if "_roofs" not in d.__dict__:
        d.__dict__["_roofs"] = {v: roof_local(d, v) for v, m in d.metrics.items() if isinstance(m, Piecewise)}
    return dict(d.__dict__["_roofs"])


def global_roof(d: AdelicToricDivisor) -> PAConcave:
    if d.numeric:
        raise NumericPathError("global roof of a divisor with smooth metrics is numeric")
    roofs = list(_exact_roofs(d).values())
    if not roofs:
        return PAConcave.zero_on(d.polytope)
    return pac_add(*roofs)


def essential_minimum(d: AdelicToricDivisor):
    """Maximum of the global roof: a LogScalar, or a float on the numeric path."""
    if d.numeric:
        return _numeric(d).ess_min
    if "_ess_min" not in d.__dict__:
        d.__dict__["_ess_min"] = pac_argmax(global_roof(d)).value
    return d.__dict__["_ess_min"]


# numeric (smooth, n = 1) path ---------------------------------------------------------------

@dataclass(frozen=True)
class NumInterval:
    lo: float
    hi: float

    def __add__(self, other):
        return NumInterval(self.lo + other.lo, self.hi + other.hi)

    def __neg__(self):
        return NumInterval(-self.hi, -self.lo)

    def intersect(self, other, tol=None):
        tol = _tol(tol)
        lo, hi = max(self.lo, other.lo), min(self.hi, other.hi)
        if lo > hi + tol:
            return None
        if lo > hi:
            lo = hi = 0.5 * (lo + hi)
        return NumInterval(lo, hi)

    def is_singleton(self, tol=None):
        tol = _tol(tol)
        return math.isfinite(self.lo) and math.isfinite(self.hi) and self.hi - self.lo <= tol

    def contains(self, x, tol=None):
        tol = _tol(tol)
        return self.lo - tol <= x <= self.hi + tol

    def is_vertex(self, x, tol=None):
        tol = _tol(tol)
        return self.contains(x, tol) and (abs(x - self.lo) <= tol or abs(x - self.hi) <= tol)

    def midpoint(self):
        if math.isfinite(self.lo) and math.isfinite(self.hi):
            return 0.5 * (self.lo + self.hi)
        if math.isfinite(self.lo):
            return self.lo + 1.0
        if math.isfinite(self.hi):
            return self.hi - 1.0
        return 0.0

    def minimal_face(self, b, tol=None):
        tol = _tol(tol)
        if abs(b - self.lo) <= tol:
            return NumInterval(self.lo, self.lo)
        if abs(b - self.hi) <= tol:
            return NumInterval(self.hi, self.hi)
        return self

    def describe(self):
        return {"lo": self.lo, "hi": self.hi}

    def __repr__(self):
        return f"[{self.lo:.12g}, {self.hi:.12g}]"


@dataclass
class _NumericAnalysis:
    ess_min: float
    maximizer: float
    supdiffs: dict
    global_supdiff: NumInterval


def _roof_float(d, v, x: float) -> float:
    m = d.metric(v)
    if isinstance(m, Smooth1D):
        return smooth_roof(m.psi, x)
    if isinstance(m, Canonical):
        return 0.0
    return float(legendre_dual(m.psi).eval_float([[x]])[0])


def _supdiff_float(d, v, x: float, tol=1e-10) -> NumInterval:
    a, b = (float(p[0]) for p in d.polytope.vertices)
    m = d.metric(v)
    if isinstance(m, Smooth1D):
        if a + tol < x < b - tol:
            s = conjugate_point(m.psi, x)
            return NumInterval(s, s)
        return NumInterval(-math.inf, math.inf) if a >= b else (
            NumInterval(conjugate_point(m.psi, a + 1e-12), math.inf) if x <= a + tol
            else NumInterval(-math.inf, conjugate_point(m.psi, b - 1e-12)))
    if isinstance(m, Canonical):
        right, left = 0.0, 0.0
    else:
        th = legendre_dual(m.psi)
        sl = np.array([float(s[0]) for s, _ in th.pieces])
        c = np.array([float(cc) for _, cc in th.pieces])
        vals = sl * x + c
        act = vals <= vals.min() + 1e-12 * (1 + np.abs(vals).max())
        right, left = sl[act].min(), sl[act].max()
    lo = right if x < b - tol else -math.inf
    hi = left if x > a + tol else math.inf
    if x <= a + tol:
        lo, hi = right, math.inf
    if x >= b - tol:
        lo, hi = -math.inf, left
    return NumInterval(lo, hi)


def _numeric(d: AdelicToricDivisor) -> _NumericAnalysis:
    cache = d.__dict__.setdefault("_num_cache", {})
    if "res" in cache:
        return cache["res"]
    smooth = [m.psi for m in d.metrics.values() if isinstance(m, Smooth1D)]
    pa = [legendre_dual(m.psi) for m in d.metrics.values() if isinstance(m, Piecewise)]
    a, b = (float(p[0]) for p in d.polytope.vertices)
    mx, xs, _, _ = maximize_1d(smooth, pa, domain=(a, b))
    sds = {v: _supdiff_float(d, v, xs) for v in d.metrics}
    sds[DEFAULT] = _supdiff_float(d, DEFAULT, xs)
    G = sds[DEFAULT]
    for v in d.metrics:
        G = G + sds[v]
    res = _NumericAnalysis(mx, xs, sds, G)
    cache["res"] = res
    return res


# analysis ------------------------------------------------------------------------------------

@dataclass
class PlaceSets:
    A: object
    B: object
    F: object

    def __iter__(self):
        return iter((self.A, self.B, self.F))


@dataclass
class AnalysisReport:
    divisor: AdelicToricDivisor
    roofs: dict
    global_roof: object
    ess_min: object
    cmax: object
    ri_point: tuple
    abf: dict
    global_supdiff: object
    monocritical: bool
    critical_point: dict | None
    quasi_canonical: bool
    numeric_flag: bool
    consistency: dict = field(default_factory=dict)


def _analysis_places(d):
    return list(d.metrics) + [DEFAULT]


def _exact_analysis(d: AdelicToricDivisor) -> AnalysisReport:
    roofs = _exact_roofs(d)
    theta = global_roof(d)
    top, cmax, x = pac_argmax(theta)
    zero = PAConcave.zero_on(d.polytope)
    G = supdifferential(theta, x)
    abf = {}
    sd = {v: supdifferential(r, x) for v, r in roofs.items()}
    sd[DEFAULT] = supdifferential(zero, x)
    for v in _analysis_places(d):
        if v is DEFAULT:
            g2_sd = G
        else:
            others = [r for w, r in roofs.items() if w != v]
            g2 = pac_add(*others) if others else zero
            g2_sd = supdifferential(g2, x)
        A = sd[v]
        B = poly_intersect(A, -g2_sd)
        if B is Empty:
            raise InternalConsistencyError(f"B at {v} is empty, contradicting the flatification lemma")
        F = minimal_face_containing(A, B)
        abf[v] = PlaceSets(A, B, F)
    zero_pt = (ZERO,) * d.dim
    path_vertex = is_vertex(G, zero_pt)
    path_faces = all(s.F.is_singleton() for s in abf.values())
    # Lemma 4 route: unique decomposition 0 = a_v + b_v with b_v in the Minkowski
    # sum of the other sup-differentials, both parts vertices
    path_decomp = True
    for v in _analysis_places(d):
        rest = [sd[w] for w in _analysis_places(d) if w != v]
        S = rest[0] if rest else LogPolyhedron.point(zero_pt)
        for P in rest[1:]:
            S = minkowski_sum(S, P)
        B = poly_intersect(sd[v], -S)
        if B is Empty or not B.is_singleton():
            path_decomp = False
            break
        a = B.vertices[0]
        if not (is_vertex(sd[v], a) and is_vertex(S, tuple(-c for c in a))):
            path_decomp = False
            break
    consistency = {"vertex_test": path_vertex, "singleton_faces": path_faces, "unique_decomposition": path_decomp}
    if len({path_vertex, path_faces, path_decomp}) != 1:
        raise InternalConsistencyError(f"monocriticality tests disagree: {consistency}")
    crit = None
    if path_vertex:
        crit = {v: s.F.vertices[0] for v, s in abf.items()}
        total = [ZERO] * d.dim
        for v, u in crit.items():
            if v is not DEFAULT:
                total = [t + c for t, c in zip(total, u)]
        if any(not c.is_zero() for c in total) or any(not c.is_zero() for c in crit[DEFAULT]):
            raise InternalConsistencyError("critical point does not sum to zero")
    qc = len(theta.pieces) == 1 and all(c.is_zero() for c in theta.pieces[0][0])
    return AnalysisReport(d, roofs, theta, top, cmax, x, abf, G, path_vertex, crit, qc, False, consistency)


def _numeric_analysis(d: AdelicToricDivisor) -> AnalysisReport:
    na = _numeric(d)
    x = na.maximizer
    abf = {}
    for v in _analysis_places(d):
        A = na.supdiffs[v]
        g2 = na.global_supdiff if v is DEFAULT else None
        if g2 is None:
            g2 = na.supdiffs[DEFAULT]
            for w in d.metrics:
                if w != v:
                    g2 = g2 + na.supdiffs[w]
        B = A.intersect(-g2)
        if B is None:
            raise InternalConsistencyError(f"numeric B at {v} is empty")
        F = A.minimal_face(B.midpoint())
        abf[v] = PlaceSets(A, B, F)
    G = na.global_supdiff
    path_vertex = G.is_vertex(0.0)
    path_faces = all(s.F.is_singleton() for s in abf.values())
    consistency = {"vertex_test": path_vertex, "singleton_faces": path_faces}
    if path_vertex != path_faces:
        # reported rather than resolved on the numeric path
        consistency["disagreement"] = True
    crit = {v: (s.F.lo,) for v, s in abf.items()} if path_vertex and path_faces else None
    qc = False
    return AnalysisReport(d, {}, None, na.ess_min, (x, x), (x,), abf, G, path_vertex and path_faces,
                          crit, qc, True, consistency)


def analyze(d: AdelicToricDivisor) -> AnalysisReport:
    cache = d.__dict__.setdefault("_analysis_cache", {})
    if "report" not in cache:
        cache["report"] = _numeric_analysis(d) if d.numeric else _exact_analysis(d)
    return cache["report"]


def abf_sets(d: AdelicToricDivisor, v):
    """(A_v, B_v, F_v) at the relative-interior point of the argmax."""
    rep = analyze(d)
    key = v if v is DEFAULT else Place.parse(v)
    if key not in rep.abf:
        key = DEFAULT
    return rep.abf[key]


def is_quasi_canonical(d: AdelicToricDivisor) -> bool:
    return analyze(d).quasi_canonical


def is_monocritical(d: AdelicToricDivisor):
    rep = analyze(d)
    return rep.monocritical, rep.critical_point


# functionals -----------------------------------------------------------------------------------

def _g2_dual(d: AdelicToricDivisor, v) -> PAConcave:
    """g_2^dual for the place v: the dual of the sum of the other roofs."""
    cache = d.__dict__.setdefault("_g2dual_cache", {})
    key = str(v)
    if key not in cache:
        roofs = _exact_roofs(d)
        others = [r for w, r in roofs.items() if w != v]
        g2 = pac_add(*others) if others else PAConcave.zero_on(d.polytope)
        cache[key] = legendre_dual(g2)
    return cache[key]


def g2_dual_by_supconvolution(d: AdelicToricDivisor, v) -> PAConcave:
    """Second route to g_2^dual: sup-convolution of the other metric functions."""
    others = [d.psi(w) for w in d.metrics if w != v]
    if not others:
        return d.canonical_psi
    acc = others[0]
    for f in others[1:]:
        acc = sup_convolution(acc, f)
    # the canonical metric at the remaining places is neutral for the sup-convolution
    return sup_convolution(acc, d.canonical_psi)


def _key(v):
    return v if v is DEFAULT else Place.parse(v)


def phi(d: AdelicToricDivisor, v, mu: DiscreteMeasure):
    """Phi_v(mu) = int psi_v dmu + g_2^dual(-E[mu]) + max(theta)."""
    v = _key(v)
    if mu.dim != d.dim:
        raise ValueError("measure dimension differs from the divisor")
    if d.numeric or not mu.exact:
        return _phi_float(d, v, mu)
    psi = d.psi(v)
    first = mu.integrate(psi)
    E = mu.expectation
    second = _g2_dual(d, v)(tuple(-c for c in E))
    return first + second + essential_minimum(d)


def _conj_float(d, v, y: np.ndarray) -> float:
    """g_2^dual(y) = min_x <x, y> - g_2(x) evaluated numerically (1-D numeric path)."""
    if not d.numeric:
        return float(_g2_dual(d, v).eval_float([y])[0])
    from scipy.optimize import minimize_scalar

    a, b = (float(p[0]) for p in d.polytope.vertices)
    others = [w for w in d.metrics if w != v]

    def g2(x):
        return sum(_roof_float(d, w, x) for w in others)

    f = lambda x: x * float(y[0]) - g2(x)
    res = minimize_scalar(f, bounds=(a, b), method="bounded", options={"xatol": 1e-12})
    return float(min(res.fun, f(a), f(b)))


def _phi_float(d, v, mu):
    first = sum(float(w) * d.psi_float(v, p) for p, w in mu.atoms)
    E = np.array([float(c) for c in mu.expectation])
    second = _conj_float(d, v, -E)
    return first + second + float(essential_minimum(d))


def eta(d: AdelicToricDivisor, nu: AdelicMeasure):
    """eta(nu) = -sum_v int psi_v dnu_v (nu must be centered)."""
    nu.check_centered()
    if nu.dim != d.dim:
        raise ValueError("measure dimension differs from the divisor")
    places = sorted(set(nu.places) | set(d.metrics), key=lambda v: v.sort_key())
    exact = nu.exact and not d.numeric
    total = ZERO if exact else 0.0
    for v in places:
        mu = nu[v]
        if exact:
            total = total - mu.integrate(d.psi(v))
        else:
            total -= sum(float(w) * d.psi_float(v, p) for p, w in mu.atoms)
    return total


def smallness_gap(d: AdelicToricDivisor, nu: AdelicMeasure):
    """(max_v -Phi_v(nu_v), sum_v -Phi_v(nu_v)), bracketing eta(nu) - ess_min."""
    nu.check_centered()
    places = sorted(set(nu.places) | set(d.metrics), key=lambda v: v.sort_key())
    exact = nu.exact and not d.numeric
    vals = [-phi(d, v, nu[v]) for v in places]
    if exact:
        lower = exact_max(vals + [ZERO])
        upper = sum(vals, ZERO)
    else:
        vals = [float(x) for x in vals]
        lower = max(vals + [0.0])
        upper = float(sum(vals))
    return lower, upper


def lemma2_constants(d: AdelicToricDivisor, v):
    """(c1, c2) with Phi_v(mu) <= c1 - c2 int ||u|| dmu.

    c1 = 4 max over Delta of |g_1|, |g_2| (attained at subdivision vertices);
    c2 = radius of a dual-norm ball around the vertex average inside Delta.
    """
    v = _key(v)
    roofs = _exact_roofs(d)
    zero = PAConcave.zero_on(d.polytope)
    g1 = roofs.get(v, zero)
    others = [r for w, r in roofs.items() if w != v]
    g2 = pac_add(*others) if others else zero
    vals = [abs(t) for _, t in g1.vertices] + [abs(t) for _, t in g2.vertices]
    c1 = exact_max(vals).scale(4)
    x0 = d.polytope.vertex_average()
    radii = []
    for a, b in d.polytope.halfspaces:
        na = sum(abs(c) for c in a) if d.norm == "l1" else max(abs(c) for c in a)
        radii.append((dot_q(a, x0) - b) / na)
    return c1, min(radii)


# special points ---------------------------------------------------------------------------------

def special_point_exists(d: AdelicToricDivisor) -> bool:
    mono, crit = is_monocritical(d)
    if not mono:
        raise ValueError("special points are analysed for monocritical divisors")
    for v, u in crit.items():
        if v is DEFAULT:
            continue
        for c in u:
            c = ls(c)
            if v.is_archimedean:
                if c.constant:
                    return False
            elif c.constant or any(q != v.p for q in c.primes()):
                return False
    return True


def construct_special_point(d: AdelicToricDivisor, exists: bool | None = None):
    """(q, l) with val_v(q) = l * u_v at every place; special points are q^(1/l)."""
    if exists is None:
        exists = special_point_exists(d)
    if not exists:
        raise ValueError("no special point: the critical point is not in the image of val")
    _, crit = is_monocritical(d)
    n = d.dim
    coeffs = {}
    ell = 1
    for v, u in crit.items():
        if v is DEFAULT or v.is_archimedean:
            continue
        cs = tuple(ls(c).coeff(v.p) for c in u)
        coeffs[v.p] = cs
        for c in cs:
            ell = lcm(ell, c.denominator)
    q = []
    for i in range(n):
        x = Fraction(1)
        for p, cs in coeffs.items():
            e = int(cs[i] * ell)
            x *= Fraction(p) ** e
        q.append(x)
    q = tuple(q)
    # verification by re-evaluating valuations at every relevant place
    for v, u in crit.items():
        if v is DEFAULT:
            continue
        for i in range(n):
            if val(q[i], v) != ls(u[i]).scale(ell):
                raise InternalConsistencyError(f"valuation mismatch at {v}")
    for p in {pp for x in q for pp in (list(_primes_of(x)))}:
        if Place(p) not in crit and any(not val(x, Place(p)).is_zero() for x in q):
            raise InternalConsistencyError(f"stray valuation at {p}")
    return q, ell


def _primes_of(x: Fraction):
    from sympy import factorint
    out = set(factorint(abs(x.numerator))) | set(factorint(x.denominator))
    return out


def flattened_divisor(d: AdelicToricDivisor, shifts: Mapping) -> AdelicToricDivisor:
    """psi_v(u) = Psi_D(u - u_v): quasi-canonical when sum_v u_v = 0.

    Finite-place shifts must lie in Q^n log p to keep lambda_v-rationality.
    """
    metrics = {}
    for v, u in shifts.items():
        v = Place.parse(v)
        u = lsvec(u)
        pieces = [(m, -sum((ls(c).scale(mi) for mi, c in zip(m, u)), ZERO)) for m in d.polytope.vertices]
        metrics[v] = Piecewise(PAConcave(pieces))
    return AdelicToricDivisor(d.polytope, metrics, d.norm, name=(d.name + "-flattened").strip("-"))
