"""Concave piecewise-affine functions and their Legendre-Fenchel calculus.

Two flavours share one class. *Metric-type* functions live on all of N_R and
have rational slopes with LogScalar constants (the psi_v). *Roof-type*
functions live on a rational polytope and are stored as the upper hull of
lifted points (x_i rational, t_i LogScalar); their facet slopes are LogScalar
vectors and their breakpoints are rational (the theta_v).
"""
from __future__ import annotations

from fractions import Fraction
from functools import cached_property
from itertools import combinations
from typing import Sequence

import numpy as np

from ..exactlog import LogScalar, ZERO, ls
from .hull import Facet, upper_hull
from .linalg import dot_lq, dot_ql, primitive, qvec, solve_q, lsvec
from .polytope import QPolytope, PolytopeError

__all__ = [
    "PAConcave",
    "legendre_dual",
    "pac_add",
    "sup_convolution",
    "pac_argmax",
    "ArgmaxResult",
    "exact_min",
    "exact_max",
]


def _argext(values: Sequence[LogScalar], sign: int) -> list[int]:
    """Indices attaining the exact min (sign=1) or max (sign=-1), float filtered."""
    fl = np.array([float(v) for v in values]) * sign
    best = fl.min()
    tol = 1e-9 * (1.0 + np.abs(fl).max())
    cand = [i for i in range(len(values)) if fl[i] <= best + tol]
    win = [cand[0]]
    for i in cand[1:]:
        s = (values[i] - values[win[0]]).sign() * sign
        if s < 0:
            win = [i]
        elif s == 0:
            win.append(i)
    return win


def exact_min(values) -> LogScalar:
    values = list(values)
    return values[_argext(values, 1)[0]]


def exact_max(values) -> LogScalar:
    values = list(values)
    return values[_argext(values, -1)[0]]


def _norm_plane(a, b):
    p = primitive(a)
    i = next(k for k, x in enumerate(p) if x)
    b = b * (p[i] / a[i])
    if p[i] < 0:
        p, b = tuple(-x for x in p), -b
    return p, b


class PAConcave:
    """min over pieces of <slope, .> + const, optionally restricted to a polytope."""

    def __init__(self, pieces, domain: QPolytope | None = None, *, _hull=None):
        if _hull is not None:
            self._hull = _hull
            self.domain = domain
            self.pieces = tuple((f.slope, f.const) for f in _hull.facets)
            self.ambient_dim = domain.dim
            return
        self._hull = None
        if domain is not None:
            raise ValueError("roof-type functions are built with PAConcave.from_points")
        merged: dict[tuple, LogScalar] = {}
        for m, c in pieces:
            m = qvec(m)
            c = ls(c)
            if m not in merged or c < merged[m]:
                merged[m] = c
        if not merged:
            raise ValueError("PAConcave needs at least one piece")
        self.pieces = tuple(sorted(merged.items()))
        dims = {len(m) for m, _ in self.pieces}
        if len(dims) != 1:
            raise ValueError("slopes of differing dimension")
        self.ambient_dim = dims.pop()
        self.domain = None

    # constructors ------------------------------------------------------------
    @classmethod
    def from_points(cls, points, domain: QPolytope | None = None) -> "PAConcave":
        """Roof-type function: upper envelope of lifted points (x, t)."""
        hull = upper_hull(points, domain)
        if domain is None:
            domain = QPolytope.from_points([x for x, _ in hull.points])
        return cls(None, domain, _hull=hull)

    @classmethod
    def zero_on(cls, domain: QPolytope) -> "PAConcave":
        return cls.from_points([(v, ZERO) for v in domain.vertices], domain)

    @classmethod
    def affine_on(cls, domain: QPolytope, slope, const) -> "PAConcave":
        slope, const = lsvec(slope), ls(const)
        return cls.from_points([(v, dot_lq(slope, v) + const) for v in domain.vertices], domain)

    @classmethod
    def support_function(cls, polytope: QPolytope) -> "PAConcave":
        """Psi_Delta(u) = min over vertices m of <m, u> (the canonical metric)."""
        return cls([(m, ZERO) for m in polytope.vertices])

    # basic properties ------------------------------------------------------------
    @property
    def is_metric(self) -> bool:
        return self.domain is None

    @cached_property
    def slope_polytope(self) -> QPolytope:
        if not self.is_metric:
            raise TypeError("slope polytope is defined for metric-type functions")
        return QPolytope.from_points([m for m, _ in self.pieces])

    @cached_property
    def _float_pieces(self):
        S = np.array([[float(s) for s in m] for m, _ in self.pieces])
        C = np.array([float(c) for _, c in self.pieces])
        return S, C

    def _near_min(self, u) -> list[int]:
        # pieces whose float value is within a safe margin of the float minimum
        S, C = self._float_pieces
        fl = S @ np.array([float(c) for c in u]) + C
        tol = 1e-9 * (1.0 + np.abs(fl).max())
        return np.flatnonzero(fl <= fl.min() + tol).tolist()

    def __call__(self, u) -> LogScalar:
        if self.is_metric:
            return exact_min([dot_ql(self.pieces[i][0], u) + self.pieces[i][1] for i in self._near_min(u)])
        x = qvec(u)
        if not self.domain.contains(x):
            raise ValueError(f"point {x} outside the domain")
        return exact_min([dot_lq(self.pieces[i][0], x) + self.pieces[i][1] for i in self._near_min(x)])

    def eval_float(self, U) -> np.ndarray:
        U = np.atleast_2d(np.asarray(U, dtype=float))
        S, C = self._float_pieces
        return (U @ S.T + C[None, :]).min(axis=1)

    def active_pieces(self, u) -> list[int]:
        if self.is_metric:
            vals = [dot_ql(m, u) + c for m, c in self.pieces]
        else:
            vals = [dot_lq(m, qvec(u)) + c for m, c in self.pieces]
        return _argext(vals, 1)

    def is_affine(self) -> bool:
        return len(self.pieces) == 1

    # roof-type structure -------------------------------------------------------------
    @property
    def hull(self):
        if self._hull is None:
            raise TypeError("metric-type functions carry no hull")
        return self._hull

    @cached_property
    def facets(self) -> list[Facet]:
        return self.hull.facets

    @cached_property
    def cells(self) -> list[QPolytope]:
        pts = self.hull.points
        return [QPolytope.from_points([pts[i][0] for i in f.support]) for f in self.facets]

    @cached_property
    def vertices(self) -> list[tuple]:
        """Subdivision vertices with values: [(x, theta(x))]."""
        vals = dict(self.hull.points)
        seen = {}
        for cell in self.cells:
            for v in cell.vertices:
                seen[v] = vals[v]
        return sorted(seen.items())

    def cell_hyperplanes(self) -> set:
        return {_norm_plane(a, b) for cell in self.cells for a, b in cell.halfspaces}

    def __repr__(self):
        body = ", ".join(f"({', '.join(map(str, m))}; {c})" for m, c in self.pieces)
        where = "N_R" if self.is_metric else repr(self.domain)
        return f"PAConcave[{body}] on {where}"

    def same_function(self, other: "PAConcave") -> bool:
        """Exact equality of the functions (irredundant data compared)."""
        if self.is_metric != other.is_metric:
            return False
        if self.is_metric:
            return set(legendre_dual(self).vertices) == set(legendre_dual(other).vertices)
        return self.domain == other.domain and self.vertices == other.vertices


# duality ---------------------------------------------------------------------------

def legendre_dual(f: PAConcave) -> PAConcave:
    """Concave conjugate x -> inf_u <x, u> - f(u), in both directions.

    Metric-type psi maps to the roof on conv{slopes} given by the upper hull of
    (m_i, -c_i); a roof maps back to the metric with pieces (z, -theta(z)) over
    its subdivision vertices z.
    """
    if f.is_metric:
        return PAConcave.from_points([(m, -c) for m, c in f.pieces], f.slope_polytope)
    return PAConcave([(z, -t) for z, t in f.vertices])


def irredundant(psi: PAConcave) -> PAConcave:
    return legendre_dual(legendre_dual(psi))


def _candidate_points(fs: list[PAConcave], domain: QPolytope) -> set:
    cands = set(domain.vertices)
    planes = set()
    nonaffine = [f for f in fs if not f.is_affine()]
    for f in fs:
        cands.update(x for x, _ in f.vertices)
    if len(nonaffine) >= 2:
        for f in nonaffine:
            planes |= f.cell_hyperplanes()
        n = domain.dim
        planes = sorted(planes)
        for sub_ in combinations(planes, n):
            x = solve_q([a for a, _ in sub_], [b for _, b in sub_])
            if x is not None and domain.contains(x):
                cands.add(x)
    return cands


def pac_add(*fs: PAConcave) -> PAConcave:
    """Pointwise sum of concave PA functions (all metric-type or all on one domain)."""
    if not fs:
        raise ValueError("nothing to add")
    if len(fs) == 1 and isinstance(fs[0], (list, tuple)):
        fs = tuple(fs[0])
    if all(f.is_metric for f in fs):
        pieces = [((), ZERO)]
        for f in fs:
            pieces = [(tuple(a + b for a, b in zip(m1, m2)) if m1 else m2, c1 + c2)
                      for m1, c1 in pieces for m2, c2 in f.pieces]
        return irredundant(PAConcave(pieces))
    if any(f.is_metric for f in fs):
        raise ValueError("cannot add metric-type and roof-type functions")
    dom = fs[0].domain
    for f in fs[1:]:
        if f.domain != dom:
            raise ValueError("domain mismatch in pac_add")
    if len(fs) == 1:
        return fs[0]
    # fold pairwise so candidate sets stay small
    acc = fs[0]
    for f in fs[1:]:
        pts = []
        for x in _candidate_points([acc, f], dom):
            pts.append((x, acc(x) + f(x)))
        acc = PAConcave.from_points(pts, dom)
    return acc


def sup_convolution(f: PAConcave, g: PAConcave) -> PAConcave:
    """(f [+] g)(u) = sup_{u1 + u2 = u} f(u1) + g(u2), via (f [+] g)^dual = f^dual + g^dual."""
    if not (f.is_metric and g.is_metric):
        raise ValueError("sup_convolution takes metric-type functions")
    if g.is_affine() or f.is_affine():
        if f.is_affine():
            f, g = g, f
        (m, c), = g.pieces
        # sup_{u1} f(u1) + <m, u - u1> + c = <m, u> + c - f^dual(m)
        theta = legendre_dual(f)
        if not theta.domain.contains(m):
            raise ValueError("affine summand slope outside the slope polytope: result is -inf")
        return PAConcave([(m, c - theta(m))])
    tf, tg = legendre_dual(f), legendre_dual(g)
    if tf.domain != tg.domain:
        dom = tf.domain.intersect(tg.domain)
        if not dom.full_dimensional:
            raise PolytopeError("slope polytopes meet in a lower-dimensional set")
        tf = restrict(tf, dom)
        tg = restrict(tg, dom)
    return legendre_dual(pac_add(tf, tg))


def restrict(theta: PAConcave, dom: QPolytope) -> PAConcave:
    """Restriction of a roof to a full-dimensional subpolytope of its domain."""
    cands = set(dom.vertices) | {x for x, _ in theta.vertices if dom.contains(x)}
    planes = sorted(theta.cell_hyperplanes() | set(dom.halfspaces))
    for sub_ in combinations(planes, dom.dim):
        x = solve_q([a for a, _ in sub_], [b for _, b in sub_])
        if x is not None and dom.contains(x):
            cands.add(x)
    return PAConcave.from_points([(x, theta(x)) for x in cands], dom)


# argmax ------------------------------------------------------------------------------

class ArgmaxResult(tuple):
    __slots__ = ()

    def __new__(cls, value, cmax, ri_point):
        return super().__new__(cls, (value, cmax, ri_point))

    @property
    def value(self) -> LogScalar:
        return self[0]

    @property
    def cmax(self) -> QPolytope:
        return self[1]

    @property
    def ri_point(self) -> tuple:
        return self[2]


def pac_argmax(f: PAConcave) -> ArgmaxResult:
    """Exact maximum, the argmax polytope and its vertex average."""
    if f.is_metric:
        raise ValueError("argmax needs a compact domain")
    verts = f.vertices
    win = _argext([t for _, t in verts], -1)
    top = verts[win[0]][1]
    cmax = QPolytope.from_points([verts[i][0] for i in win])
    return ArgmaxResult(top, cmax, cmax.vertex_average())
