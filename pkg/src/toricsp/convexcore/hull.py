"""Upper hulls of lifted point sets (x rational, t LogScalar).

Candidate facets come from a float computation (monotone chain in 1-D,
Qhull otherwise); every candidate is then re-derived and verified with exact
arithmetic. If verification or the coverage check fails, a brute-force
enumeration with float filtering and exact confirmation takes over.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

import numpy as np

from ..exactlog import LogScalar, ls
from .linalg import det_q, dot_lq, qvec, rank_q, solve_q, sub
from .polytope import QPolytope, PolytopeError

__all__ = ["Facet", "UpperHull", "upper_hull"]


@dataclass(frozen=True)
class Facet:
    slope: tuple            # LogScalar vector
    const: LogScalar
    support: tuple          # indices of lifted points lying on the facet

    def value(self, x) -> LogScalar:
        return dot_lq(self.slope, x) + self.const


@dataclass
class UpperHull:
    points: list            # [(x rational tuple, t LogScalar)], deduplicated in x
    facets: list            # [Facet]


def _dedupe(points):
    best: dict[tuple, LogScalar] = {}
    for x, t in points:
        x = qvec(x)
        t = ls(t)
        if x not in best or t > best[x]:
            best[x] = t
    return sorted(best.items())


def _facet_through(pts, idx) -> Facet | None:
    n = len(pts[0][0])
    A = [list(pts[i][0]) + [Fraction(1)] for i in idx]
    sol = solve_q(A, [pts[i][1] for i in idx])
    if sol is None:
        return None
    sol = tuple(ls(s) for s in sol)
    return Facet(sol[:n], sol[n], ())


def _verify(pts, f: Facet, fvals=None) -> tuple | None:
    """Indices on the facet if every point lies on or below it, else None.

    fvals, when given, holds float gaps (facet minus point); points whose gap
    is clearly positive skip the exact test.
    """
    on = []
    for i, (x, t) in enumerate(pts):
        if fvals is not None and fvals[i] > 1e-6 * (1 + abs(float(t))):
            continue
        s = (f.value(x) - t).sign()
        if s < 0:
            return None
        if s == 0:
            on.append(i)
    return tuple(on)


def _finalize(pts, raw: list[Facet]) -> list[Facet]:
    X = np.array([[float(c) for c in x] for x, _ in pts])
    T = np.array([float(t) for _, t in pts])
    out = {}
    for f in raw:
        key = (f.slope, f.const)
        if key in out:
            continue
        gap = X @ np.array([float(c) for c in f.slope]) + float(f.const) - T
        on = _verify(pts, f, gap)
        if on is None:
            raise ArithmeticError("candidate facet failed exact verification")
        out[key] = Facet(f.slope, f.const, on)
    return sorted(out.values(), key=lambda f: f.support)


def _hull_1d(pts) -> list[Facet]:
    # monotone chain on (x, t) with exact cross products
    chain: list[int] = []
    for i in range(len(pts)):
        while len(chain) >= 2:
            (x1, t1), (x2, t2) = pts[chain[-2]], pts[chain[-1]]
            x3, t3 = pts[i]
            cross = (t2 - t1).scale(x3[0] - x1[0]) - (t3 - t1).scale(x2[0] - x1[0])
            if cross.sign() <= 0:
                chain.pop()
            else:
                break
        chain.append(i)
    raw = []
    for a, b in zip(chain, chain[1:]):
        raw.append(_facet_through(pts, (a, b)))
    return _finalize(pts, raw)


def _coverage_ok(pts, simplices, domain: QPolytope) -> bool:
    n = domain.dim
    if n > 2:
        return True
    tot = Fraction(0)
    for s in simplices:
        base = pts[s[0]][0]
        tot += abs(det_q([sub(pts[i][0], base) for i in s[1:]]))
    tot /= 2 if n == 2 else 1
    return tot == domain.volume()


def _hull_qhull(pts, domain: QPolytope) -> list[Facet] | None:
    from scipy.spatial import ConvexHull, QhullError

    X = np.array([[float(c) for c in x] for x, _ in pts])
    T = np.array([float(t) for _, t in pts])
    span = float(T.max() - T.min()) + 1.0
    aux = np.concatenate([X.mean(axis=0), [T.min() - 10.0 * span]])
    P = np.vstack([np.column_stack([X, T]), aux])
    a = len(pts)
    try:
        hull = ConvexHull(P, qhull_options="Qt Qbb")
    except (QhullError, ValueError):
        return None
    raw, simplices = [], []
    for simplex, eq in zip(hull.simplices, hull.equations):
        if a in simplex or eq[-2] <= 1e-12:
            continue
        idx = tuple(int(i) for i in simplex)
        if rank_q([sub(pts[i][0], pts[idx[0]][0]) for i in idx[1:]]) < len(idx) - 1:
            continue
        f = _facet_through(pts, idx)
        if f is None:
            return None
        raw.append(f)
        simplices.append(idx)
    try:
        facets = _finalize(pts, raw)
    except ArithmeticError:
        return None
    if not _coverage_ok(pts, simplices, domain):
        return None
    return facets


def _hull_brute(pts) -> list[Facet]:
    n = len(pts[0][0])
    X = np.array([[float(c) for c in x] for x, _ in pts])
    T = np.array([float(t) for _, t in pts])
    M = np.column_stack([X, np.ones(len(pts))])
    combos = np.array(list(combinations(range(len(pts)), n + 1)))
    mats = M[combos]
    dets = np.linalg.det(mats)
    scale = 1.0 + np.abs(T).max()
    keep = np.abs(dets) > 1e-12
    combos, mats = combos[keep], mats[keep]
    sol = np.linalg.solve(mats, T[combos][..., None])[..., 0]
    resid = sol @ M.T - T[None, :]          # plane minus point, >= 0 for valid
    ok = (resid >= -1e-9 * scale).all(axis=1)
    groups: dict[tuple, tuple] = {}
    for c, s in zip(combos[ok], sol[ok]):
        key = tuple(np.round(s, 7))
        groups.setdefault(key, tuple(int(i) for i in c))
    raw = []
    for idx in groups.values():
        if rank_q([sub(pts[i][0], pts[idx[0]][0]) for i in idx[1:]]) < n:
            continue
        f = _facet_through(pts, idx)
        if f is not None and _verify(pts, f) is not None:
            raw.append(f)
    return _finalize(pts, raw)


def upper_hull(points, domain: QPolytope | None = None) -> UpperHull:
    """Exact upper hull of lifted points over their (full-dimensional) convex hull."""
    pts = _dedupe(points)
    if not pts:
        raise PolytopeError("no points")
    n = len(pts[0][0])
    if domain is None:
        domain = QPolytope.from_points([x for x, _ in pts])
    if not domain.full_dimensional:
        raise PolytopeError("lifted points do not span a full-dimensional domain")
    if n == 1:
        facets = _hull_1d(pts)
    else:
        facets = _hull_qhull(pts, domain)
        if facets is None:
            facets = _hull_brute(pts)
    return UpperHull(pts, facets)
