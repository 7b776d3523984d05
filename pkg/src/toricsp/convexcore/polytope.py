"""Rational polytopes with cross-checked V- and H-representations."""
from __future__ import annotations

from fractions import Fraction
from functools import cached_property
from itertools import combinations

from .linalg import det_q, dot_q, nullspace_q, primitive, qvec, row_echelon, solve_q, sub

__all__ = ["QPolytope", "PolytopeError"]


class PolytopeError(ValueError):
    pass


def _hull2(pts):
    """Vertices of a planar point set in counter-clockwise order (exact)."""
    pts = sorted(set(pts))
    if len(pts) <= 2:
        return pts

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower, upper = [], []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    for p in reversed(pts):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return lower[:-1] + upper[:-1]


def _facets_full(pts, k):
    """Facet inequalities a.y >= b and vertices of a full-dimensional set in Q^k."""
    if k == 0:
        return [], [pts[0]]
    if k == 1:
        lo = min(p[0] for p in pts)
        hi = max(p[0] for p in pts)
        return [((Fraction(1),), lo), ((Fraction(-1),), -hi)], [(lo,), (hi,)]
    if k == 2:
        ring = _hull2(pts)
        H = []
        for i, p in enumerate(ring):
            q = ring[(i + 1) % len(ring)]
            # interior lies to the left of p -> q
            a = primitive((-(q[1] - p[1]), q[0] - p[0]))
            H.append((a, dot_q(a, p)))
        return H, ring
    # k == 3: brute force over triples, fine for the small sets we meet
    H = {}
    for tri in combinations(range(len(pts)), 3):
        p0, p1, p2 = (pts[i] for i in tri)
        u, v = sub(p1, p0), sub(p2, p0)
        n = (u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0])
        if not any(n):
            continue
        n = primitive(n)
        b = dot_q(n, p0)
        vals = [dot_q(n, p) - b for p in pts]
        if all(x >= 0 for x in vals):
            H[n] = b
        elif all(x <= 0 for x in vals):
            H[tuple(-x for x in n)] = -b
    Hl = list(H.items())
    verts = []
    for p in pts:
        tight = [a for a, b in Hl if dot_q(a, p) == b]
        if len(tight) >= 3 and row_echelon(tight)[1].__len__() == 3:
            verts.append(p)
    return Hl, verts


class QPolytope:
    """Nonempty compact rational polytope in Q^dim (dim <= 3).

    ``halfspaces`` are pairs ``(a, b)`` meaning ``<a, x> >= b``; equalities of
    lower-dimensional polytopes appear as two opposite inequalities.
    """

    def __init__(self, vertices, halfspaces, dim: int):
        self.dim = dim
        self.vertices = tuple(sorted(vertices))
        self.halfspaces = tuple(halfspaces)
        if not self.vertices:
            raise PolytopeError("empty polytope")
        for v in self.vertices:
            for a, b in self.halfspaces:
                if dot_q(a, v) < b:
                    raise PolytopeError("V-rep and H-rep disagree")

    # constructors -------------------------------------------------------------------
    @classmethod
    def from_points(cls, points) -> "QPolytope":
        pts = sorted({qvec(p) for p in points})
        if not pts:
            raise PolytopeError("no points")
        n = len(pts[0])
        if n > 3:
            raise PolytopeError("dimension above 3 is not supported")
        p0 = pts[0]
        diffs = [sub(p, p0) for p in pts[1:]]
        red, piv = row_echelon(diffs) if diffs else ([], [])
        k = len(piv)
        eqs = nullspace_q(red, n) if k < n else []
        H = []
        for c in eqs:
            c = primitive(c)
            b = dot_q(c, p0)
            H.append((c, b))
            H.append((tuple(-x for x in c), -b))
        proj = [tuple(p[j] for j in piv) for p in pts]
        Hk, vk = _facets_full(proj, k)
        for a, b in Hk:
            full = [Fraction(0)] * n
            for j, c in zip(piv, a):
                full[j] = c
            H.append((tuple(full), b))
        back = {tuple(p[j] for j in piv): p for p in pts}
        verts = [back[v] for v in vk]
        return cls(verts, H, n)

    @classmethod
    def from_halfspaces(cls, halfspaces, dim: int) -> "QPolytope":
        H = [(qvec(a), Fraction(b)) for a, b in halfspaces]
        verts = set()
        for sub_ in combinations(range(len(H)), dim):
            A = [H[i][0] for i in sub_]
            x = solve_q(A, [H[i][1] for i in sub_])
            if x is None:
                continue
            if all(dot_q(a, x) >= b for a, b in H):
                verts.add(x)
        if dim == 0:
            verts.add(())
        if not verts:
            raise PolytopeError("halfspace system is empty or unbounded")
        P = cls.from_points(verts)
        if recession_rays([a for a, _ in H], dim):
            raise PolytopeError("halfspace system is unbounded")
        return P

    @classmethod
    def box(cls, lo, hi) -> "QPolytope":
        lo, hi = qvec(lo), qvec(hi)
        pts = [()]
        for a, b in zip(lo, hi):
            pts = [p + (x,) for p in pts for x in (a, b)]
        return cls.from_points(pts)

    @classmethod
    def simplex(cls, n: int) -> "QPolytope":
        pts = [tuple(Fraction(0) for _ in range(n))]
        for i in range(n):
            pts.append(tuple(Fraction(int(i == j)) for j in range(n)))
        return cls.from_points(pts)

    # queries ----------------------------------------------------------------------
    @cached_property
    def affine_dim(self) -> int:
        p0 = self.vertices[0]
        return len(row_echelon([sub(v, p0) for v in self.vertices[1:]])[1]) if len(self.vertices) > 1 else 0

    @property
    def full_dimensional(self) -> bool:
        return self.affine_dim == self.dim

    def contains(self, x) -> bool:
        x = qvec(x)
        return all(dot_q(a, x) >= b for a, b in self.halfspaces)

    def vertex_average(self) -> tuple:
        n = len(self.vertices)
        return tuple(sum(v[i] for v in self.vertices) / n for i in range(self.dim))

    def intersect(self, other: "QPolytope") -> "QPolytope":
        if self.dim != other.dim:
            raise PolytopeError("dimension mismatch")
        return QPolytope.from_halfspaces(list(self.halfspaces) + list(other.halfspaces), self.dim)

    def facet_hyperplanes(self):
        """Normalized (a, b) of the inequality constraints that are facets."""
        return [(a, b) for a, b in self.halfspaces]

    def volume(self) -> Fraction:
        """Euclidean volume (exact), for full-dimensional polytopes of dim <= 2."""
        if not self.full_dimensional:
            return Fraction(0)
        if self.dim == 1:
            return self.vertices[-1][0] - self.vertices[0][0]
        if self.dim == 2:
            ring = _hull2(self.vertices)
            s = Fraction(0)
            for i, p in enumerate(ring):
                q = ring[(i + 1) % len(ring)]
                s += p[0] * q[1] - q[0] * p[1]
            return abs(s) / 2
        c = self.vertex_average()
        tot = Fraction(0)
        for a, b in self.halfspaces:
            face = [v for v in self.vertices if dot_q(a, v) == b]
            if len(face) < 3:
                continue
            # fan-triangulate the facet polygon around its first vertex
            ring = _order_face(face, a)
            for i in range(1, len(ring) - 1):
                tot += abs(det_q([sub(ring[0], c), sub(ring[i], c), sub(ring[i + 1], c)])) / 6
        return tot

    def __eq__(self, other):
        return isinstance(other, QPolytope) and self.dim == other.dim and self.vertices == other.vertices

    def __hash__(self):
        return hash((self.dim, self.vertices))

    def __repr__(self):
        vs = ", ".join("(" + ", ".join(str(x) for x in v) + ")" for v in self.vertices)
        return f"QPolytope[{vs}]"


def recession_rays(normals, dim: int) -> list[tuple]:
    """Generators of {r : <a, r> >= 0 for all a}; a line shows up as r and -r."""
    normals = [qvec(a) for a in normals]
    cands = set()
    for v in nullspace_q(normals, dim) if normals else nullspace_q([], dim):
        cands.add(primitive(v))
        cands.add(primitive(tuple(-x for x in v)))
    if dim >= 2:
        for sub_ in combinations(range(len(normals)), dim - 1):
            rows = [normals[i] for i in sub_]
            ns = nullspace_q(rows, dim)
            if len(ns) != 1:
                continue
            r = primitive(ns[0])
            cands.add(r)
            cands.add(tuple(-x for x in r))
    elif dim == 1:
        cands.update({(Fraction(1),), (Fraction(-1),)})
    return sorted(r for r in cands if all(dot_q(a, r) >= 0 for a in normals))


def _order_face(face, normal):
    """Order coplanar 3-D points cyclically by projecting along the normal."""
    drop = max(range(3), key=lambda i: abs(normal[i]))
    keep = [i for i in range(3) if i != drop]
    proj = {tuple(p[i] for i in keep): p for p in face}
    ring = _hull2(list(proj))
    return [proj[r] for r in ring]
