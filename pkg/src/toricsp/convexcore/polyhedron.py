"""Pointed polyhedra in N_R with rational facet normals and LogScalar offsets.

Every polyhedron met in the toric analysis (sup-differentials of roofs, their
negatives, intersections, faces, Minkowski sums) has an H-representation
``<a_k, u> >= b_k`` with rational a_k and LogScalar b_k, so vertices solve
rational systems and stay in the log span.
"""
from __future__ import annotations

from fractions import Fraction
from functools import cached_property
from itertools import combinations

from ..exactlog import LogScalar, ls
from .linalg import cross3, dot_ql, lsvec, nullspace_q, primitive, qvec, rank_q, rational_direction, solve_q, sub
from .pa import PAConcave, exact_min
from .polytope import recession_rays

__all__ = [
    "LogPolyhedron",
    "Empty",
    "supdifferential",
    "poly_intersect",
    "minimal_face_containing",
    "is_vertex",
    "minkowski_sum",
]


class _EmptyType:
    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self):
        return "Empty"

    def __bool__(self):
        return False


Empty = _EmptyType()


def _normalize(a, b):
    p = primitive(a)
    i = next(k for k, x in enumerate(p) if x)
    return p, ls(b).scale(p[i] / a[i])


class LogPolyhedron:
    """{u : <a, u> >= b for every (a, b) in constraints}, assumed pointed."""

    def __init__(self, constraints, dim: int):
        self.dim = dim
        best: dict[tuple, LogScalar] = {}
        for a, b in constraints:
            a = qvec(a)
            if not any(a):
                if ls(b).sign() > 0:
                    best[("infeasible",)] = ls(b)
                continue
            a, b = _normalize(a, b)
            if a not in best or b > best[a]:
                best[a] = b
        self.infeasible = ("infeasible",) in best
        best.pop(("infeasible",), None)
        self.constraints = tuple(sorted(best.items()))

    # constructors ------------------------------------------------------------------
    @classmethod
    def from_vertices(cls, vertices, rays=(), dim: int | None = None) -> "LogPolyhedron":
        verts = [lsvec(v) for v in vertices]
        rays = [qvec(r) for r in rays]
        if dim is None:
            dim = len(verts[0])
        dirs = set()
        for i, j in combinations(range(len(verts)), 2):
            r = rational_direction(sub(verts[i], verts[j]))
            if r is None:
                if any(not x.is_zero() for x in sub(verts[i], verts[j])):
                    raise ValueError("edge direction is not rational; not representable")
                continue
            dirs.add(r)
        dirs.update(primitive(r) for r in rays if any(r))
        unit = [tuple(Fraction(int(i == j)) for j in range(dim)) for i in range(dim)]
        normals = set(unit)
        dirs = sorted(dirs)
        if dim == 2:
            normals.update((-d[1], d[0]) for d in dirs)
        elif dim == 3:
            for d in dirs:
                normals.update(cross3(d, e) for e in unit)
            for d, e in combinations(dirs, 2):
                normals.add(cross3(d, e))
        cons = []
        for n in normals:
            if not any(n):
                continue
            for s in (1, -1):
                a = tuple(s * x for x in n)
                if any(sum(x * y for x, y in zip(a, r)) < 0 for r in rays):
                    continue
                cons.append((a, exact_min([dot_ql(a, v) for v in verts])))
        P = cls(cons, dim)
        want = set(verts)
        if not set(P.vertices) <= want:
            raise ValueError("vertex list is not in convex position with rational edges")
        return P

    @classmethod
    def point(cls, u) -> "LogPolyhedron":
        return cls.from_vertices([u])

    @classmethod
    def interval(cls, lo=None, hi=None) -> "LogPolyhedron":
        cons = []
        if lo is not None:
            cons.append(((1,), ls(lo)))
        if hi is not None:
            cons.append(((-1,), -ls(hi)))
        return cls(cons, 1)

    # representation ----------------------------------------------------------------
    @cached_property
    def vertices(self) -> tuple:
        if self.infeasible:
            return ()
        n = self.dim
        cons = self.constraints
        out = set()
        if n == 0:
            return ((),)
        for sub_ in combinations(range(len(cons)), n):
            A = [cons[i][0] for i in sub_]
            x = solve_q(A, [cons[i][1] for i in sub_])
            if x is None:
                continue
            x = lsvec(x)
            if x in out:
                continue
            if all((dot_ql(a, x) - b).sign() >= 0 for a, b in cons):
                out.add(x)
        if not out and not self.constraints and n:
            raise ValueError("the whole space is not pointed")
        return tuple(sorted(out, key=lambda v: tuple(float(c) for c in v)))

    @cached_property
    def rays(self) -> tuple:
        rs = recession_rays([a for a, _ in self.constraints], self.dim)
        rset = set(rs)
        for r in rs:
            if tuple(-x for x in r) in rset:
                raise ValueError("polyhedron contains a line")
        return tuple(rs)

    def is_empty(self) -> bool:
        if self.infeasible:
            return True
        if self.vertices:
            return False
        # pointed and nonempty implies a vertex; check pointedness explicitly
        _ = self.rays
        return True

    @property
    def is_bounded(self) -> bool:
        return not self.rays

    def is_singleton(self) -> bool:
        return len(self.vertices) == 1 and not self.rays

    def contains(self, u) -> bool:
        u = lsvec(u)
        return all((dot_ql(a, u) - b).sign() >= 0 for a, b in self.constraints)

    def contains_float(self, u, tol: float = 1e-9) -> bool:
        """Membership of a float point with slack ``tol``."""
        return all(sum(float(x) * float(y) for x, y in zip(a, u)) - float(b) >= -tol
                   for a, b in self.constraints)

    def tight(self, u) -> list:
        u = lsvec(u)
        return [(a, b) for a, b in self.constraints if (dot_ql(a, u) - b).is_zero()]

    def ri_point(self) -> tuple:
        vs = self.vertices
        k = len(vs)
        p = tuple(sum((v[i] for v in vs), ls(0)) / k for i in range(self.dim))
        for r in self.rays:
            p = tuple(x + y for x, y in zip(p, r))
        return p

    def negate(self) -> "LogPolyhedron":
        return LogPolyhedron([(tuple(-x for x in a), b) for a, b in self.constraints], self.dim)

    __neg__ = negate

    def with_equalities(self, eqs) -> "LogPolyhedron":
        extra = []
        for a, b in eqs:
            extra.append((a, b))
            extra.append((tuple(-x for x in a), -b))
        return LogPolyhedron(list(self.constraints) + extra, self.dim)

    def affine_dim(self) -> int:
        """Dimension of the affine hull, via the implicit equalities."""
        vs, rs = self.vertices, self.rays
        eq = [a for a, b in self.constraints
              if all((dot_ql(a, v) - b).is_zero() for v in vs)
              and all(sum(x * y for x, y in zip(a, r)) == 0 for r in rs)]
        return self.dim - (rank_q(eq) if eq else 0)

    def __eq__(self, other):
        if not isinstance(other, LogPolyhedron):
            return NotImplemented
        if self.dim != other.dim:
            return False
        if self.is_empty() or other.is_empty():
            return self.is_empty() and other.is_empty()
        return set(self.vertices) == set(other.vertices) and set(self.rays) == set(other.rays)

    def __hash__(self):
        return hash((self.dim, frozenset(self.vertices), frozenset(self.rays)))

    def describe(self) -> dict:
        return {
            "vertices": [[str(c) for c in v] for v in self.vertices],
            "rays": [[str(c) for c in r] for r in self.rays],
        }

    def __repr__(self):
        if self.is_empty():
            return "LogPolyhedron(empty)"
        if self.dim == 1:
            lo = hi = None
            (v0,), *_ = self.vertices
            vals = [v[0] for v in self.vertices]
            lo, hi = min(vals), max(vals)
            left = "-inf" if (Fraction(-1),) in self.rays else str(lo)
            right = "+inf" if (Fraction(1),) in self.rays else str(hi)
            return f"[{left}, {right}]"
        vs = "; ".join("(" + ", ".join(map(str, v)) + ")" for v in self.vertices)
        rs = "; ".join("(" + ", ".join(map(str, r)) + ")" for r in self.rays)
        return f"conv[{vs}]" + (f" + cone[{rs}]" if rs else "")


# operations ----------------------------------------------------------------------

def supdifferential(f: PAConcave, x) -> LogPolyhedron:
    """Sup-differential of a roof-type f at a rational x of its domain.

    Uses the star of x in the induced subdivision: u belongs to it iff
    <u, z - x> >= f(z) - f(x) for every vertex z of a cell containing x.
    Outward directions of the domain stay unconstrained, which gives the
    negated normal cone at boundary points.
    """
    if f.is_metric:
        raise ValueError("supdifferential is taken of roof-type functions")
    x = qvec(x)
    if not f.domain.contains(x):
        raise ValueError(f"point {x} outside the domain")
    fx = f(x)
    vals = dict(f.hull.points)
    active = set(f.active_pieces(x))
    cons = []
    for k, cell in enumerate(f.cells):
        if k not in active:
            continue
        for z in cell.vertices:
            if z == x:
                continue
            t = vals.get(z)
            if t is None:
                t = f(z)
            cons.append((sub(z, x), t - fx))
    return LogPolyhedron(cons, f.ambient_dim)


def poly_intersect(P: LogPolyhedron, Q: LogPolyhedron):
    if P.dim != Q.dim:
        raise ValueError("dimension mismatch")
    R = LogPolyhedron(list(P.constraints) + list(Q.constraints), P.dim)
    return Empty if R.is_empty() else R


def minimal_face_containing(A: LogPolyhedron, B: LogPolyhedron) -> LogPolyhedron:
    for v in B.vertices:
        if not A.contains(v):
            raise ValueError("B is not contained in A")
    for r in B.rays:
        if not all(sum(x * y for x, y in zip(a, r)) >= 0 for a, _ in A.constraints):
            raise ValueError("B is not contained in A")
    b = B.ri_point()
    return A.with_equalities(A.tight(b))


def is_vertex(P: LogPolyhedron, p) -> bool:
    p = lsvec(p)
    if not P.contains(p):
        return False
    tight = [a for a, _ in P.tight(p)]
    return P.dim == 0 or (bool(tight) and rank_q(tight) == P.dim)


def minkowski_sum(P: LogPolyhedron, Q: LogPolyhedron) -> LogPolyhedron:
    if P.dim != Q.dim:
        raise ValueError("dimension mismatch")
    n = P.dim
    if P.is_empty() or Q.is_empty():
        return Empty
    normals = {a for a, _ in P.constraints} | {a for a, _ in Q.constraints}
    normals |= {tuple(Fraction(int(i == j)) * s for j in range(n)) for i in range(n) for s in (1, -1)}
    if n == 3:
        def edge_dirs(X):
            ds = set()
            for (a, _), (b, _) in combinations(X.constraints, 2):
                c = cross3(a, b)
                if any(c):
                    ds.add(primitive(c))
            return ds
        for d in edge_dirs(P):
            for e in edge_dirs(Q):
                c = cross3(d, e)
                if any(c):
                    normals.add(primitive(c))
                    normals.add(tuple(-x for x in primitive(c)))
    rays = list(P.rays) + list(Q.rays)
    cons = []
    for a in normals:
        if any(sum(x * y for x, y in zip(a, r)) < 0 for r in rays):
            continue
        off = exact_min([dot_ql(a, v) for v in P.vertices]) + exact_min([dot_ql(a, v) for v in Q.vertices])
        cons.append((a, off))
    return LogPolyhedron(cons, n)
