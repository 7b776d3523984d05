"""Discrete measures on N_R and Kantorovich-Rubinstein distances.

Atoms are either exact (LogScalar coordinates) or numeric (floats); weights
are positive rationals summing to one. Distances between exact measures are
exact LogScalars: the 1-D case by the monotone coupling, higher dimensions by
a transportation simplex whose pivots only touch rational flows.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cmp_to_key, cached_property
from typing import Mapping

import numpy as np

from .exactlog import LogScalar, ZERO, ls
from .convexcore.pa import exact_max
from .places import Place

__all__ = [
    "DiscreteMeasure",
    "AdelicMeasure",
    "CenteringError",
    "measure_stats",
    "w1_distance_1d",
    "w1_distance_lp",
    "adelic_kr_distance",
    "vec_norm",
    "NORMS",
]

NORMS = ("l1", "linf")
CENTER_TOL = 1e-9
LP_ATOM_CAP = 256


class CenteringError(ValueError):
    pass


def _is_exact_point(p) -> bool:
    return all(isinstance(c, (LogScalar, Fraction, int)) and not isinstance(c, bool) for c in p)


def vec_norm(u, norm: str = "l1"):
    """Norm of an exact (LogScalar) or float vector."""
    if all(isinstance(c, LogScalar) for c in u):
        absd = [abs(c) for c in u]
        if norm == "l1":
            return sum(absd, ZERO)
        return exact_max(absd) if absd else ZERO
    arr = np.abs(np.asarray([float(c) for c in u]))
    return float(arr.sum() if norm == "l1" else (arr.max() if len(arr) else 0.0))


def _sub(a, b):
    return tuple(x - y for x, y in zip(a, b))


class DiscreteMeasure:
    """Finitely supported probability measure with rational weights."""

    def __init__(self, atoms, norm: str = "l1"):
        if norm not in NORMS:
            raise ValueError(f"norm must be one of {NORMS}")
        self.norm = norm
        merged: dict[tuple, Fraction] = {}
        exact = None
        for point, w in atoms:
            w = Fraction(w)
            if w <= 0:
                raise ValueError("weights must be positive")
            pt_exact = _is_exact_point(point)
            if exact is None:
                exact = pt_exact
            elif exact != pt_exact:
                raise ValueError("cannot mix exact and float atoms")
            key = tuple(ls(c) for c in point) if pt_exact else tuple(float(c) for c in point)
            merged[key] = merged.get(key, Fraction(0)) + w
        if not merged:
            raise ValueError("a measure needs at least one atom")
        if sum(merged.values()) != 1:
            raise ValueError(f"weights sum to {sum(merged.values())}, not 1")
        dims = {len(p) for p in merged}
        if len(dims) != 1:
            raise ValueError("atoms of differing dimension")
        self.dim = dims.pop()
        self.exact = bool(exact)
        order = (lambda kv: tuple(float(c) for c in kv[0]))
        self.atoms = tuple(sorted(merged.items(), key=order))

    @classmethod
    def dirac(cls, u, norm: str = "l1") -> "DiscreteMeasure":
        return cls([(u, 1)], norm)

    @classmethod
    def zero(cls, n: int, norm: str = "l1") -> "DiscreteMeasure":
        return cls([((ZERO,) * n, 1)], norm)

    @property
    def support(self) -> list[tuple]:
        return [p for p, _ in self.atoms]

    @cached_property
    def expectation(self) -> tuple:
        if self.exact:
            acc = [ZERO] * self.dim
            for p, w in self.atoms:
                acc = [a + c.scale(w) for a, c in zip(acc, p)]
            return tuple(acc)
        acc = np.zeros(self.dim)
        for p, w in self.atoms:
            acc += float(w) * np.asarray(p)
        return tuple(float(x) for x in acc)

    def first_moment(self):
        if self.exact:
            return sum((vec_norm(p, self.norm).scale(w) for p, w in self.atoms), ZERO)
        return float(sum(float(w) * vec_norm(p, self.norm) for p, w in self.atoms))

    def integrate(self, f):
        """sum_i w_i f(u_i); exact when f returns LogScalars."""
        vals = [(f(p), w) for p, w in self.atoms]
        if all(isinstance(v, LogScalar) for v, _ in vals):
            return sum((v.scale(w) for v, w in vals), ZERO)
        return float(sum(float(w) * float(v) for v, w in vals))

    def translate(self, shift) -> "DiscreteMeasure":
        return DiscreteMeasure([(tuple(a + b for a, b in zip(p, shift)), w) for p, w in self.atoms], self.norm)

    def to_float(self) -> "DiscreteMeasure":
        if not self.exact:
            return self
        return DiscreteMeasure([(tuple(float(c) for c in p), w) for p, w in self.atoms], self.norm)

    def points_array(self) -> np.ndarray:
        return np.array([[float(c) for c in p] for p, _ in self.atoms])

    def weights_array(self) -> np.ndarray:
        return np.array([float(w) for _, w in self.atoms])

    def is_dirac_at_zero(self) -> bool:
        if len(self.atoms) != 1:
            return False
        (p, _), = self.atoms
        return all((c.is_zero() if isinstance(c, LogScalar) else c == 0.0) for c in p)

    def __eq__(self, other):
        return isinstance(other, DiscreteMeasure) and self.atoms == other.atoms and self.norm == other.norm

    def __hash__(self):
        return hash(self.atoms)

    def __repr__(self):
        body = ", ".join(f"{w}*delta({', '.join(map(str, p))})" for p, w in self.atoms)
        return f"DiscreteMeasure[{body}]"


def measure_stats(mu: DiscreteMeasure):
    return mu.expectation, mu.support, mu.first_moment()


# 1-D ---------------------------------------------------------------------------------

def _cmp_exact(a, b):
    return (a - b).sign()


def w1_distance_1d(mu: DiscreteMeasure, nu: DiscreteMeasure):
    """Integral of |F_mu - F_nu|, exact for exact atoms."""
    if mu.dim != 1 or nu.dim != 1:
        raise ValueError("w1_distance_1d needs one-dimensional measures")
    exact = mu.exact and nu.exact
    if not exact:
        mu, nu = mu.to_float(), nu.to_float()
    events = [(p[0], w, 0) for p, w in mu.atoms] + [(p[0], w, 1) for p, w in nu.atoms]
    if exact:
        events.sort(key=cmp_to_key(lambda a, b: _cmp_exact(a[0], b[0])))
    else:
        events.sort(key=lambda e: e[0])
    total = ZERO if exact else 0.0
    diff = Fraction(0)      # F_mu - F_nu just right of the current point
    for i, (x, w, side) in enumerate(events):
        diff += w if side == 0 else -w
        if i + 1 < len(events) and diff:
            gap = events[i + 1][0] - x
            if exact:
                total = total + gap.scale(abs(diff))
            else:
                total += float(abs(diff)) * gap
    return total


# transportation simplex ----------------------------------------------------------------

def _transport_exact(a: list[Fraction], b: list[Fraction], cost) -> LogScalar:
    """Exact transportation problem with rational marginals, LogScalar costs."""
    m, n = len(a), len(b)
    flow: dict[tuple, Fraction] = {}
    basis: list[tuple] = []
    i = j = 0
    sa, sb = list(a), list(b)
    # north-west corner start, keeping m + n - 1 basic cells
    while i < m and j < n:
        f = min(sa[i], sb[j])
        flow[(i, j)] = f
        basis.append((i, j))
        sa[i] -= f
        sb[j] -= f
        if i == m - 1 and j == n - 1:
            break
        if sa[i] == 0 and i < m - 1:
            i += 1
        else:
            j += 1
    cf = [[float(cost[i][j]) for j in range(n)] for i in range(m)]
    for _ in range(10000):
        # potentials u_i + v_j = c_ij on the basis tree
        u: list = [None] * m
        v: list = [None] * n
        u[0] = ZERO
        adj_r: dict[int, list] = {}
        adj_c: dict[int, list] = {}
        for (r, c) in basis:
            adj_r.setdefault(r, []).append(c)
            adj_c.setdefault(c, []).append(r)
        stack = [("r", 0)]
        while stack:
            kind, k = stack.pop()
            if kind == "r":
                for c in adj_r.get(k, []):
                    if v[c] is None:
                        v[c] = cost[k][c] - u[k]
                        stack.append(("c", c))
            else:
                for r in adj_c.get(k, []):
                    if u[r] is None:
                        u[r] = cost[r][k] - v[k]
                        stack.append(("r", r))
        uf = [float(x) for x in u]
        vf = [float(x) for x in v]
        bset = set(basis)
        entering = None
        for r in range(m):
            for c in range(n):
                if (r, c) in bset:
                    continue
                red = cf[r][c] - uf[r] - vf[c]
                if red > 1e-9:
                    continue
                if (cost[r][c] - u[r] - v[c]).sign() < 0:
                    entering = (r, c)
                    break
            if entering:
                break
        if entering is None:
            return sum((cost[r][c].scale(f) for (r, c), f in flow.items() if f), ZERO)
        cycle = _find_cycle(basis, entering)
        minus = cycle[1::2]
        theta = min(flow[cell] for cell in minus)
        leave = next(cell for cell in minus if flow[cell] == theta)
        for k, cell in enumerate(cycle):
            flow[cell] = flow.get(cell, Fraction(0)) + (theta if k % 2 == 0 else -theta)
        basis.remove(leave)
        flow.pop(leave, None)
        basis.append(entering)
    raise RuntimeError("transportation simplex did not converge")


def _find_cycle(basis, start):
    """Alternating row/column cycle through ``start`` in basis + {start}."""
    cells = set(basis) | {start}
    rows: dict[int, list] = {}
    cols: dict[int, list] = {}
    for (r, c) in cells:
        rows.setdefault(r, []).append((r, c))
        cols.setdefault(c, []).append((r, c))

    # depth-first search alternating horizontal and vertical moves
    def dfs(path, horizontal):
        cur = path[-1]
        nbrs = rows[cur[0]] if horizontal else cols[cur[1]]
        for nxt in nbrs:
            if nxt == cur:
                continue
            if nxt == start and len(path) >= 4 and not horizontal:
                return path
            if nxt in path:
                continue
            res = dfs(path + [nxt], not horizontal)
            if res:
                return res
        return None

    res = dfs([start], True)
    if res is None:
        raise RuntimeError("no pivot cycle found")
    return res


def _transport_float(a, b, C):
    from scipy.optimize import linprog

    m, n = len(a), len(b)
    A_eq = np.zeros((m + n, m * n))
    for i in range(m):
        A_eq[i, i * n:(i + 1) * n] = 1.0
    for j in range(n):
        A_eq[m + j, j::n] = 1.0
    b_eq = np.concatenate([a, b])
    res = linprog(C.ravel(), A_eq=A_eq, b_eq=b_eq, bounds=(0, None), method="highs")
    if res.status != 0:
        raise RuntimeError(f"transport LP failed: {res.message}")
    dual = float(b_eq @ res.eqlin.marginals)
    gap = abs(res.fun - dual)
    if gap > 1e-9 * max(1.0, abs(res.fun)):
        raise RuntimeError(f"transport LP duality gap {gap:.3g} above 1e-9")
    return float(res.fun)


def w1_distance_lp(mu: DiscreteMeasure, nu: DiscreteMeasure, norm: str | None = None):
    """W_1 by solving the transport LP (any dimension)."""
    if mu.dim != nu.dim:
        raise ValueError("dimension mismatch")
    if len(mu.atoms) > LP_ATOM_CAP or len(nu.atoms) > LP_ATOM_CAP:
        raise ValueError(f"supports above {LP_ATOM_CAP} atoms")
    norm = norm or mu.norm
    if mu.exact and nu.exact:
        cost = [[vec_norm(_sub(p, q), norm) for q, _ in nu.atoms] for p, _ in mu.atoms]
        return _transport_exact([w for _, w in mu.atoms], [w for _, w in nu.atoms], cost)
    P, Qp = mu.to_float().points_array(), nu.to_float().points_array()
    D = np.abs(P[:, None, :] - Qp[None, :, :])
    C = D.sum(axis=2) if norm == "l1" else D.max(axis=2)
    return _transport_float(mu.weights_array(), nu.weights_array(), C)


def w1_distance(mu: DiscreteMeasure, nu: DiscreteMeasure):
    if mu.dim == 1:
        return w1_distance_1d(mu, nu)
    return w1_distance_lp(mu, nu)


# adelic measures ----------------------------------------------------------------------

@dataclass(frozen=True)
class AdelicMeasure:
    """Place-indexed measures, delta_0 at unlisted places, centered."""

    entries: Mapping[Place, DiscreteMeasure]
    dim: int

    def __init__(self, entries, dim: int | None = None, check: bool = True):
        ent = {Place.parse(k): m for k, m in dict(entries).items()}
        if dim is None:
            if not ent:
                raise ValueError("dimension needed for an empty adelic measure")
            dim = next(iter(ent.values())).dim
        for v, m in ent.items():
            if m.dim != dim:
                raise ValueError(f"measure at {v} has dimension {m.dim}, expected {dim}")
        object.__setattr__(self, "entries", dict(sorted(ent.items(), key=lambda kv: kv[0].sort_key())))
        object.__setattr__(self, "dim", dim)
        if check:
            self.check_centered()

    def __getitem__(self, v) -> DiscreteMeasure:
        v = Place.parse(v)
        return self.entries.get(v) or DiscreteMeasure.zero(self.dim)

    @property
    def places(self) -> list[Place]:
        return list(self.entries)

    @property
    def exact(self) -> bool:
        return all(m.exact for m in self.entries.values())

    def total_expectation(self):
        if self.exact:
            acc = [ZERO] * self.dim
            for m in self.entries.values():
                acc = [a + e for a, e in zip(acc, m.expectation)]
            return tuple(acc)
        acc = np.zeros(self.dim)
        for m in self.entries.values():
            acc += np.asarray([float(c) for c in m.expectation])
        return tuple(float(x) for x in acc)

    def check_centered(self):
        tot = self.total_expectation()
        if self.exact:
            if any(not c.is_zero() for c in tot):
                raise CenteringError(f"sum of expectations is {tuple(map(str, tot))}, not 0")
        elif max((abs(c) for c in tot), default=0.0) > CENTER_TOL:
            raise CenteringError(f"sum of expectations {tot} exceeds tolerance {CENTER_TOL}")

    def __eq__(self, other):
        return isinstance(other, AdelicMeasure) and self.entries == other.entries and self.dim == other.dim

    def __hash__(self):
        return hash((self.dim, tuple(self.entries.items())))


def adelic_kr_distance(nu: AdelicMeasure, nu2: AdelicMeasure):
    """sum_v W_1(nu_v, nu'_v) over the places where either is non-trivial."""
    if nu.dim != nu2.dim:
        raise ValueError("dimension mismatch")
    places = sorted(set(nu.places) | set(nu2.places), key=lambda v: v.sort_key())
    exact = nu.exact and nu2.exact
    total = ZERO if exact else 0.0
    for v in places:
        d = w1_distance(nu[v], nu2[v])
        total = total + d if exact else total + float(d)
    return total
