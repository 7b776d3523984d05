"""Potential theory on the projective line over Q.

Capacities are returned as exact rationals (their logarithms as LogScalars).
Equilibrium measures are only represented through closed forms: the arcsine
law on intervals, the uniform law on circles and the Gauss point of a ball.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

import numpy as np
from scipy.integrate import quad

from .exactlog import LogScalar, ZERO, log
from .places import INF, Place, val

__all__ = [
    "Interval",
    "Disc",
    "NonArchBall",
    "UnitBall",
    "AdelicSet",
    "local_capacity",
    "log_capacity",
    "global_capacity",
    "pairwise_energy",
    "leja_points",
    "equilibrium_pushforward",
    "Pushforward",
    "theorem13_check",
    "prop8_window",
    "Prop8Window",
]


# plane sets ------------------------------------------------------------------------

@dataclass(frozen=True)
class Interval:
    """Real segment [a, b] at the Archimedean place."""
    a: Fraction
    b: Fraction

    def __post_init__(self):
        object.__setattr__(self, "a", Fraction(self.a))
        object.__setattr__(self, "b", Fraction(self.b))
        if not self.a < self.b:
            raise ValueError("interval needs a < b")

    archimedean = True


@dataclass(frozen=True)
class Disc:
    """Closed disc |z - center| <= radius at the Archimedean place."""
    center: Fraction
    radius: Fraction

    def __post_init__(self):
        object.__setattr__(self, "center", Fraction(self.center))
        object.__setattr__(self, "radius", Fraction(self.radius))
        if self.radius <= 0:
            raise ValueError("radius must be positive")

    archimedean = True


@dataclass(frozen=True)
class NonArchBall:
    """Closed ball |z - center|_v <= radius in C_v."""
    center: Fraction
    radius: Fraction

    def __post_init__(self):
        object.__setattr__(self, "center", Fraction(self.center))
        object.__setattr__(self, "radius", Fraction(self.radius))
        if self.radius <= 0:
            raise ValueError("radius must be positive")

    archimedean = False


@dataclass(frozen=True)
class UnitBall:
    """O_v at a finite place, the closed unit disc at infinity."""
    archimedean = None


PlaneSet = (Interval, Disc, NonArchBall, UnitBall)


class AdelicSet:
    """Place-indexed sets, UnitBall at every unlisted place."""

    def __init__(self, entries: Mapping | None = None):
        ent = {}
        for v, s in (entries or {}).items():
            v = Place.parse(v)
            if not isinstance(s, PlaneSet):
                raise TypeError(f"unsupported set {s!r}")
            if s.archimedean is not None and s.archimedean != v.is_archimedean:
                raise ValueError(f"set {s!r} does not match the place {v}")
            ent[v] = s
        self.entries = dict(sorted(ent.items(), key=lambda kv: kv[0].sort_key()))

    def __getitem__(self, v):
        return self.entries.get(Place.parse(v), UnitBall())

    @property
    def places(self):
        return list(self.entries)

    def describe(self) -> dict:
        out = {}
        for v, s in self.entries.items():
            if isinstance(s, Interval):
                out[str(v)] = {"interval": [str(s.a), str(s.b)]}
            elif isinstance(s, Disc):
                out[str(v)] = {"disc": {"center": str(s.center), "radius": str(s.radius)}}
            elif isinstance(s, NonArchBall):
                out[str(v)] = {"ball": {"center": str(s.center), "radius": str(s.radius)}}
            else:
                out[str(v)] = {"unit_ball": True}
        return out

    def __repr__(self):
        return f"AdelicSet({self.entries})"


# capacities ----------------------------------------------------------------------------

def local_capacity(s) -> Fraction:
    if isinstance(s, Interval):
        return (s.b - s.a) / 4
    if isinstance(s, (Disc, NonArchBall)):
        return s.radius
    if isinstance(s, UnitBall):
        return Fraction(1)
    raise TypeError(f"unsupported shape {s!r}")


def log_capacity(s) -> LogScalar:
    """Negated Robin constant, log cap(s), as an exact LogScalar."""
    return log(local_capacity(s))


def global_capacity(E: AdelicSet) -> Fraction:
    out = Fraction(1)
    for s in E.entries.values():
        out *= local_capacity(s)
    return out


# discrete energy and Leja points ----------------------------------------------------------

def pairwise_energy(points) -> float:
    """Mean of log|q - q'| over ordered pairs of distinct indices."""
    z = np.asarray(points, dtype=complex).ravel()
    n = len(z)
    if n < 2:
        raise ValueError("need at least two points")
    diff = np.abs(z[:, None] - z[None, :])
    off = ~np.eye(n, dtype=bool)
    if np.any(diff[off] == 0):
        raise ValueError("coincident points")
    return float(np.log(diff[off]).sum() / (n * (n - 1)))


def _grid(s, size):
    if isinstance(s, Interval):
        return np.linspace(float(s.a), float(s.b), size).astype(complex)
    if isinstance(s, Disc):
        # Leja points of a disc lie on its boundary circle (maximum principle)
        t = np.arange(size) * (2 * np.pi / size)
        return float(s.center) + float(s.radius) * np.exp(1j * t)
    raise TypeError("Leja points are generated for intervals and discs")


def leja_points(s, N: int, grid: int = 10_000) -> np.ndarray:
    """Greedy Leja sequence on a grid discretization of s."""
    if N < 2:
        raise ValueError("N must be at least 2")
    G = _grid(s, grid)
    if N > len(G):
        raise ValueError("grid too coarse for N points")
    first = int(np.argmax(np.abs(G)))
    chosen = [first]
    acc = np.zeros(len(G))
    with np.errstate(divide="ignore"):
        for _ in range(N - 1):
            acc += np.log(np.abs(G - G[chosen[-1]]))
            acc[chosen] = -np.inf
            chosen.append(int(np.argmax(acc)))
    return G[chosen]


# equilibrium pushforwards ---------------------------------------------------------------------

@dataclass(frozen=True)
class Pushforward:
    """Expectation and support of val_* rho_E (support may be unbounded above)."""
    expectation: object        # float, or LogScalar when exact
    support: tuple             # (lo, hi), floats or LogScalars; hi may be inf
    exact: bool
    method: str


def _interval_quadrature(a: float, b: float) -> float:
    # E[-log|x|] under the arcsine law on [a, b], x = m + h cos t
    m, h = 0.5 * (a + b), 0.5 * (b - a)
    pts = []
    if abs(m) < h:
        pts = [math.acos(-m / h)]
    f = lambda t: math.log(abs(m + h * math.cos(t)))
    val_, _ = quad(f, 0.0, math.pi, points=pts or None, limit=200, epsabs=1e-13, epsrel=1e-13)
    return -val_ / math.pi


def _disc_quadrature(c: float, r: float) -> float:
    f = lambda t: math.log(abs(c + r * complex(math.cos(t), math.sin(t))))
    pts = None
    if abs(abs(c) - r) < 1e-15:
        raise ValueError("0 lies on the circle")
    val_, _ = quad(f, 0.0, 2 * math.pi, limit=200, epsabs=1e-13, epsrel=1e-13)
    return -val_ / (2 * math.pi)


def equilibrium_pushforward(s, v: Place | None = None, check: bool = True) -> Pushforward:
    """Expectation and support of the pushforward of rho_s under val_v."""
    if isinstance(s, UnitBall):
        return Pushforward(ZERO, (ZERO, ZERO), True, "closed form")
    if isinstance(s, Interval):
        a, b = s.a, s.b
        if a == 0 or b == 0:
            raise ValueError("0 is an endpoint of the interval; the potential at 0 is ambiguous")
        lo = -math.log(float(max(abs(a), abs(b))))
        if a < 0 < b:
            # equilibrium potential equals log cap on the set, in particular at 0
            e = -log_capacity(s)
            if check:
                q = _interval_quadrature(float(a), float(b))
                if abs(q - float(e)) > 1e-8:
                    raise ArithmeticError(f"quadrature {q} disagrees with closed form {float(e)}")
            return Pushforward(e, (lo, math.inf), True, "closed form")
        hi = -math.log(float(min(abs(a), abs(b)))) + 0.0
        return Pushforward(_interval_quadrature(float(a), float(b)), (lo, hi), False, "quadrature")
    if isinstance(s, Disc):
        c, r = abs(s.center), s.radius
        if c == r:
            raise ValueError("0 lies on the boundary circle")
        # Jensen: mean of log|c + r e^{it}| is log max(|c|, r)
        e = -log(max(c, r))
        if check:
            q = _disc_quadrature(float(s.center), float(r))
            if abs(q - float(e)) > 1e-8:
                raise ArithmeticError(f"quadrature {q} disagrees with Jensen {float(e)}")
        lo = -math.log(float(c + r))
        hi = math.inf if c == r else -math.log(float(abs(c - r)))
        return Pushforward(e, (lo, hi), True, "closed form")
    if isinstance(s, NonArchBall):
        if v is None or v.is_archimedean:
            raise ValueError("a non-Archimedean ball needs its finite place")
        # rho is the Dirac mass at the Gauss point of the ball, where |z| = max(|c|_v, r)
        vc = val(s.center, v) if s.center != 0 else None
        vr = -log(s.radius)
        u = vr if vc is None else (vr if vc >= vr else vc)
        return Pushforward(u, (u, u), True, "closed form")
    raise TypeError(f"unsupported shape {s!r}")


# Theorem 13 -----------------------------------------------------------------------------------

def _within(S, x, tol):
    from .adelic import NumInterval

    if isinstance(S, NumInterval):
        return S.contains(float(x), tol)
    if isinstance(x, LogScalar):
        return S.contains((x,))
    return S.contains_float((x,), tol)


def _interval_in(S, lo, hi, tol) -> bool:
    """[lo, hi] (hi possibly inf) contained in the one-dimensional set S."""
    from .adelic import NumInterval

    if isinstance(S, NumInterval):
        return S.lo - tol <= float(lo) and float(hi) <= S.hi + tol
    # S has rational normals +-1; check each constraint on both ends
    for a, b in S.constraints:
        s = a[0]
        end = hi if s < 0 else lo
        if isinstance(end, float) and math.isinf(end):
            return False
        if isinstance(end, LogScalar) and isinstance(b, LogScalar):
            if (end.scale(s) - b).sign() < 0:
                return False
        elif float(s) * float(end) - float(b) < -tol:
            return False
    return True


def theorem13_check(d, E: AdelicSet, tol: float = 1e-9) -> dict:
    """Per-condition verdicts for the Theorem 13 hypotheses on P^1."""
    from .adelic import DEFAULT, analyze

    if d.dim != 1:
        raise ValueError("Theorem 13 concerns the projective line")
    rep = analyze(d)
    cap = global_capacity(E)
    places = sorted(set(E.places) | set(d.metrics) | {INF}, key=lambda v: v.sort_key())
    rows = {}
    total_exact = ZERO
    total_float = 0.0
    exact = True
    for v in places + [DEFAULT]:
        s = UnitBall() if v is DEFAULT else E[v]
        pf = equilibrium_pushforward(s, None if v is DEFAULT else v)
        sets = rep.abf.get(v, rep.abf[DEFAULT])
        supp = _interval_in(sets.F, pf.support[0], pf.support[1], tol)
        mean = _within(sets.B, pf.expectation, tol)
        rows[str(v)] = {"support_in_F": supp, "expectation_in_B": mean,
                        "expectation": pf.expectation, "support": pf.support}
        if v is DEFAULT:
            continue
        if isinstance(pf.expectation, LogScalar) and exact:
            total_exact = total_exact + pf.expectation
        else:
            exact = False
        total_float += float(pf.expectation)
    centered = total_exact.is_zero() if exact else abs(total_float) <= tol
    res = {
        "capacity": cap,
        "capacity_one": cap == 1,
        "places": rows,
        "centered": centered,
        "fekete_szego": "existence guaranteed by Fekete-Szego" if cap >= 1 else "capacity below 1",
    }
    res["passed"] = res["capacity_one"] and centered and all(
        r["support_in_F"] and r["expectation_in_B"] for r in rows.values())
    return res


# Prop. 8 construction -----------------------------------------------------------------------------

@dataclass
class Prop8Window:
    c: Fraction
    delta: float
    delta_exact: LogScalar | None
    sets: AdelicSet
    window: tuple
    capacity: Fraction
    samples_ok: dict


def _sqrt_fraction(q: Fraction):
    n, d = q.numerator, q.denominator
    rn, rd = math.isqrt(n), math.isqrt(d)
    if rn * rn == n and rd * rd == d:
        return Fraction(rn, rd)
    return None


def prop8_window(c, v0="inf", v="2", samples: int = 1000, seed: int = 0) -> Prop8Window:
    """delta = log(c + sqrt(c^2 - 1)), the three-tier adelic set and sample checks."""
    c = Fraction(c)
    if c <= 1:
        raise ValueError("c must exceed 1")
    v0, v = Place.parse(v0), Place.parse(v)
    if v0 == v:
        raise ValueError("v0 and v must differ")
    root = _sqrt_fraction(c * c - 1)
    delta_exact = log(c + root) if root is not None else None
    delta = math.log(float(c) + math.sqrt(float(c) ** 2 - 1.0))
    ent = {}
    ent[v0] = Interval(-2 * c, 2 * c) if v0.is_archimedean else NonArchBall(2, c)
    ent[v] = Interval(-2 / c, 2 / c) if v.is_archimedean else NonArchBall(2, 1 / c)
    if not v0.is_archimedean and not v.is_archimedean:
        ent[INF] = Interval(-2, 2)
    E = AdelicSet(ent)
    rng = np.random.default_rng(seed)
    ok = {}
    tol = 1e-9
    for w, s in E.entries.items():
        if w.is_archimedean:
            # boundary samples y in E_w, z solves z^2 - y z + 1 = 0
            y = rng.uniform(float(s.a), float(s.b), samples)
            disc = np.sqrt(y.astype(complex) ** 2 - 4)
            z = np.concatenate([(y + disc) / 2, (y - disc) / 2])
            vals = -np.log(np.abs(z))
            if w == v0:
                ok[str(w)] = bool(np.all(np.abs(vals) <= delta + tol))
            else:
                ok[str(w)] = bool(np.all(np.abs(np.abs(z) - 1) <= tol))
        else:
            # rational samples y in the ball; Newton polygon of z^2 - y z + 1
            p = w.p
            scale = _ball_scale(p, s.radius)
            good = True
            for _ in range(samples):
                den = int(rng.integers(1, 50))
                while den % p == 0:
                    den += 1
                y = s.center + scale * Fraction(int(rng.integers(-50, 51)), den)
                if y == 0:
                    continue
                vy = val(y, w)
                # roots have valuations +-val(y) when |y|_p > 1, else both are units
                mag = -vy if vy.sign() < 0 else ZERO
                bound = delta if w == v0 else 0.0
                if float(mag) > bound + tol:
                    good = False
                    break
            ok[str(w)] = good
    win = (-delta_exact, delta_exact) if delta_exact is not None else (-delta, delta)
    return Prop8Window(c, delta, delta_exact, E, win, global_capacity(E), ok)


def _ball_scale(p: int, r: Fraction) -> Fraction:
    """p^k for the least integer k with |p^k|_p = p^(-k) <= r."""
    k = 0
    while Fraction(1, 1) / Fraction(p) ** k > r:
        k += 1
    while k > -64 and Fraction(1, 1) / Fraction(p) ** (k - 1) <= r:
        k -= 1
    return Fraction(p) ** k
