"""Algebraic point families with closed-form Galois-orbit modulus data.

A family never enumerates field embeddings.  It only knows the v-adic
modulus measure nu_{p,v} = (val_v)_* mu_{p,v}, which is all the height
formula h(p) = eta(nu_p) needs.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import gcd

import numpy as np
from sympy import factorint, totient

from .exactlog import LogScalar, ZERO
from .places import INF, Place, val
from .transport import AdelicMeasure, DiscreteMeasure, adelic_kr_distance

__all__ = [
    "RootsOfUnity",
    "TorsionTranslate",
    "ScaledRadical",
    "QuadraticCyclotomic",
    "MonomialImage",
    "OrbitModulus",
    "orbit_modulus",
    "orbit_measure",
    "height",
    "product_formula_residual",
    "corollary3_check",
    "weyl_sum",
    "ramanujan_sum",
    "newton_polygon_units",
    "kr_decay_table",
]


def primitive_roots(l: int) -> np.ndarray:
    """exp(2 pi i k / l) for gcd(k, l) = 1."""
    ks = np.array([k for k in range(1, l + 1) if gcd(k, l) == 1], dtype=float)
    return np.exp(2j * np.pi * ks / l)


# families -------------------------------------------------------------------------

@dataclass(frozen=True)
class RootsOfUnity:
    """p_l = (omega_l, ..., omega_l)."""
    n: int = 1

    kind = "roots-of-unity"

    @property
    def dim(self):
        return self.n

    def places(self, l):
        return []

    def min_level(self):
        return 1


@dataclass(frozen=True)
class TorsionTranslate:
    """p_l = omega_l * alpha^r, coordinatewise."""
    alpha: tuple
    r: Fraction = Fraction(1)

    kind = "torsion-translate"

    def __post_init__(self):
        object.__setattr__(self, "alpha", tuple(Fraction(a) for a in self.alpha))
        object.__setattr__(self, "r", Fraction(self.r))
        if any(a == 0 for a in self.alpha):
            raise ValueError("alpha must have nonzero coordinates")

    @property
    def dim(self):
        return len(self.alpha)

    def places(self, l):
        ps = set()
        for a in self.alpha:
            ps |= set(factorint(a.numerator)) | set(factorint(a.denominator))
        ps.discard(1)
        return [INF] + [Place(p) for p in sorted(ps)]

    def min_level(self):
        return 1


@dataclass(frozen=True)
class ScaledRadical:
    """q_l = 2 * a^(-1/r) * omega_l on the one-dimensional torus."""
    a: int
    r: int

    kind = "scaled-radical"

    def __post_init__(self):
        if self.r < 1:
            raise ValueError("r must be a positive integer")
        if len(factorint(self.a)) != 1 or self.a < 2 or sum(factorint(self.a).values()) != 1:
            raise ValueError("a must be prime")

    dim = 1

    def places(self, l):
        return sorted({INF, Place(2), Place(self.a)}, key=lambda v: v.sort_key())

    def min_level(self):
        return 1


@dataclass(frozen=True)
class QuadraticCyclotomic:
    """p_l = (z_1, z_2) with z^2 + z + omega_l = 0 and z_2 = omega_l / z_1."""

    kind = "quadratic-cyclotomic"
    dim = 2

    def places(self, l):
        return [INF]

    def min_level(self):
        return 3


@dataclass(frozen=True)
class MonomialImage:
    """Points whose valuation vectors are M applied to those of a base family.

    Used for the curve of the Bogomolov counterexample: val(q) = L^{-1} val(iota(q)).
    """
    base: object
    matrix: tuple          # rows of a rational (n x base.dim) matrix

    kind = "monomial-image"

    def __post_init__(self):
        object.__setattr__(self, "matrix", tuple(tuple(Fraction(x) for x in row) for row in self.matrix))

    @property
    def dim(self):
        return len(self.matrix)

    def places(self, l):
        return self.base.places(l)

    def min_level(self):
        return self.base.min_level()


# orbit moduli ------------------------------------------------------------------------

@dataclass(frozen=True)
class OrbitModulus:
    place: Place
    measure: DiscreteMeasure
    exactness: object          # "exact" or ("numeric", tol)


@lru_cache(maxsize=512)
def _qc_atoms(l: int):
    w = primitive_roots(l)
    s = np.sqrt(1 - 4 * w + 0j)
    z1 = np.concatenate([(-1 + s) / 2, (-1 - s) / 2])
    ww = np.concatenate([w, w])
    z2 = ww / z1
    return z1, z2


def orbit_modulus(f, l: int, v) -> OrbitModulus:
    v = Place.parse(v)
    if l < f.min_level():
        raise ValueError(f"level l={l} below the family minimum {f.min_level()}")
    n = f.dim
    if isinstance(f, RootsOfUnity):
        return OrbitModulus(v, DiscreteMeasure.zero(n), "exact")
    if isinstance(f, TorsionTranslate):
        u = tuple(val(a, v).scale(f.r) for a in f.alpha)
        return OrbitModulus(v, DiscreteMeasure.dirac(u), "exact")
    if isinstance(f, ScaledRadical):
        # 2 * a^(-1/r): val_v is additive and omega_l is a unit everywhere
        u = val(2, v) - val(f.a, v).scale(Fraction(1, f.r))
        return OrbitModulus(v, DiscreteMeasure.dirac((u,)), "exact")
    if isinstance(f, QuadraticCyclotomic):
        if not v.is_archimedean:
            # Newton polygon of z^2 + z + omega: constant term a root of unity,
            # middle coefficient 1, so every slope is 0 and both roots are units
            return OrbitModulus(v, DiscreteMeasure.zero(2), "exact")
        z1, z2 = _qc_atoms(l)
        x = np.stack([-np.log(np.abs(z1)), -np.log(np.abs(z2))], axis=1)
        w = Fraction(1, len(x))
        return OrbitModulus(v, DiscreteMeasure([(tuple(p), w) for p in x.tolist()]), ("numeric", 1e-12))
    if isinstance(f, MonomialImage):
        base = orbit_modulus(f.base, l, v)
        M = f.matrix
        atoms = []
        for p, w in base.measure.atoms:
            if base.exactness == "exact":
                q = tuple(sum((c.scale(m) for m, c in zip(row, p)), ZERO) for row in M)
            else:
                q = tuple(float(sum(float(m) * c for m, c in zip(row, p))) for row in M)
            atoms.append((q, w))
        return OrbitModulus(v, DiscreteMeasure(atoms), base.exactness)
    raise TypeError(f"unknown family {f!r}")


def orbit_measure(f, l: int) -> AdelicMeasure:
    """The adelic modulus measure of p_l (delta_0 away from f.places(l))."""
    ent = {v: orbit_modulus(f, l, v).measure for v in f.places(l)}
    ent = {v: m for v, m in ent.items() if not m.is_dirac_at_zero()}
    return AdelicMeasure(ent, f.dim)


def height(d, f, l: int):
    """h_D(p_l) = eta_D(nu_{p_l}); exact when every modulus is exact."""
    from .adelic import eta

    if f.dim != d.dim:
        raise ValueError("family and divisor live in different tori")
    return eta(d, orbit_measure(f, l))


def product_formula_residual(f, l: int) -> float:
    nu = orbit_measure(f, l)
    tot = nu.total_expectation()
    if nu.exact:
        if any(not c.is_zero() for c in tot):
            raise AssertionError("exact family violates the product formula")
        return 0.0
    return float(sum(abs(c) for c in tot))


def _in_set(S, p, tol=None) -> bool:
    from . import adelic
    from .adelic import NumInterval

    tol = adelic.NUM_TOL if tol is None else tol

    if isinstance(S, NumInterval):
        return S.contains(float(p[0]), tol)
    if all(isinstance(c, LogScalar) for c in p):
        return S.contains(p)
    return S.contains_float(p, tol)


def corollary3_check(d, f, l: int, detail: bool = False):
    """supp(nu_v) in F_v and E[nu_v] in B_v at every place."""
    from .adelic import DEFAULT, analyze

    rep = analyze(d)
    nu = orbit_measure(f, l)
    places = sorted(set(nu.places) | set(d.metrics), key=lambda v: v.sort_key())
    rows = {}
    for v in places + [DEFAULT]:
        mu = DiscreteMeasure.zero(d.dim) if v is DEFAULT else nu[v]
        sets = rep.abf.get(v, rep.abf[DEFAULT])
        supp_ok = all(_in_set(sets.F, p) for p in mu.support)
        mean_ok = _in_set(sets.B, mu.expectation)
        rows[str(v)] = (supp_ok, mean_ok)
    ok = all(a and b for a, b in rows.values())
    return (ok, rows) if detail else ok


# angular diagnostics ------------------------------------------------------------------------

def ramanujan_sum(l: int, m: int) -> int:
    """c_l(m) = sum over d | gcd(l, m) of mu(l/d) d."""
    from sympy import divisors
    from sympy.functions.combinatorial.numbers import mobius

    g = gcd(l, m)
    return int(sum(mobius(l // dd) * dd for dd in divisors(g)))


def weyl_sum(f, l: int, m) -> float:
    """|mean over the Archimedean orbit of chi^m(q)/|chi^m(q)||."""
    m = (m,) if isinstance(m, int) else tuple(int(x) for x in m)
    if not any(m):
        raise ValueError("m must be nonzero")
    if isinstance(f, (RootsOfUnity, TorsionTranslate, ScaledRadical)):
        # the constant part has a fixed phase, so only omega_l^(sum m) matters
        if len(m) != f.dim:
            raise ValueError("character dimension differs from the family")
        return abs(ramanujan_sum(l, sum(m))) / int(totient(l))
    if isinstance(f, QuadraticCyclotomic):
        z1, z2 = _qc_atoms(l)
        chi = z1 ** m[0] * z2 ** m[1]
        return float(abs(np.mean(chi / np.abs(chi))))
    raise TypeError(f"no Weyl sum for {f!r}")


# finite-place certificate ----------------------------------------------------------------------

def _norm_polynomial(l: int):
    """prod over primitive omega of (z^2 + z + omega), as an integer polynomial."""
    from sympy import Poly, cyclotomic_poly, resultant, symbols

    z, w = symbols("z w")
    r = resultant(cyclotomic_poly(l, w), z ** 2 + z + w, w)
    return Poly(r, z)


def newton_polygon_units(l: int, p: int) -> bool:
    """All roots of the norm polynomial are p-adic units (exact Newton polygon test).

    The Newton polygon is flat iff the end coefficients have valuation 0 and
    the others are p-integral, which the integer coefficients guarantee.
    """
    coeffs = [int(c) for c in _norm_polynomial(l).all_coeffs()]
    if coeffs[0] % p == 0 or coeffs[-1] % p == 0:
        return False
    return True


def kr_decay_table(d, f, levels):
    """Adelic KR distance from nu_{p_l} to (delta_{u_v})_v for the critical point u.

    When the family lives in a torus of different dimension the zero critical
    point is read in the family's torus (u = 0 has a canonical image there).
    """
    from .adelic import DEFAULT, is_monocritical

    mono, crit = is_monocritical(d)
    if not mono:
        raise ValueError("decay tables need a monocritical divisor")
    rows = []
    for l in levels:
        nu = orbit_measure(f, l)
        ent = {}
        for v, u in crit.items():
            if v is DEFAULT:
                continue
            if f.dim != d.dim:
                if any(not (c.is_zero() if isinstance(c, LogScalar) else c == 0) for c in u):
                    raise ValueError("nonzero critical point cannot be transported across dimensions")
                u = (ZERO,) * f.dim
            ent[v] = DiscreteMeasure.dirac(u)
        target = AdelicMeasure(ent, f.dim)
        rows.append((l, float(adelic_kr_distance(nu, target))))
    return rows
