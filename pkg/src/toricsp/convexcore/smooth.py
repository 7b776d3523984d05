"""Numeric path for smooth one-dimensional metrics (Fubini-Study and friends)."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "Smooth1DConcave",
    "fubini_study",
    "tabulated",
    "conjugate_point",
    "smooth_roof",
    "numeric_dual_1d",
    "NumericDual",
    "maximize_1d",
]


@dataclass(frozen=True)
class Smooth1DConcave:
    kind: str
    eval: Callable[[float], float] = field(compare=False)
    derivative: Callable[[float], float] = field(compare=False)
    slopes: tuple = (Fraction(0), Fraction(1))

    def __post_init__(self):
        a, b = self.slopes
        if not a < b:
            raise ValueError("asymptotic slopes must satisfy a < b")
        grid = np.linspace(-30.0, 30.0, 601)
        d = np.array([self.derivative(u) for u in grid])
        if np.any(np.diff(d) > 1e-12):
            raise ValueError("derivative is not nonincreasing on the sample grid")
        if d.min() < float(a) - 1e-12 or d.max() > float(b) + 1e-12:
            raise ValueError("derivative leaves the asymptotic slope range")

    def __call__(self, u: float) -> float:
        return self.eval(u)


def _fs_eval(u: float) -> float:
    # -1/2 log(1 + e^{-2u}) written to stay finite for large |u|
    if u > 0:
        return -0.5 * math.log1p(math.exp(-2.0 * u))
    return u - 0.5 * math.log1p(math.exp(2.0 * u))


def _fs_deriv(u: float) -> float:
    if u > 0:
        e = math.exp(-2.0 * u)
        return e / (1.0 + e)
    return 1.0 / (1.0 + math.exp(2.0 * u))


def fubini_study() -> Smooth1DConcave:
    """psi(u) = -1/2 log(1 + e^{-2u}) on P^1, slopes in [0, 1]."""
    return Smooth1DConcave("FubiniStudy", _fs_eval, _fs_deriv, (Fraction(0), Fraction(1)))


def tabulated(eval_fn, derivative_fn, slopes) -> Smooth1DConcave:
    a, b = slopes
    return Smooth1DConcave("Tabulated", eval_fn, derivative_fn, (Fraction(a), Fraction(b)))


def conjugate_point(psi: Smooth1DConcave, x: float, tol: float = 1e-13) -> float:
    """u* with psi'(u*) = x, by bisection on the nonincreasing derivative."""
    a, b = (float(s) for s in psi.slopes)
    if not a < x < b:
        raise ValueError("x must lie strictly inside the slope interval")
    lo, hi = -1.0, 1.0
    while psi.derivative(lo) < x and lo > -1e8:
        lo *= 2.0
    while psi.derivative(hi) > x and hi < 1e8:
        hi *= 2.0
    while hi - lo > tol * max(1.0, abs(lo), abs(hi)):
        mid = 0.5 * (lo + hi)
        if psi.derivative(mid) > x:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def smooth_roof(psi: Smooth1DConcave, x: float) -> float:
    """theta(x) = inf_u x u - psi(u); endpoints by their limits."""
    a, b = (float(s) for s in psi.slopes)
    if x < a - 1e-15 or x > b + 1e-15:
        raise ValueError("x outside the slope interval")
    if x <= a or x >= b:
        # the infimum is approached as u -> +inf (x = a) or u -> -inf (x = b)
        vals = []
        for big in (40.0, 80.0, 160.0):
            u = big if x <= a else -big
            vals.append(x * u - psi(u))
        return vals[-1]
    u = conjugate_point(psi, x)
    return x * u - psi(u)


def smooth_roof_slope(psi: Smooth1DConcave, x: float) -> float:
    return conjugate_point(psi, x)


@dataclass
class NumericDual:
    xs: np.ndarray
    thetas: np.ndarray
    max_value: float
    maximizer: float

    def __iter__(self):
        return iter(((self.xs, self.thetas), self.max_value, self.maximizer))


def _pa_slopes(pa_parts, x: float):
    """Left and right derivatives of a sum of 1-D roof-type functions at x."""
    left = right = 0.0
    for f in pa_parts:
        sl = np.array([float(m[0]) for m, _ in f.pieces])
        c = np.array([float(cc) for _, cc in f.pieces])
        vals = sl * x + c
        act = vals <= vals.min() + 1e-12 * (1.0 + np.abs(vals).max())
        left += sl[act].max()
        right += sl[act].min()
    return left, right


def maximize_1d(smooth_parts: Sequence[Smooth1DConcave], pa_parts=(), domain=None, tol: float = 1e-13):
    """Maximize sum(smooth roofs) + sum(PA roofs) on an interval by derivative bisection.

    Returns (max value, maximizer, left derivative, right derivative) at the
    maximizer.
    """
    if domain is None:
        lo = max(float(p.slopes[0]) for p in smooth_parts)
        hi = min(float(p.slopes[1]) for p in smooth_parts)
    else:
        lo, hi = (float(v) for v in domain)

    def derivs(x):
        l, r = _pa_slopes(pa_parts, x)
        for p in smooth_parts:
            a, b = (float(s) for s in p.slopes)
            if a < x < b:
                s = smooth_roof_slope(p, x)
                l += s
                r += s
            else:
                # infinite one-sided slope at the ends of the slope interval
                l += -math.inf if x >= b else math.inf
                r += math.inf if x <= a else -math.inf
        return l, r

    def value(x):
        v = sum(smooth_roof(p, x) for p in smooth_parts)
        for f in pa_parts:
            v += float(f.eval_float([[x]])[0])
        return v

    a, b = lo, hi
    l, r = derivs(a)
    if r <= 0:
        return value(a), a, l, r
    l, r = derivs(b)
    if l >= 0:
        return value(b), b, l, r
    while b - a > tol:
        m = 0.5 * (a + b)
        l, r = derivs(m)
        if r > 0:
            a = m
        elif l < 0:
            b = m
        else:
            return value(m), m, l, r
    m = 0.5 * (a + b)
    l, r = derivs(m)
    return value(m), m, l, r


def numeric_dual_1d(psi: Smooth1DConcave, x_grid_tol: float = 1e-13, samples: int = 101) -> NumericDual:
    """Sampled roof, its maximum and maximizer for a smooth 1-D metric."""
    a, b = (float(s) for s in psi.slopes)
    xs = np.linspace(a, b, samples)
    thetas = np.array([smooth_roof(psi, x) for x in xs])
    mx, xstar, _, _ = maximize_1d([psi], tol=x_grid_tol)
    return NumericDual(xs, thetas, mx, xstar)
