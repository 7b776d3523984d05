"""Small exact linear algebra: rational matrices, LogScalar right-hand sides."""
from __future__ import annotations

from fractions import Fraction
from math import gcd, lcm
from typing import Sequence

from ..exactlog import LogScalar, ZERO, ls

Q = Fraction


def qvec(v) -> tuple:
    return tuple(Fraction(x) if not isinstance(x, Fraction) else x for x in v)


def lsvec(v) -> tuple:
    return tuple(ls(x) for x in v)


def dot_q(a, b):
    return sum((x * y for x, y in zip(a, b)), Fraction(0))


def dot_ql(a, u) -> LogScalar:
    """<a, u> for rational a and LogScalar (or rational) u."""
    acc = ZERO
    for x, y in zip(a, u):
        if x:
            acc = acc + ls(y).scale(x)
    return acc


def dot_lq(a, x) -> LogScalar:
    return dot_ql(x, a)


def sub(a, b):
    return tuple(x - y for x, y in zip(a, b))


def add(a, b):
    return tuple(x + y for x, y in zip(a, b))


def scale(a, c):
    return tuple(x * c for x in a)


def det_q(rows) -> Fraction:
    m = [list(map(Fraction, r)) for r in rows]
    n = len(m)
    d = Fraction(1)
    for c in range(n):
        piv = next((r for r in range(c, n) if m[r][c] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != c:
            m[c], m[piv] = m[piv], m[c]
            d = -d
        d *= m[c][c]
        for r in range(c + 1, n):
            if m[r][c]:
                f = m[r][c] / m[c][c]
                for k in range(c, n):
                    m[r][k] -= f * m[c][k]
    return d


def rank_q(rows) -> int:
    if not rows:
        return 0
    return len(row_echelon(rows)[1])


def row_echelon(rows):
    """Reduced row echelon form; returns (rows, pivot columns)."""
    m = [list(map(Fraction, r)) for r in rows]
    if not m:
        return m, []
    ncol = len(m[0])
    pivots = []
    r = 0
    for c in range(ncol):
        piv = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        p = m[r][c]
        m[r] = [x / p for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c]:
                f = m[i][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m[:r], pivots


def nullspace_q(rows, n: int) -> list[tuple]:
    """Rational basis of {x : row . x = 0 for every row}."""
    if not rows:
        return [tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n)]
    red, piv = row_echelon(rows)
    free = [c for c in range(n) if c not in piv]
    basis = []
    for f in free:
        x = [Fraction(0)] * n
        x[f] = Fraction(1)
        for r, c in enumerate(piv):
            x[c] = -red[r][f]
        basis.append(tuple(x))
    return basis


def solve_q(A: Sequence[Sequence], b: Sequence) -> tuple | None:
    """Solve A x = b with A square rational, b rational or LogScalar.

    Returns None when A is singular. Entries of the result are LogScalars
    when b has any LogScalar entry, Fractions otherwise.
    """
    n = len(A)
    m = [list(map(Fraction, r)) for r in A]
    exact_logs = any(isinstance(x, LogScalar) and not x.is_rational() for x in b)
    rhs = [ls(x) if exact_logs else (x.constant if isinstance(x, LogScalar) else Fraction(x)) for x in b]
    for c in range(n):
        piv = next((r for r in range(c, n) if m[r][c] != 0), None)
        if piv is None:
            return None
        if piv != c:
            m[c], m[piv] = m[piv], m[c]
            rhs[c], rhs[piv] = rhs[piv], rhs[c]
        p = m[c][c]
        if p != 1:
            m[c] = [x / p for x in m[c]]
            rhs[c] = rhs[c] / p
        for r in range(n):
            if r != c and m[r][c]:
                f = m[r][c]
                m[r] = [x - f * y for x, y in zip(m[r], m[c])]
                rhs[r] = rhs[r] - rhs[c] * f
    return tuple(rhs)


def primitive(a) -> tuple:
    """Scale a nonzero rational vector to a primitive integer vector (same direction)."""
    a = qvec(a)
    den = 1
    for x in a:
        den = lcm(den, x.denominator)
    ints = [int(x * den) for x in a]
    g = 0
    for x in ints:
        g = gcd(g, abs(x))
    if g == 0:
        raise ValueError("zero vector has no primitive form")
    return tuple(Fraction(x // g) for x in ints)


def cross3(a, b):
    return (a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0])


def rational_direction(d) -> tuple | None:
    """Rational r with d = lambda * r for a LogScalar vector d, if one exists."""
    d = lsvec(d)
    if all(x.is_zero() for x in d):
        return None
    basis = sorted({p for x in d for p in x.primes()})
    # coefficient vector of each coordinate over {1} + primes
    cols = [[x.constant] + [x.coeff(p) for p in basis] for x in d]
    ref = next(c for c in cols if any(c))
    k = next(i for i, v in enumerate(ref) if v)
    r = []
    for c in cols:
        ratio = c[k] / ref[k]
        if any(c[i] != ratio * ref[i] for i in range(len(ref))):
            return None
        r.append(ratio)
    return primitive(r)
