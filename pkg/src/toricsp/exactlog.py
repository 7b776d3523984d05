"""Exact scalars in the rational span of 1 and the prime logarithms.

A :class:`LogScalar` is ``c + sum_p a_p log p`` with rational ``c`` and
``a_p``. Prime logarithms are linearly independent over the rationals, so
zero testing is formal. Signs of nonzero elements are decided by a float
filter and, when that is inconclusive, by interval arithmetic on a
precision ladder (64, 128, 256, 512 bits by default).
"""
from __future__ import annotations

import math
import os
import re
import threading
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from numbers import Rational
from typing import Iterable, Mapping

import mpmath
from sympy import factorint, isprime

__all__ = [
    "LogScalar",
    "SignVerdict",
    "IndeterminateSignError",
    "ls",
    "log",
    "ls_arith",
    "ls_sign",
    "ls_to_float",
    "parse_logscalar",
    "to_fraction",
    "precision_cap",
    "ZERO",
    "ONE",
]

DEFAULT_CAP = 512
_LADDER_START = 64
_EPS = 2.0 ** -52


def precision_cap() -> int:
    """Cap of the precision ladder; ``TSP_PRECISION_BITS`` overrides it."""
    raw = os.environ.get("TSP_PRECISION_BITS")
    if raw:
        try:
            bits = int(raw)
        except ValueError:
            raise ValueError(f"TSP_PRECISION_BITS must be an integer, got {raw!r}")
        return max(bits, _LADDER_START)
    return DEFAULT_CAP


class IndeterminateSignError(ArithmeticError):
    """Sign of a formally nonzero LogScalar not resolved at the precision cap."""

    def __init__(self, value, bits):
        super().__init__(f"sign of {value} undecided at {bits} bits")
        self.value = value
        self.bits = bits


def to_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("bool is not a rational")
    if isinstance(x, (int, Rational)):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, LogScalar) and x.is_rational():
        return x.constant
    raise TypeError(f"expected a rational, got {type(x).__name__}: {x!r}")


class LogScalar:
    """Immutable ``constant + sum coeff_p * log p`` in canonical form."""

    __slots__ = ("constant", "_terms", "_hash", "_float")

    def __init__(self, constant=0, terms: Mapping[int, object] | Iterable | None = None):
        self.constant = to_fraction(constant)
        items = terms.items() if isinstance(terms, Mapping) else (terms or ())
        acc: dict[int, Fraction] = {}
        for p, a in items:
            p = int(p)
            a = to_fraction(a)
            if a:
                acc[p] = acc.get(p, Fraction(0)) + a
        self._terms = tuple(sorted((p, a) for p, a in acc.items() if a))
        self._hash = None
        self._float = None

    @classmethod
    def _raw(cls, constant: Fraction, terms: tuple) -> "LogScalar":
        obj = object.__new__(cls)
        obj.constant = constant
        obj._terms = terms
        obj._hash = None
        obj._float = None
        return obj

    @classmethod
    def coerce(cls, x) -> "LogScalar":
        if isinstance(x, LogScalar):
            return x
        if isinstance(x, str):
            return parse_logscalar(x)
        return cls._raw(to_fraction(x), ())

    @property
    def terms(self) -> dict[int, Fraction]:
        return dict(self._terms)

    def coeff(self, p: int) -> Fraction:
        for q, a in self._terms:
            if q == p:
                return a
        return Fraction(0)

    def primes(self) -> tuple[int, ...]:
        return tuple(p for p, _ in self._terms)

    def is_zero(self) -> bool:
        return not self.constant and not self._terms

    def is_rational(self) -> bool:
        return not self._terms

    # arithmetic -----------------------------------------------------------
    def _combine(self, other: "LogScalar", sign: int) -> "LogScalar":
        if not other._terms:
            return LogScalar._raw(self.constant + sign * other.constant, self._terms)
        if not self._terms and not self.constant:
            return other if sign == 1 else -other
        acc = dict(self._terms)
        for p, a in other._terms:
            acc[p] = acc.get(p, 0) + sign * a
        terms = tuple(sorted((p, a) for p, a in acc.items() if a))
        return LogScalar._raw(self.constant + sign * other.constant, terms)

    def __add__(self, other):
        try:
            other = LogScalar.coerce(other)
        except TypeError:
            return NotImplemented
        return self._combine(other, 1)

    __radd__ = __add__

    def __sub__(self, other):
        try:
            other = LogScalar.coerce(other)
        except TypeError:
            return NotImplemented
        return self._combine(other, -1)

    def __rsub__(self, other):
        try:
            other = LogScalar.coerce(other)
        except TypeError:
            return NotImplemented
        return other._combine(self, -1)

    def __neg__(self):
        return LogScalar._raw(-self.constant, tuple((p, -a) for p, a in self._terms))

    def __pos__(self):
        return self

    def scale(self, q) -> "LogScalar":
        if q == 1:
            return self
        q = to_fraction(q)
        if not q:
            return ZERO
        return LogScalar._raw(self.constant * q, tuple((p, a * q) for p, a in self._terms))

    def __mul__(self, other):
        if isinstance(other, LogScalar):
            if other.is_rational():
                return self.scale(other.constant)
            if self.is_rational():
                return other.scale(self.constant)
            raise TypeError("product of two irrational LogScalars leaves the log span")
        try:
            return self.scale(other)
        except TypeError:
            return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, LogScalar):
            if not other.is_rational():
                raise TypeError("division by an irrational LogScalar")
            other = other.constant
        try:
            q = to_fraction(other)
        except TypeError:
            return NotImplemented
        if not q:
            raise ZeroDivisionError("LogScalar division by zero")
        return self.scale(1 / q)

    # comparisons ------------------------------------------------------------
    def __eq__(self, other):
        if isinstance(other, LogScalar):
            return self.constant == other.constant and self._terms == other._terms
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return not self._terms and self.constant == other
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.constant, self._terms)) if self._terms else hash(self.constant)
        return self._hash

    def sign(self, max_bits: int | None = None) -> int:
        """-1, 0 or 1; raises IndeterminateSignError past the cap."""
        v = ls_sign(self, max_bits)
        if v.sign == "indeterminate":
            raise IndeterminateSignError(self, v.precision_used)
        return _SIGN_INT[v.sign]

    def __lt__(self, other):
        return (self - other).sign() < 0

    def __le__(self, other):
        return (self - other).sign() <= 0

    def __gt__(self, other):
        return (self - other).sign() > 0

    def __ge__(self, other):
        return (self - other).sign() >= 0

    def __abs__(self):
        return -self if self.sign() < 0 else self

    def __float__(self):
        if self._float is None:
            self._float = ls_to_float(self)
        return self._float

    def __bool__(self):
        return not self.is_zero()

    def __repr__(self):
        return f"LogScalar({str(self)!r})"

    def __str__(self):
        return format_logscalar(self)


_SIGN_INT = {"negative": -1, "zero": 0, "positive": 1}

ZERO = LogScalar()
ONE = LogScalar(1)


def ls(x) -> LogScalar:
    """Coerce ints, Fractions and text forms to a LogScalar."""
    return LogScalar.coerce(x)


def log(n, coeff=1) -> LogScalar:
    """``coeff * log(n)`` for a positive rational n, decomposed into prime logs."""
    q = to_fraction(n)
    if q <= 0:
        raise ValueError(f"log of non-positive rational {n}")
    c = to_fraction(coeff)
    terms: dict[int, Fraction] = {}
    for p, e in factorint(q.numerator).items():
        terms[p] = terms.get(p, 0) + c * e
    for p, e in factorint(q.denominator).items():
        terms[p] = terms.get(p, 0) - c * e
    return LogScalar(0, terms)


def ls_arith(a: LogScalar, b, op: str) -> LogScalar:
    """Coefficientwise add / sub / scale (b rational for scale)."""
    if op == "add":
        return ls(a) + ls(b)
    if op == "sub":
        return ls(a) - ls(b)
    if op in ("scale", "scale-by-rational"):
        return ls(a).scale(b)
    raise ValueError(f"unknown op {op!r}")


# sign determination -----------------------------------------------------------

@dataclass(frozen=True)
class SignVerdict:
    sign: str
    precision_used: int


_float_logs: dict[int, float] = {}


def _flog(p: int) -> float:
    v = _float_logs.get(p)
    if v is None:
        v = _float_logs[p] = math.log(p)
    return v


# mpmath's interval context keeps its precision globally, so evaluation is
# serialized; the caches below are filled lazily under the same lock.
_iv_lock = threading.Lock()


@lru_cache(maxsize=None)
def _iv_log(p: int, bits: int):
    mpmath.iv.prec = bits
    return mpmath.iv.log(p)


def _interval(a: LogScalar, bits: int):
    iv = mpmath.iv
    iv.prec = bits
    acc = iv.mpf(a.constant.numerator) / a.constant.denominator
    for p, c in a._terms:
        acc = acc + (iv.mpf(c.numerator) / c.denominator) * _iv_log(p, bits)
    iv.prec = bits
    return acc


def ls_sign(a: LogScalar, max_bits: int | None = None) -> SignVerdict:
    if max_bits is None:
        max_bits = precision_cap()
    if max_bits < _LADDER_START:
        raise ValueError("max_bits must be at least 64")
    a = ls(a)
    if a.is_zero():
        return SignVerdict("zero", 0)
    if not a._terms:
        return SignVerdict("positive" if a.constant > 0 else "negative", 0)
    # float filter: each term carries a few ulps of error
    total = float(a.constant)
    mag = abs(total)
    for p, c in a._terms:
        t = float(c) * _flog(p)
        total += t
        mag += abs(t)
    bound = 4.0 * (len(a._terms) + 4) * _EPS * mag
    if total > bound:
        return SignVerdict("positive", 53)
    if total < -bound:
        return SignVerdict("negative", 53)
    bits = _LADDER_START
    with _iv_lock:
        saved = mpmath.iv.prec
        try:
            while True:
                x = _interval(a, bits)
                if x.a > 0:
                    return SignVerdict("positive", bits)
                if x.b < 0:
                    return SignVerdict("negative", bits)
                if bits >= max_bits:
                    return SignVerdict("indeterminate", bits)
                bits = min(bits * 2, max_bits)
        finally:
            mpmath.iv.prec = saved


@lru_cache(maxsize=None)
def _mp_log(p: int):
    with mpmath.workprec(160):
        return mpmath.log(p)


def ls_to_float(a: LogScalar) -> float:
    a = ls(a)
    if not a._terms:
        return float(a.constant)
    with mpmath.workprec(160):
        acc = mpmath.mpf(a.constant.numerator) / a.constant.denominator
        for p, c in a._terms:
            acc += mpmath.mpf(c.numerator) / c.denominator * _mp_log(p)
        return float(acc)


# text form ------------------------------------------------------------------------

def _fmt_q(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def format_logscalar(a: LogScalar) -> str:
    parts: list[tuple[int, str]] = []
    if a.constant or not a._terms:
        parts.append((1 if a.constant >= 0 else -1, _fmt_q(abs(a.constant))))
    for p, c in a._terms:
        mag = abs(c)
        body = f"log({p})" if mag == 1 else f"{_fmt_q(mag)}*log({p})"
        parts.append((1 if c > 0 else -1, body))
    out = []
    for i, (s, body) in enumerate(parts):
        if i == 0:
            out.append(body if s > 0 else f"-{body}")
        else:
            out.append(f" + {body}" if s > 0 else f" - {body}")
    return "".join(out)


_NUM = r"\d+(?:\.\d+)?(?:/\d+)?"
_TERM = re.compile(
    rf"""\s*(?P<sign>[+-])?\s*
    (?:
        (?P<coef>{_NUM})?\s*\*?\s*log\(\s*(?P<arg>{_NUM})\s*\)(?:\s*/\s*(?P<div>\d+))?
      | (?P<const>{_NUM})
    )\s*""",
    re.VERBOSE,
)


def _q(text: str) -> Fraction:
    return Fraction(text)


def parse_logscalar(text: str) -> LogScalar:
    """Parse forms like ``"3/2 + 1/2*log(2) - log(3)"`` or ``"log(6)/2"``."""
    if not isinstance(text, str):
        return ls(text)
    s = text.strip()
    if not s:
        raise ValueError("empty LogScalar literal")
    pos = 0
    acc = ZERO
    first = True
    while pos < len(s):
        m = _TERM.match(s, pos)
        if not m or m.end() == pos:
            raise ValueError(f"cannot parse LogScalar {text!r} at offset {pos}")
        if not first and m.group("sign") is None:
            raise ValueError(f"missing operator in {text!r} at offset {pos}")
        sgn = -1 if m.group("sign") == "-" else 1
        if m.group("const") is not None:
            acc = acc + _q(m.group("const")) * sgn
        else:
            coef = _q(m.group("coef")) if m.group("coef") else Fraction(1)
            if m.group("div"):
                coef /= int(m.group("div"))
            acc = acc + log(_q(m.group("arg")), coef * sgn)
        pos = m.end()
        first = False
    return acc


def is_prime(p: int) -> bool:
    return bool(isprime(p))
