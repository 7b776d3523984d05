"""Places of Q: the Archimedean one and one per prime."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .exactlog import LogScalar, ONE, is_prime, log

__all__ = ["Place", "INF", "val"]


@dataclass(frozen=True)
class Place:
    p: int | None = None   # None is the Archimedean place

    def __post_init__(self):
        if self.p is not None and not is_prime(self.p):
            raise ValueError(f"{self.p} is not prime")

    @classmethod
    def parse(cls, text) -> "Place":
        if isinstance(text, Place):
            return text
        if isinstance(text, int):
            return cls(text)
        t = str(text).strip().lower()
        if t in ("inf", "infinity", "oo", "∞", "archimedean"):
            return cls(None)
        try:
            return cls(int(t))
        except ValueError:
            raise ValueError(f"unknown place {text!r}") from None

    @property
    def is_archimedean(self) -> bool:
        return self.p is None

    @property
    def weight(self) -> Fraction:
        return Fraction(1)

    @property
    def lam(self) -> LogScalar:
        """lambda_v: 1 at infinity, log p at p."""
        return ONE if self.p is None else log(self.p)

    def sort_key(self):
        return (0, 0) if self.p is None else (1, self.p)

    def __lt__(self, other):
        return self.sort_key() < other.sort_key()

    def __str__(self):
        return "inf" if self.p is None else str(self.p)

    def __repr__(self):
        return f"Place({self})"


INF = Place(None)


def val(x, v: Place) -> LogScalar:
    """val_v(x) = -log|x|_v for a nonzero rational x (exact)."""
    q = Fraction(x)
    if q == 0:
        raise ValueError("valuation of zero")
    if v.is_archimedean:
        return -log(abs(q))
    p = v.p
    e = 0
    n, d = q.numerator, q.denominator
    while n % p == 0:
        n //= p
        e += 1
    while d % p == 0:
        d //= p
        e -= 1
    # |x|_p = p^{-e}, so -log|x|_p = e log p
    return log(p, e) if e else LogScalar()
