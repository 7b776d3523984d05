"""Random generators shared by the property tests."""
import itertools
from fractions import Fraction as Q

import numpy as np

from toricsp.convexcore import PAConcave
from toricsp.exactlog import LogScalar, ZERO, log
from toricsp.transport import AdelicMeasure, DiscreteMeasure


def rq(rng, num=6, den=3):
    return Q(int(rng.integers(-num, num + 1)), int(rng.integers(1, den + 1)))


def rls(rng, primes=(2,)):
    x = LogScalar(rq(rng))
    for p in primes:
        x = x + log(p, rq(rng, 3, 2))
    return x


def rpoint(rng, n, primes=(2,)):
    return tuple(rls(rng, primes) for _ in range(n))


def rmeasure(rng, n, k_max=4, primes=(2,)):
    k = int(rng.integers(1, k_max + 1))
    w = rng.integers(1, 5, k)
    return DiscreteMeasure([(rpoint(rng, n, primes), Q(int(x), int(w.sum()))) for x in w])


def rmetric(rng, n, corners=None, max_pieces=8, primes=(2, 3)):
    """Random metric-type PAConcave with at most max_pieces pieces.

    With corners = k the slopes include the vertices of [-k, k]^n, so all
    such functions share the slope polytope.
    """
    slopes = set(itertools.product(*[(-corners, corners)] * n)) if corners else set()
    for _ in range(int(rng.integers(0, max_pieces))):
        if len(slopes) >= max_pieces:
            break
        slopes.add(tuple(int(x) for x in rng.integers(-2, 3, n)))
    while len(slopes) < n + 1 or not _spans(slopes, n):
        slopes.add(tuple(int(x) for x in rng.integers(-3, 4, n)))
    return PAConcave([(tuple(Q(s) for s in m), rls(rng, primes)) for m in sorted(slopes)])


def _spans(slopes, n):
    pts = np.array(sorted(slopes), dtype=float)
    return np.linalg.matrix_rank(pts[1:] - pts[0]) == n if len(pts) > n else False


def rational_samples(rng, n, k, box=4):
    """k random rational points in [-box, box]^n (as Fractions and floats)."""
    num = rng.integers(-box * 12, box * 12 + 1, (k, n))
    den = rng.integers(1, 13, (k, n))
    exact = [tuple(Q(int(a), int(b)) for a, b in zip(r1, r2)) for r1, r2 in zip(num, den)]
    return exact, num / den


def eval_metric_float(f, U):
    """min_i <m_i, u> + c_i, vectorized over the rows of U (independent of the library)."""
    M = np.array([[float(c) for c in m] for m, _ in f.pieces])
    c = np.array([float(c) for _, c in f.pieces])
    return (U @ M.T + c).min(axis=1)


def rcentered(rng, n, places, k_max=3, primes=(2,)):
    """Random centered adelic measure: the last place absorbs the drift."""
    ent = {}
    total = [ZERO] * n
    for v in places[:-1]:
        mu = rmeasure(rng, n, k_max, primes)
        ent[v] = mu
        total = [a + b for a, b in zip(total, mu.expectation)]
    mu = rmeasure(rng, n, k_max, primes)
    shift = tuple(-(t + e) for t, e in zip(total, mu.expectation))
    ent[places[-1]] = mu.translate(shift)
    return AdelicMeasure(ent, n)
