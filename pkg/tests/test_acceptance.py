"""Acceptance suite: one test (and one printed PASS/FAIL line) per criterion.

Run under pytest for the summary at the end of the session, or directly
with ``python tests/test_acceptance.py`` to print the twelve lines.
"""
import math
import sys
import time
from fractions import Fraction as Q
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

import _gen  # noqa: E402
from toricsp.adelic import (  # noqa: E402
    DEFAULT, abf_sets, analyze, construct_special_point, essential_minimum, eta, is_monocritical,
    lemma2_constants, phi, smallness_gap,
)
from toricsp.convexcore import (  # noqa: E402
    LogPolyhedron, PAConcave, QPolytope, legendre_dual, pac_add, sup_convolution, supdifferential,
)
from toricsp.exactlog import LogScalar, ZERO, log  # noqa: E402
from toricsp.places import INF, Place  # noqa: E402
from toricsp.points import (  # noqa: E402
    QuadraticCyclotomic, RootsOfUnity, ScaledRadical, corollary3_check, height, kr_decay_table,
    primitive_roots, ramanujan_sum, weyl_sum,
)
from toricsp.potential import (  # noqa: E402
    Interval, equilibrium_pushforward, leja_points, local_capacity, pairwise_energy, prop8_window,
)
from toricsp.scenarios import load_shipped, run_scenario  # noqa: E402
from toricsp.transport import DiscreteMeasure, vec_norm, w1_distance, w1_distance_1d, w1_distance_lp  # noqa: E402

L2 = log(2)
RESULTS = {}
N_DUALITY = 1000
EXACT_DIVISORS = ["example5", "example8", "example7", "example10", "canonical"]


class Criterion:
    """Collects sub-checks; records one line and fails the test if any sub-check failed."""

    def __init__(self, number, title):
        self.number, self.title = number, title
        self.failures = []
        self.t0 = time.time()

    def check(self, ok, what):
        if not ok:
            self.failures.append(what)
        return ok

    def finish(self):
        ok = not self.failures
        line = f"criterion {self.number:>2} [{'PASS' if ok else 'FAIL'}] {self.title} ({time.time() - self.t0:.1f}s)"
        if not ok:
            line += ": " + "; ".join(self.failures[:4])
        RESULTS[self.number] = line
        print(line)
        assert ok, line


def div(name):
    return load_shipped(name).divisor


# 1 -------------------------------------------------------------------------------------

def test_criterion_01_example5():
    c = Criterion(1, "Example 5 golden run")
    d = div("example5")
    rep = analyze(d)
    theta2 = rep.roofs[Place(2)]
    c.check(theta2.pieces == (((L2,), ZERO),), f"theta_2 pieces {theta2.pieces}")
    c.check(theta2.same_function(PAConcave.from_points([((Q(0),), ZERO), ((Q(1),), L2)])), "theta_2 != x log 2")
    c.check(rep.ess_min == L2, f"ess_min {rep.ess_min}")
    s2 = abf_sets(d, 2)
    c.check(s2.B == LogPolyhedron.interval(ZERO, L2), f"B_2 = {s2.B}")
    c.check(s2.F == LogPolyhedron.interval(None, L2), f"F_2 = {s2.F}")
    for v in (DEFAULT, INF, Place(3), Place(101)):
        s = abf_sets(d, v)
        c.check(s.B == LogPolyhedron.interval(-L2, ZERO), f"B_{v} = {s.B}")
        c.check(s.F == LogPolyhedron.interval(None, ZERO), f"F_{v} = {s.F}")
    c.check(rep.monocritical is False, "monocritical")
    c.check(rep.quasi_canonical is False, "quasi-canonical")
    c.finish()


# 2 -------------------------------------------------------------------------------------

def test_criterion_02_example8():
    c = Criterion(2, "Example 8 golden run")
    d = div("example8")
    rep = analyze(d)
    tent = PAConcave.from_points([((Q(-1),), ZERO), ((Q(0),), L2), ((Q(1),), ZERO)])
    c.check(rep.global_roof.same_function(tent), "global roof != (1-|x|) log 2")
    c.check(rep.cmax == QPolytope.from_points([(Q(0),)]), f"argmax {rep.cmax}")
    c.check(supdifferential(rep.roofs[Place(2)], (Q(0),)) == LogPolyhedron.interval(-L2, L2), "d theta_2(0)")
    s2 = abf_sets(d, 2)
    c.check(s2.B == LogPolyhedron.point((ZERO,)), f"B_2 = {s2.B}")
    c.check(s2.F == LogPolyhedron.interval(-L2, L2), f"F_2 = {s2.F}")
    for v in (DEFAULT, INF, Place(3)):
        c.check(abf_sets(d, v).F == LogPolyhedron.point((ZERO,)), f"F_{v}")
    c.check(rep.monocritical is False, "monocritical")
    c.finish()


# 3 -------------------------------------------------------------------------------------

def test_criterion_03_example7():
    c = Criterion(3, "Example 7 golden run")
    d = div("example7")
    rep = analyze(d)
    roof = PAConcave.from_points([((Q(0),), ZERO), ((Q(1),), L2), ((Q(2),), L2), ((Q(3),), ZERO)])
    c.check(rep.global_roof.same_function(roof), "roof != log2 min(x, 1, 3 - x)")
    c.check(rep.cmax == QPolytope.from_points([(Q(1),), (Q(2),)]), f"argmax {rep.cmax}")
    mono, crit = is_monocritical(d)
    c.check(mono is True, "not monocritical")
    c.check(all(all(x.is_zero() for x in u) for u in crit.values()), f"critical point {crit}")
    c.check(set(crit) >= {Place(2), DEFAULT}, "critical point misses places")
    c.check(construct_special_point(d) == ((Q(1),), 1), f"special point {construct_special_point(d)}")
    c.finish()


# 4 -------------------------------------------------------------------------------------

def test_criterion_04_example10():
    c = Criterion(4, "Example 10 golden run")
    d = div("example10")
    rep = analyze(d)
    c.check(rep.ess_min == L2, f"ess_min {rep.ess_min}")
    s = abf_sets(d, INF)
    box = LogPolyhedron.from_vertices([(-L2, -L2), (-L2, ZERO), (ZERO, -L2), (ZERO, ZERO)])
    cone = LogPolyhedron.from_vertices([(-L2, -L2)], rays=[(1, 0), (0, 1)])
    c.check(s.B == box, f"B_inf = {s.B}")
    c.check(s.F == cone, f"F_inf = {s.F}")
    f = QuadraticCyclotomic()
    bad = [l for l in range(3, 201) if abs(float(height(d, f, l)) - math.log(2)) > 1e-6]
    c.check(not bad, f"heights off at l = {bad[:5]}")
    nocor = [l for l in range(3, 201) if not corollary3_check(d, f, l)]
    c.check(not nocor, f"corollary3 false at l = {nocor[:5]}")
    c.finish()


# 5 -------------------------------------------------------------------------------------

def test_criterion_05_fubini_study():
    c = Criterion(5, "Fubini-Study example (Example 11)")
    d = div("fubini-study")
    rep = analyze(d)
    c.check(abs(float(rep.ess_min) - math.log(2) / 2) <= 1e-9, f"ess_min {rep.ess_min}")
    x = 0.5 * (rep.cmax[0] + rep.cmax[1])
    c.check(abs(x - 0.5) <= 1e-9, f"maximizer {x}")
    mono, crit = is_monocritical(d)
    c.check(mono is True, "not monocritical")
    c.check(abs(float(crit[INF][0])) <= 1e-9, f"u_inf {crit[INF]}")
    c.finish()


# 6 -------------------------------------------------------------------------------------

def test_criterion_06_heights():
    c = Criterion(6, "heights of exact families")
    d5 = div("example5")
    for l in range(1, 51):
        c.check(height(d5, RootsOfUnity(), l) == L2, f"roots of unity l={l}")
    for l in (1, 2, 3, 12):
        c.check(height(d5, ScaledRadical(3, 2), l) == L2, f"scaled radical l={l}")
    can1 = div("canonical")
    from toricsp.adelic import AdelicToricDivisor
    can2 = AdelicToricDivisor(QPolytope.simplex(2), {})
    for l in range(1, 21):
        c.check(height(can1, RootsOfUnity(1), l) == ZERO, f"canonical 1-D l={l}")
        c.check(height(can2, RootsOfUnity(2), l) == ZERO, f"canonical 2-D l={l}")
    c.finish()


# 7 -------------------------------------------------------------------------------------

def _vanishing_measure(rng, sets, n):
    """A measure that should satisfy supp in F and E in B (or nearly)."""
    vs = sets.B.vertices
    w = rng.integers(1, 4, len(vs))
    b = tuple(sum((v[i].scale(Q(int(k), int(w.sum()))) for v, k in zip(vs, w)), ZERO) for i in range(n))
    if rng.random() < 0.5:
        return DiscreteMeasure.dirac(b)
    step = tuple(LogScalar(_gen.rq(rng, 2, 4)) for _ in range(n))
    plus = tuple(x + s for x, s in zip(b, step))
    minus = tuple(x - s for x, s in zip(b, step))
    if plus == minus:
        return DiscreteMeasure.dirac(b)
    return DiscreteMeasure([(plus, Q(1, 2)), (minus, Q(1, 2))])


def test_criterion_07_phi():
    c = Criterion(7, "Phi functional, Prop. 1 and Lemma 2")
    can = div("canonical")
    for l in range(1, 21):
        atoms = [((Q(0),), Q(l - 1, l)), ((Q(-l),), Q(1, l))]
        mu = DiscreteMeasure([a for a in atoms if a[1]])
        for v in (INF, Place(2), DEFAULT):
            c.check(phi(can, v, mu) == LogScalar(-1), f"Phi(mu_{l}) at {v}")
    c.check(phi(can, INF, DiscreteMeasure.zero(1)) == ZERO, "Phi(delta_0)")
    rng = np.random.default_rng(7)
    for name in EXACT_DIVISORS:
        d = div(name)
        places = list(d.metrics) + [DEFAULT, Place(3)]
        consts = {v: lemma2_constants(d, v) for v in places}
        sets = {v: abf_sets(d, v) for v in places}
        zeros = nonzeros = 0
        for i in range(1000):
            v = places[i % len(places)]
            mu = _vanishing_measure(rng, sets[v], d.dim) if i % 3 == 0 else _gen.rmeasure(rng, d.dim)
            val = phi(d, v, mu)
            c.check(val.sign() <= 0, f"{name}: Phi > 0")
            inside = all(sets[v].F.contains(p) for p in mu.support) and sets[v].B.contains(mu.expectation)
            c.check(val.is_zero() == inside, f"{name}: Prop. 1 equivalence fails at {v} for {mu}")
            zeros += val.is_zero()
            nonzeros += not val.is_zero()
            c1, c2 = consts[v]
            moment = sum((vec_norm(p, d.norm).scale(w) for p, w in mu.atoms), ZERO)
            c.check((val - c1 + moment.scale(c2)).sign() <= 0, f"{name}: Lemma 2 bound at {v}")
        c.check(zeros > 50 and nonzeros > 50, f"{name}: degenerate sample ({zeros} zeros)")
    c.finish()


# 8 -------------------------------------------------------------------------------------

def test_criterion_08_eta_smallness():
    c = Criterion(8, "eta >= ess_min and the smallness bracket")
    rng = np.random.default_rng(8)
    for name in EXACT_DIVISORS:
        d = div(name)
        ess = essential_minimum(d)
        places = sorted(set(d.metrics) | {INF, Place(3)}, key=lambda v: v.sort_key())
        for i in range(1000):
            nu = _gen.rcentered(rng, d.dim, places, k_max=2)
            gap = eta(d, nu) - ess
            c.check(gap.sign() >= 0, f"{name}: eta < ess_min")
            if i % 4 == 0:
                lo, hi = smallness_gap(d, nu)
                c.check((gap - lo).sign() >= 0 and (hi - gap).sign() >= 0, f"{name}: bracket violated")
    c.finish()


# 9 -------------------------------------------------------------------------------------

def _vertex_candidates(th1, th2):
    """Vertices of the common refinement of two subdivisions of the same polytope (float superset)."""
    X = [np.array([float(a) for a in x]) for x, _ in th1.vertices + th2.vertices]
    n = len(X[0])
    if n == 2:
        V1 = [np.array([float(a) for a in x]) for x, _ in th1.vertices]
        V2 = [np.array([float(a) for a in x]) for x, _ in th2.vertices]
        dom = th1.domain
        H = [(np.array([float(a) for a in h]), float(b)) for h, b in dom.halfspaces]
        for p1, q1 in _pairs(V1):
            for p2, q2 in _pairs(V2):
                A = np.array([q1 - p1, -(q2 - p2)]).T
                if abs(np.linalg.det(A)) < 1e-12:
                    continue
                s, _ = np.linalg.solve(A, p2 - p1)
                x = p1 + s * (q1 - p1)
                if all(h @ x >= b - 1e-12 for h, b in H):
                    X.append(x)
    return np.array(X)


def _pairs(V):
    return [(V[i], V[j]) for i in range(len(V)) for j in range(i + 1, len(V))]


def _roof_float_one(th, x):
    vals = [sum(float(s) * xi for s, xi in zip(f.slope, x)) + float(f.const) for f in th.facets]
    return min(vals)


def _supconv_oracle(th1, th2, U):
    """(f1 [+] f2)(u) = min over x of <x, u> - theta_1(x) - theta_2(x), minimized over refinement vertices."""
    X = _vertex_candidates(th1, th2)
    g = np.array([_roof_float_one(th1, x) + _roof_float_one(th2, x) for x in X])
    return (U @ X.T - g).min(axis=1)


def _supconv_primal_1d(f1, f2, U):
    """sup over u1 of f1(u1) + f2(u - u1), over the breakpoint candidates (1-D only)."""
    def bends(f):
        out = []
        for (m1, c1), (m2, c2) in _pairs(list(f.pieces)):
            if m1[0] != m2[0]:
                out.append((float(c2) - float(c1)) / float(m1[0] - m2[0]))
        return np.array(out or [0.0])
    b1, b2 = bends(f1), bends(f2)
    best = np.full(len(U), -np.inf)
    for j, u in enumerate(U[:, 0]):
        cand = np.concatenate([b1, u - b2, [0.0]])[:, None]
        val = _gen.eval_metric_float(f1, cand) + _gen.eval_metric_float(f2, u - cand)
        best[j] = val.max()
    return best


def test_criterion_09_duality():
    c = Criterion(9, "duality involution and conjugate additivity")
    rng = np.random.default_rng(9)
    for i in range(N_DUALITY):
        n = 1 + i % 2
        # involution on an arbitrary metric function (redundant pieces allowed)
        psi = _gen.rmetric(rng, n, primes=(2,))
        back = legendre_dual(legendre_dual(psi))
        exact_pts, U = _gen.rational_samples(rng, n, 1000)
        err = np.max(np.abs(back.eval_float(U) - _gen.eval_metric_float(psi, U)))
        c.check(err <= 1e-9, f"involution float error {err:.2e}")
        for u in exact_pts[:5]:
            c.check(back(u) == psi(u), "involution exact mismatch")
        # conjugate additivity for two roofs on the same polytope
        f1, f2 = _gen.rmetric(rng, n, corners=2, primes=(2,)), _gen.rmetric(rng, n, corners=2, primes=(2,))
        th1, th2 = legendre_dual(f1), legendre_dual(f2)
        lhs = legendre_dual(pac_add(th1, th2))
        rhs = sup_convolution(legendre_dual(th1), legendre_dual(th2))
        c.check(lhs.same_function(rhs), "exact sup-convolution mismatch")
        want = _supconv_oracle(th1, th2, U)
        err = np.max(np.abs(lhs.eval_float(U) - want))
        c.check(err <= 1e-9, f"additivity float error {err:.2e} (dim {n})")
        if n == 1 and i % 10 == 1:
            err = np.max(np.abs(_supconv_primal_1d(f1, f2, U[:200]) - want[:200]))
            c.check(err <= 1e-9, f"primal sup-convolution error {err:.2e}")
        for u in exact_pts[:3]:
            c.check(lhs(u) == rhs(u), "additivity exact mismatch")
    c.finish()


# 10 ------------------------------------------------------------------------------------

# Oracle: W1 to a Dirac mass is the first moment, so the adelic distance from the
# QuadraticCyclotomic orbit to (delta_0)_v is the mean l1 norm of (-log|z1|, -log|z2|)
# over the Archimedean orbit (finite places are exactly delta_0).
KR_ORACLE = {25: 0.6510971049237981, 50: 0.6435988417306249, 100: 0.6455212457528818, 200: 0.645980380794715}


def _kr_oracle(l):
    w = primitive_roots(l)
    s = np.sqrt(1 - 4 * w + 0j)
    z1 = np.concatenate([(-1 + s) / 2, (-1 - s) / 2])
    z2 = np.concatenate([w, w]) / z1
    return float(np.mean(np.abs(np.log(np.abs(z1))) + np.abs(np.log(np.abs(z2)))))


def test_criterion_10_transport():
    c = Criterion(10, "transport: W1 exactness, duality bound, KR decay table")
    rng = np.random.default_rng(10)
    for _ in range(200):
        mu, nu = _gen.rmeasure(rng, 1, 6), _gen.rmeasure(rng, 1, 6)
        c.check(w1_distance_1d(mu, nu) == w1_distance_lp(mu, nu), "1-D W1 differs from the LP")
    for i in range(1000):
        n = 1 + i % 2
        psi = _gen.rmetric(rng, n, primes=(2,))
        if n == 1:
            mu, nu = _gen.rmeasure(rng, 1, 4), _gen.rmeasure(rng, 1, 4)
        else:
            mu, nu = _gen.rmeasure(rng, 2, 3, primes=()), _gen.rmeasure(rng, 2, 3, primes=())
        lip = max(max(abs(x) for x in m) for m, _ in psi.pieces)      # dual (l-infinity) norm of slopes
        diff = mu.integrate(psi) - nu.integrate(psi)
        gap = w1_distance(mu, nu).scale(lip) - (diff if diff.sign() >= 0 else -diff)
        c.check(gap.sign() >= 0, "W1 duality bound violated")
    # decay table
    table = dict(kr_decay_table(div("example7"), QuadraticCyclotomic(), [25, 50, 100, 200]))
    for l, want in KR_ORACLE.items():
        c.check(abs(_kr_oracle(l) - want) <= 1e-12, f"oracle drifted at l={l}")
        c.check(abs(table[l] - want) <= 1e-9, f"KR table differs from the oracle at l={l}")
    c.check(table[200] <= 0.05, f"KR distance at l=200 is {table[200]:.4f} > 0.05")
    vals = [table[l] for l in (25, 50, 100, 200)]
    c.check(vals[-1] <= vals[0] and max(vals[1:]) <= vals[0] + 1e-12, f"table not decreasing: {vals}")
    c.finish()


# 11 ------------------------------------------------------------------------------------

def test_criterion_11_potential():
    c = Criterion(11, "potential theory")
    for cc in (Q(1), Q(5, 4), Q(2)):
        c.check(local_capacity(Interval(-2 * cc, 2 * cc)) == cc, f"cap [-2c, 2c], c={cc}")
        pf = equilibrium_pushforward(Interval(-2 * cc, 2 * cc))
        c.check(abs(float(pf.expectation) + math.log(cc)) <= 1e-8, f"pushforward expectation, c={cc}")
        # independent arcsine quadrature on a dense Chebyshev grid
        t = (np.arange(200000) + 0.5) * np.pi / 200000
        q = -np.mean(np.log(np.abs(2 * float(cc) * np.cos(t))))
        c.check(abs(q + math.log(cc)) <= 1e-4, f"quadrature oracle c={cc}: {q}")
    w = prop8_window(Q(5, 4))
    c.check(w.capacity == 1, f"Prop. 8 global capacity {w.capacity}")
    for l in range(2, 65):
        z = np.exp(2j * np.pi * np.arange(l) / l)
        c.check(abs(pairwise_energy(z) - math.log(l) / (l - 1)) <= 1e-12, f"roots of unity energy l={l}")
    d = pairwise_energy(leja_points(Interval(-2, 2), 200))
    c.check(abs(d) <= 0.05, f"Leja energy {d}")
    c.finish()


# 12 ------------------------------------------------------------------------------------

def test_criterion_12_proxies():
    c = Criterion(12, "desk-scale proxies for equidistribution and Bogomolov")
    for l in range(2, 102):
        if all(l % p for p in range(2, int(l ** 0.5) + 1)):
            r = Q(abs(ramanujan_sum(l, 1)), l - 1)
            c.check(r == Q(1, l - 1), f"Ramanujan sum l={l}")
            c.check(weyl_sum(RootsOfUnity(), l, 1) == 1 / (l - 1), f"weyl_sum l={l}")
            direct = abs(np.mean(primitive_roots(l)))
            c.check(abs(direct - 1 / (l - 1)) <= 1e-12, f"direct Weyl sum l={l}")
    for name in ("example10", "bogomolov-prop2(n0=[1,1], a0=[1,0])"):
        doc = run_scenario(name)
        c.check(doc["passed"], f"scenario {name} failed")
        c.check(doc["banner"] == "Bogomolov property: violated", f"scenario {name} banner")
    c.finish()


def pytest_terminal_lines():
    return [RESULTS[k] for k in sorted(RESULTS)]


if __name__ == "__main__":
    for name, fn in sorted(globals().items()):
        if name.startswith("test_criterion"):
            try:
                fn()
            except AssertionError:
                pass
