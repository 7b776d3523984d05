"""Per-module unit tests, kept light; the heavy lifting is in test_acceptance."""
import json
import math
import sys
from fractions import Fraction as Q
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

sys.path.insert(0, str(Path(__file__).parent))

from toricsp import cli  # noqa: E402
from toricsp.adelic import DivisorValidationError, analyze, essential_minimum, validate_divisor  # noqa: E402
from toricsp.config import divisor_from_mapping, load_config  # noqa: E402
from toricsp.convexcore import PAConcave, QPolytope, legendre_dual, pac_add  # noqa: E402
from toricsp.exactlog import IndeterminateSignError, LogScalar, ZERO, log, parse_logscalar  # noqa: E402
from toricsp.places import INF, Place  # noqa: E402
from toricsp.points import QuadraticCyclotomic, RootsOfUnity, newton_polygon_units, weyl_sum  # noqa: E402
from toricsp.potential import Interval, NonArchBall, global_capacity, local_capacity  # noqa: E402
from toricsp.report import analysis_document, dumps, loads, validate_report  # noqa: E402
from toricsp.scenarios import SCENARIOS, load_shipped, parse_scenario, run_scenario  # noqa: E402
from toricsp.transport import DiscreteMeasure, w1_distance  # noqa: E402

L2 = log(2)
# 40-digit decimal truncation of log 2: agrees with log 2 far beyond 64 bits
NEAR_LOG2 = Q(1386294361119890618834464242916353136151, 2000000000000000000000000000000000000000)


# exactlog ------------------------------------------------------------------------------

def test_logscalar_text_roundtrip():
    a = LogScalar(Q(3, 2), {2: Q(1, 2)})
    assert str(a) == "3/2 + 1/2*log(2)"
    assert parse_logscalar(str(a)) == a
    assert log(12) == log(3) + log(2).scale(2)
    assert (L2 - L2).is_zero() and (L2 - L2) == 0


def test_sign_ladder_and_cap():
    x = L2 - NEAR_LOG2
    with pytest.raises(IndeterminateSignError):
        x.sign(max_bits=64)
    assert x.sign() == 1
    assert (log(3).scale(306) - log(2).scale(485)).sign() == -1


def test_env_cap(monkeypatch):
    monkeypatch.setenv("TSP_PRECISION_BITS", "64")
    with pytest.raises(IndeterminateSignError):
        (L2 - NEAR_LOG2).sign()


@settings(max_examples=60, deadline=None)
@given(st.fractions(max_denominator=50), st.fractions(max_denominator=50), st.fractions(max_denominator=50))
def test_sign_matches_float(c, a, b):
    x = LogScalar(c, {2: a, 3: b})
    f = float(c) + float(a) * math.log(2) + float(b) * math.log(3)
    if abs(f) > 1e-9:
        assert x.sign() == (1 if f > 0 else -1)
    assert abs(float(x) - f) <= 1e-12 * (1 + abs(f))


# convexcore ----------------------------------------------------------------------------

def test_polytope_and_dual():
    P = QPolytope.from_points([(0, 0), (1, 0), (0, 1), (Q(1, 3), Q(1, 3))])
    assert len(P.vertices) == 3 and P.volume() == Q(1, 2)
    psi = PAConcave([((0,), ZERO), ((1,), -L2), ((Q(1, 2),), ZERO)])
    theta = legendre_dual(psi)
    assert theta((0,)) == 0 and theta((1,)) == L2
    assert theta((Q(1, 2),)) == L2.scale(Q(1, 2))      # the redundant piece sits below the hull
    assert legendre_dual(theta).same_function(PAConcave([((0,), ZERO), ((1,), -L2)]))


def test_pac_add_roofs():
    P = QPolytope.from_points([(0,), (1,)])
    f = PAConcave.from_points([((0,), ZERO), ((Q(1, 2),), L2), ((1,), ZERO)], P)
    g = PAConcave.affine_on(P, (L2,), ZERO)
    h = pac_add(f, g)
    for x in (Q(0), Q(1, 4), Q(1, 2), Q(1)):
        assert h((x,)) == f((x,)) + g((x,))


# adelic / config ---------------------------------------------------------------------------

def test_example5_analysis():
    d = load_shipped("example5").divisor
    rep = analyze(d)
    assert essential_minimum(d) == rep.ess_min
    doc = analysis_document(rep)
    validate_report(doc)
    assert dumps(loads(dumps(doc))) == dumps(doc)


def test_validation_errors():
    bad = [
        ({"polytope": [[0], [0]], "metrics": {}}, "empty interior"),
        ({"polytope": [[0], [1]], "metrics": {"4": {"kind": "canonical"}}}, "unknown place"),
        ({"polytope": [[0], [1]], "metrics": {"2": {"kind": "piecewise", "pieces": [
            {"slope": [0], "const": "0"}, {"slope": [2], "const": "0"}]}}}, "unbounded difference"),
    ]
    for m, why in bad:
        with pytest.raises(DivisorValidationError, match=why):
            validate_divisor(divisor_from_mapping(m))


def test_places():
    assert Place.parse("inf") == INF and Place.parse("2") == Place(2)
    assert str(Place(3)) == "3"


# points ------------------------------------------------------------------------------------

def test_newton_polygon_and_weyl():
    assert newton_polygon_units(12, 5)
    # frozen oracle value; the equidistribution proxy stays above 0.2 at this level
    assert abs(weyl_sum(QuadraticCyclotomic(), 211, (1, 0)) - 0.24069293437608702) <= 1e-9
    assert abs(weyl_sum(RootsOfUnity(), 97, (1,))) <= 0.02


# transport / potential ------------------------------------------------------------------------

def test_w1_exact_1d():
    mu = DiscreteMeasure([((ZERO,), Q(1))])
    nu = DiscreteMeasure([((L2,), Q(1, 2)), ((-L2,), Q(1, 2))])
    assert w1_distance(mu, nu) == L2


def test_capacities():
    assert local_capacity(Interval(-2, 2)) == 1
    assert local_capacity(Interval(0, 4)) == 1
    assert local_capacity(NonArchBall(0, Q(1, 2))) == Q(1, 2)
    cfg = load_config(Path(__file__).parents[1] / "src/toricsp/data/canonical.toml")
    assert global_capacity(cfg.sets) == 1


# scenarios / cli -----------------------------------------------------------------------------

def test_parse_scenario():
    assert parse_scenario("prop8(c=5/4)") == ("prop8", {"c": Q(5, 4)})
    name, params = parse_scenario("bogomolov-prop2(n0=[1,1], a0=[1,0])")
    assert name == "bogomolov-prop2" and tuple(params["n0"]) == (1, 1)


@pytest.mark.parametrize("name", ["example5", "example8", "fubini-study"])
def test_scenarios_pass(name):
    doc = run_scenario(name)
    validate_report(doc)
    assert doc["passed"], [v for v in doc["verdicts"] if not v["pass"]]


def test_cli_exit_codes(tmp_path, capsys):
    cfg = Path(__file__).parents[1] / "src/toricsp/data/example5.toml"
    assert cli.main(["analyze", "--config", str(cfg)]) == 0
    out = tmp_path / "a.json"
    assert cli.main(["analyze", "--config", str(cfg), "--json", "--out", str(out)]) == 0
    first = out.read_text()
    assert cli.main(["analyze", "--config", str(cfg), "--json", "--out", str(out)]) == 0
    assert out.read_text() == first and json.loads(first)["kind"] == "analysis"
    assert cli.main(["scenario", "no-such-thing"]) == 2
    bad = tmp_path / "bad.toml"
    bad.write_text('[divisor]\npolytope = [[0], [0]]\n')
    assert cli.main(["analyze", "--config", str(bad)]) == 2
    hard = tmp_path / "hard.toml"
    hard.write_text(
        '[divisor]\npolytope = [[0], [1]]\n[divisor.metrics.2]\nkind = "piecewise"\n'
        'pieces = [{ slope = [0], const = "0" }, { slope = [1], const = "-log(2)" },\n'
        f'  {{ slope = [1], const = "-{NEAR_LOG2}" }}]\n')
    assert cli.main(["analyze", "--config", str(hard), "--precision-bits", "64"]) == 3
    assert cli.main(["analyze", "--config", str(hard)]) == 0
    assert cli.main(["plot-roof", "--config", str(cfg), "--out", str(tmp_path / "r.svg")]) == 0
    assert (tmp_path / "r.svg").read_text().startswith("<svg")


# estimator ---------------------------------------------------------------------------------

def test_estimator():
    from toricsp.estimator import ToricAnalyzer

    cfg = load_shipped("example5")
    est = ToricAnalyzer().fit(cfg)
    assert est.ess_min_ == analyze(cfg.divisor).ess_min
    vals = est.transform([(RootsOfUnity(), 5), (RootsOfUnity(), 7)])
    assert vals.shape == (2, 1)
    assert np.all(est.smallness([(RootsOfUnity(), 5)]) >= -1e-12)
    assert est.get_params()["norm"] == "l1"
