import math

import numpy as np
import pytest

from prrtail import simulator as sim
from prrtail.cli import ExpressionBound, parse_bound
from prrtail.errors import SizeRangeViolationError, StepCapExceeded, UnsupportedShape
from prrtail.canonicalizer import to_canonical
from prrtail.lrec import parse, parse_poly
from prrtail.theory import solve_expected_runtime

SINGLE = ["quickselect", "l1diameter", "l2diameter", "randsearch", "channel", "rdwalk", "rdadder",
          "mc1", "mc2", "mc3"]


def test_below_threshold_costs_nothing(prr):
    assert sim.run_once(prr("quickselect"), 1) == 0.0
    assert sim.exact_distribution(prr("quickselect"), 1) == {0.0: 1.0}


def test_quickselect_three(prr):
    d = sim.exact_distribution(prr("quickselect"), 3)
    assert d.keys() == {3.0, 5.0}
    assert d[3.0] == pytest.approx(1 / 3)
    assert d[5.0] == pytest.approx(2 / 3)
    costs = sim.sample_costs(prr("quickselect"), 3, 5000, seed=3)
    assert set(np.unique(costs)) <= {3.0, 5.0}


def test_exact_mean_matches_dp(prr):
    for name in SINGLE:
        c = prr(name)
        ep = solve_expected_runtime(c, 20)
        for n in (5, 10, 20):
            d = sim.exact_distribution(c, n)
            assert sum(d.values()) == pytest.approx(1.0, abs=1e-9)
            mean = sum(k * v for k, v in d.items())
            assert mean == pytest.approx(ep.values[n], rel=1e-6), (name, n)


def test_exact_rejects_two_calls(prr):
    with pytest.raises(UnsupportedShape):
        sim.exact_distribution(prr("quicksort"), 5)


def test_rdwalk_mean(prr):
    x = sim.sample_costs(prr("rdwalk"), 1, 100_000, seed=9)
    se = x.std() / math.sqrt(len(x))
    assert abs(x.mean() - 2.0) < 3 * se


def test_determinism_and_backends(prr):
    c = prr("mc4")
    a = sim.sample_costs(c, 30, 2000, seed=42)
    b = sim.sample_costs(c, 30, 2000, seed=42)
    assert np.array_equal(a, b)
    py = sim.sample_costs(c, 30, 2000, seed=42, backend="python")
    if sim.BACKEND == "cython":
        assert np.array_equal(a, py)
    assert not np.array_equal(a, sim.sample_costs(c, 30, 2000, seed=43))


def test_chunking_does_not_change_runs(prr):
    c = prr("quicksort")
    whole = sim.sample_costs(c, 40, 9000, seed=5)
    one = sim.run_once(c, 40, seed=5, run=8000)
    assert whole[8000] == one


def test_oracle_agreement(prr):
    """Sampled tails sit inside their 99% intervals around the exact tails."""
    for name in SINGLE:
        c = prr(name)
        for n in (5, 10, 20):
            d = sim.exact_distribution(c, n)
            tail = sim.estimate_tail(c, n, 20_000, seed=n)
            for x in list(d)[:: max(1, len(d) // 5)]:
                exact = sum(p for k, p in d.items() if k >= x)
                k = tail.count_at_least(x - 1e-6)
                lo = sim.clopper_pearson_lower(k, 20_000, 0.999)
                hi = sim.clopper_pearson_upper(k, 20_000, 0.999)
                assert lo - 1e-12 <= exact <= hi + 1e-12, (name, n, x)


def test_tail_estimates(prr):
    t = sim.estimate_tail(prr("quickselect"), 3, 10_000, seed=1)
    assert t.tail(0) == 1.0
    assert t.tail(5) == pytest.approx(2 / 3, abs=0.02)
    assert t.tail(1e9) == 0.0
    assert t.upper(1e9) == pytest.approx(4.6 / 10_000, rel=0.01)


def test_step_cap():
    c = to_canonical(parse("def p(n; 1) = { with { 0.999: { pre(1); invoke p(n); }; 0.001: { pre(1); invoke p(n-1); }; } }"))
    with pytest.raises(StepCapExceeded):
        sim.sample_costs(c, 50, 10, seed=0, step_cap=1000)


def test_size_violation_detected():
    c = to_canonical(parse("def p(n; 1) = { sample v <- discrete{1: n+1,} in { pre(1); invoke p(v); } }"))
    with pytest.raises(SizeRangeViolationError):
        sim.sample_costs(c, 5, 10, seed=0)


def test_validate_vacuous_and_refuted(prr):
    c = prr("quickselect")
    rep = sim.validate_bound(c, ExpressionBound(parse_bound("exp(alpha)")), parse_poly("n"),
                             (4,), (64,), samples=2000, seed=0)
    assert rep.rows[0].verdict == "VACUOUS" and rep.passed
    # a "bound" of e^-20 at a threshold the cost always exceeds must be refuted
    rep = sim.validate_bound(c, ExpressionBound(parse_bound("exp(-20)")), parse_poly("n"),
                             (1,), (64,), samples=2000, seed=0)
    assert rep.rows[0].verdict == "REFUTED" and rep.refuted and not rep.passed


def test_dynamic_wellformedness(prr, corpus):
    total = 0
    for name in corpus:
        total += len(sim.sample_costs(prr(name), 64, 84_000, seed=77))
    assert total >= 10**6
