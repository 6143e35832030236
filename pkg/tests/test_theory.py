import math

import pytest

from prrtail.errors import DegenerateInterval
from prrtail.lrec import parse_poly
from prrtail.sympoly import to_text
from prrtail.theory import (pre_cost_monotone, comp_tail_bound, estimate_increment_constants, lambda_of, monomial_upper,
                            solve_expected_runtime, w_of)


def test_channel_self_loop(prr):
    # c_p = 2, so the first size that pays anything is 2: x = 1 + (1 - 1/e) x
    ep = solve_expected_runtime(prr("channel"), 10)
    assert ep.values[1] == 0.0
    assert ep.values[2] == pytest.approx(math.e)


def test_rdwalk_one_step(prr):
    assert solve_expected_runtime(prr("rdwalk"), 5).values[1] == pytest.approx(2.0)


def test_quickselect_growth(prr):
    ep = solve_expected_runtime(prr("quickselect"), 2000)
    assert ep.values[2000] / 2000 == pytest.approx(4.0, abs=0.05)


def test_increment_constants_quickselect(prr):
    c = prr("quickselect")
    lo, hi = estimate_increment_constants(c, solve_expected_runtime(c, 500), (10, 500))
    assert lo == pytest.approx(-1, abs=0.2)
    assert hi == pytest.approx(1, abs=0.2)


def test_increment_constants_quicksort_true_extreme(prr):
    # the balanced split gives n + 4 (n/2) ln(n/2) - 2 n ln n = (1 - 2 ln 2) n
    c = prr("quicksort")
    lo, hi = estimate_increment_constants(c, solve_expected_runtime(c, 500), (10, 500))
    assert lo == pytest.approx(1 - 2 * math.log(2), abs=0.05)
    assert hi == pytest.approx(1, abs=0.05)


def test_a2(prr):
    assert pre_cost_monotone(prr("quicksort"), 200)


def test_comp_bound_quickselect():
    b = comp_tail_bound(parse_poly("4*n"), parse_poly("n"), -1.0, 1.0)
    assert to_text(b.exponent) == to_text(parse_poly("-2*(alpha-1)^2/alpha"))
    assert b.value(1.0, 50) == pytest.approx(1.0)


def test_comp_bound_quicksort_coefficient():
    b = comp_tail_bound(parse_poly("2*n*ln(n)"), parse_poly("n"), -2 * math.log(2), 1.0)
    assert b.coefficient == pytest.approx(0.70, abs=0.01)


def test_degenerate_interval():
    with pytest.raises(DegenerateInterval):
        comp_tail_bound(parse_poly("n"), parse_poly("n"), 1.0, 1.0)


def test_w_and_lambda():
    assert w_of(1.0) == 1.0
    assert lambda_of(1.0, -1, 1) == 0.0


def test_monomial_upper_dominates():
    p = parse_poly("0.5 + 0.5*n")
    up = monomial_upper(p, 2)
    for n in (2, 3, 10, 1000, 10**6):
        assert up.eval(n=n) >= p.eval(n=n) - 1e-12
