import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from prrtail.errors import ExponentOverflow
from prrtail.lrec import parse_poly
from prrtail.sympoly import ALPHA, LN_N, N, PseudoPoly, limit_at_infinity, substitute, to_text

from helpers import derivative_fd_check, negative_lb_scan

exps = st.integers(-2, 2)
coeffs = st.floats(-5, 5, allow_nan=False).filter(lambda c: abs(c) > 1e-3)


@st.composite
def polys(draw, max_terms=4):
    k = draw(st.integers(1, max_terms))
    p = PseudoPoly()
    for _ in range(k):
        p = p + PseudoPoly.mono(draw(coeffs), alpha=(draw(exps), draw(exps)), n=(draw(exps), draw(exps)))
    return p


def test_printing_is_canonical():
    p = parse_poly("2*alpha/ln(alpha)*n")
    assert to_text(p) == "2*alpha*ln(alpha)^-1*n"
    q = parse_poly("n*(2*alpha)*ln(alpha)^-1")
    assert to_text(q) == to_text(p)


def test_zero_and_constants():
    assert to_text(PseudoPoly()) == "0"
    assert (N - N).is_zero()
    assert PseudoPoly.const(3.0).const_value() == 3.0


def test_product_of_logs():
    p = N * LN_N * LN_N
    assert to_text(p) == "n*ln(n)^2"
    assert p.eval(n=math.e) == pytest.approx(math.e)


def test_exponent_overflow():
    big = PseudoPoly.mono(1.0, n=(40, 0))
    with pytest.raises(ExponentOverflow):
        big * big


def test_substitute_ln_of_monomial():
    p = substitute(LN_N, "n", N * 2)
    assert p.eval(n=5.0) == pytest.approx(math.log(10))


def test_limits():
    assert limit_at_infinity(-N + 100 * LN_N, "n").kind == "-inf"
    assert limit_at_infinity(ALPHA.inverse() + 3, "alpha").value == pytest.approx(3)


@settings(max_examples=200, deadline=None)
@given(polys(), polys(), st.floats(1.5, 50), st.floats(1.5, 50))
def test_arith_matches_numbers(p, q, a, n):
    env = dict(alpha=a, n=n)
    assert (p + q).eval(**env) == pytest.approx(p.eval(**env) + q.eval(**env), rel=1e-9, abs=1e-9)
    assert (p * q).eval(**env) == pytest.approx(p.eval(**env) * q.eval(**env), rel=1e-9, abs=1e-9)


@settings(max_examples=200, deadline=None)
@given(polys())
def test_print_parse_roundtrip(p):
    back = parse_poly(to_text(p))
    for a, n in ((2.0, 3.0), (7.5, 40.0)):
        assert back.eval(alpha=a, n=n) == pytest.approx(p.eval(alpha=a, n=n), rel=1e-8, abs=1e-8)


def test_negative_lb_against_sign_scan():
    """10^3 random polynomials: p(n) <= 0 from the returned threshold on."""
    bad, checked = negative_lb_scan(1000, seed=11)
    assert bad == []
    assert checked > 300


def test_derivative_against_finite_differences():
    assert derivative_fd_check(300, seed=5) == []
