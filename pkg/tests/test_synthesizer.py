import pytest

from prrtail.errors import NoBoundFound
from prrtail.lrec import parse_poly
from prrtail.synthesizer import (BoundTemplate, check_cond, coefficient_grid, enumerate_templates,
                                 raw_count, raw_templates, synthesize)

QS_WINNER = BoundTemplate(1, -1, 1, 0, 0, 1, -1, 0)


def test_raw_count_matches_enumeration():
    assert raw_count(1) == 1296
    assert sum(1 for _ in raw_templates(1)) == 1296


def test_pruned_quickselect_space():
    tpls = enumerate_templates(1, parse_poly("4*n"), parse_poly("n"))
    assert len(tpls) <= 200
    assert QS_WINNER in tpls


def test_grid():
    c_ts, c_fs = coefficient_grid(4)
    assert c_ts == [1, 0.5, 0.25, 0.125, 0.0625]
    assert c_fs == [0.5, 1, 2, 4, 8]


def test_quickselect_bound(prr):
    cand = synthesize(prr("quickselect"), parse_poly("n"), parse_poly("4*n"))
    assert cand.template == QS_WINNER
    assert (cand.c_f, cand.c_t) == (2.0, 1.0)
    assert cand.text() == "exp(-alpha*ln(alpha) + 2*alpha)"
    assert cand.value(10, 13) == pytest.approx(0.0485, rel=5e-3)


def test_lattice_moves_keep_acceptance(prr):
    c = prr("quickselect")
    assert check_cond(c, QS_WINNER, 2.0, 1.0).accepted
    assert check_cond(c, QS_WINNER, 4.0, 1.0).accepted
    assert check_cond(c, QS_WINNER, 2.0, 0.5).accepted


def test_too_small_f_rejected(prr):
    res = check_cond(prr("quickselect"), QS_WINNER, 0.5, 1.0)
    assert not res.accepted
    assert res.stage in ("strengthen", "decide", "exact")


def test_all_templates_returns_list(prr):
    got = synthesize(prr("mc1"), parse_poly("ln(n)"), parse_poly("ln(n)"), all_templates=True)
    assert isinstance(got, list) and len(got) > 1


def test_no_bound_for_kappa_below_cost(prr):
    # kappa = ln n is far below the linear expected cost of QuickSelect
    with pytest.raises(NoBoundFound):
        synthesize(prr("quickselect"), parse_poly("ln(n)"), parse_poly("ln(n)"), B=1, M=2)
