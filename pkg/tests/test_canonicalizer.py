import numpy as np
import pytest
from scipy.stats import ks_2samp

from prrtail import simulator
from prrtail.canonicalizer import mean_pre_cost, support, to_canonical
from prrtail.lrec import MUniform, Uniform, parse


def test_channel_branches(prr):
    ch = prr("channel")
    assert len(ch.branches) == 2
    probs = sorted(b.prob for b in ch.branches)
    assert probs[0] == pytest.approx(np.exp(-1))
    assert sum(probs) == pytest.approx(1.0)
    assert all(b.r == 1 for b in ch.branches)


def test_nested_choice_multiplies():
    src = ("def p(n; 2) = { with { 0.5: { with { 0.5: { pre(1); invoke p(n-1); }; 0.5: { pre(2); invoke p(n-2); }; } };"
           " 0.5: { sample v <- uniform(n) in { pre(n); invoke p(v); } }; } }")
    c = to_canonical(parse(src))
    assert [b.prob for b in c.branches] == [0.25, 0.25, 0.5]


def test_quicksort_two_calls(prr):
    b = prr("quicksort").branches[0]
    assert b.r == 2
    assert b.size2.text() == "n-1-v"


def test_muniform_support():
    vals, probs = support(MUniform(), 5)
    assert list(vals) == [2, 3, 4]
    assert probs.sum() == pytest.approx(1.0)
    assert probs[0] == pytest.approx(0.2)
    vals, probs = support(Uniform(), 4)
    assert list(vals) == [0, 1, 2, 3]


def test_mean_pre_cost(prr):
    assert mean_pre_cost(prr("mc4"), 10) == pytest.approx(5.5)


@pytest.mark.parametrize("n_star", [5, 20])
def test_ast_and_canonical_agree(corpus, n_star):
    """Two-sample KS test between the nested-AST interpreter and the branch-list sampler."""
    for name, (spec, c) in corpus.items():
        ast = parse(spec.prr_path.read_text())
        a = simulator.sample_ast(ast, n_star, 10_000, seed=101)
        b = simulator.sample_costs(c, n_star, 10_000, seed=202)
        if np.all(a == a[0]) and np.all(b == b[0]):
            assert a[0] == b[0], name
            continue
        assert ks_2samp(a, b).pvalue > 0.01, name
