import pytest

from prrtail import lrec
from prrtail.errors import LRecSyntaxError, MultipleProcedures, UnboundVariable
from prrtail.lrec import Choice, Discrete, MUniform, Sample, parse, pretty, validate


def test_corpus_parses_and_validates(corpus):
    for name, (spec, _) in corpus.items():
        ast = parse(spec.prr_path.read_text())
        assert validate(ast) == [], name


def test_quickselect_shape():
    ast = parse("def p(n; 2) = { sample v <- muniform(n) in { pre(n); invoke p(v); } }")
    assert ast.c_p == 2
    assert isinstance(ast.body, Sample) and isinstance(ast.body.dist, MUniform)
    assert ast.body.body.calls == "v"


def test_channel_has_two_arms(corpus):
    ast = parse(corpus["channel"][0].prr_path.read_text())
    assert isinstance(ast.body, Choice)
    assert len(ast.body.arms) == 2
    p0 = lrec.const_value(ast.body.arms[0][0])
    assert p0 == pytest.approx(0.36787944, rel=1e-7)


def test_bare_body_shorthand():
    src = "def p(n; 2) = { with { 0.5: { pre(1); invoke p(n-1); }; 0.5: { pre(1); invoke p(n); }; } }"
    ast = parse(src)
    arm = ast.body.arms[0][1]
    assert isinstance(arm.dist, Discrete)


def test_syntax_error_position():
    with pytest.raises(LRecSyntaxError) as err:
        parse("def p(n; 2) = { sample v <- uniform(n) in { pre(n) invoke p(v); } }")
    assert err.value.line == 1
    assert err.value.col > 40


def test_unbound_variable():
    with pytest.raises(UnboundVariable):
        parse("def p(n; 2) = { sample v <- uniform(n) in { pre(m); invoke p(v); } }")


def test_two_procedures_rejected():
    src = ("def p(n; 2) = { sample v <- uniform(n) in { pre(n); invoke p(v); } }\n"
           "def q(n; 2) = { sample v <- uniform(n) in { pre(n); invoke q(v); } }")
    with pytest.raises(MultipleProcedures):
        parse(src)


def test_probabilities_must_sum_to_one():
    src = "def p(n; 2) = { with { 0.5: { pre(1); invoke p(n-1); }; 0.4: { pre(1); invoke p(n); }; } }"
    assert validate(parse(src))


def test_pretty_roundtrip(corpus):
    for spec, _ in corpus.values():
        ast = parse(spec.prr_path.read_text())
        assert parse(pretty(ast)) == ast
