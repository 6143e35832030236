"""Flatten an LRec AST into the canonical branch list.

Every leaf ``sample`` block becomes one Branch whose probability is the
product of the enclosing ``with`` arm probabilities.  The result describes
the joint distribution of (S(n), size1, size2, r).
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import lrec
from .lrec import Choice, Discrete, MUniform, PiecewiseUniform, PrrAst, Sample, SizeBase, Uniform
from .sympoly import PseudoPoly

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SizeExpr:
    """Either ``v`` (base is None) or ``base - v``."""

    base: SizeBase | None = None

    def value(self, n: int, v):
        if self.base is None:
            return v
        return self.base.value(n) - v

    def text(self) -> str:
        return "v" if self.base is None else f"{self.base.text()}-v"


@dataclass(frozen=True)
class Branch:
    prob: float
    pre_cost: PseudoPoly
    pre_expr: lrec.Expr
    dist: lrec.Dist
    r: int
    size1: SizeExpr
    size2: SizeExpr | None = None

    def cost(self, n: int) -> float:
        return lrec.eval_expr(self.pre_expr, {"n": n})


@dataclass(frozen=True)
class CanonicalPrr:
    c_p: int
    branches: tuple

    def to_json(self) -> str:
        rows = []
        for b in self.branches:
            rows.append({
                "prob": b.prob,
                "pre_cost": str(b.pre_cost),
                "dist": lrec._dist_text(b.dist),
                "r": b.r,
                "size1": b.size1.text(),
                "size2": b.size2.text() if b.size2 else None,
            })
        return json.dumps({"c_p": self.c_p, "branches": rows}, indent=2)

    @property
    def single_recursion(self) -> bool:
        return all(b.r == 1 for b in self.branches)


def to_canonical(ast: PrrAst) -> CanonicalPrr:
    out: list[Branch] = []
    _flatten(ast.body, 1.0, out)
    kept = []
    for b in out:
        if b.prob < 1e-12:
            log.warning("dropping branch with probability %g", b.prob)
            continue
        kept.append(b)
    return CanonicalPrr(ast.c_p, tuple(kept))


def _flatten(cmd, prob: float, out: list):
    if isinstance(cmd, Choice):
        for p, sub in cmd.arms:
            _flatten(sub, prob * lrec.const_value(p), out)
        return
    assert isinstance(cmd, Sample)
    body = cmd.body
    pre_poly = lrec.expr_to_poly(body.pre_cost, {"n": "n"}, rounding="upper")
    if body.calls == "v":
        r, s1, s2 = 1, SizeExpr(None), None
    elif body.calls == "size-v":
        r, s1, s2 = 1, SizeExpr(body.size_base), None
    else:
        r, s1, s2 = 2, SizeExpr(None), SizeExpr(body.size_base)
    out.append(Branch(prob, pre_poly, body.pre_cost, cmd.dist, r, s1, s2))


# ---------------------------------------------------------------------------
# distribution supports


def support(dist, n: int):
    """Values and probabilities of the sample variable at size n."""
    return _support_cached(dist, int(n))


@lru_cache(maxsize=4096)
def _support_cached(dist, n: int):
    if isinstance(dist, Uniform):
        if n <= 0:
            return np.zeros(1, dtype=np.int64), np.ones(1)
        return np.arange(n, dtype=np.int64), np.full(n, 1.0 / n)
    if isinstance(dist, MUniform):
        if n <= 0:
            return np.zeros(1, dtype=np.int64), np.ones(1)
        lo = (n - 1) // 2 if n % 2 else n // 2
        vals = np.arange(lo, n, dtype=np.int64)
        probs = np.full(len(vals), 2.0 / n)
        if n % 2:
            probs[0] = 1.0 / n
        return vals, probs
    if isinstance(dist, Discrete):
        vals, probs = [], []
        for p, e in dist.arms:
            x = lrec.eval_expr(e, {"n": n})
            vals.append(int(round(x)))
            probs.append(lrec.const_value(p))
        return np.array(vals, dtype=np.int64), np.array(probs)
    if isinstance(dist, PiecewiseUniform):
        vals, probs = [], []
        for lo, hi, w in dist.pieces:
            a = int(round(lrec.eval_expr(lo, {"n": n})))
            b = int(round(lrec.eval_expr(hi, {"n": n})))
            if b < a:
                continue
            k = b - a + 1
            vals.append(np.arange(a, b + 1, dtype=np.int64))
            probs.append(np.full(k, lrec.const_value(w) / k))
        if not vals:
            return np.zeros(1, dtype=np.int64), np.ones(1)
        return np.concatenate(vals), np.concatenate(probs)
    raise TypeError(dist)


def branch_outcomes(b: Branch, n: int):
    """(probabilities, size1 array, size2 array or None) for branch b at n."""
    vals, probs = support(b.dist, n)
    s1 = b.size1.value(n, vals)
    s2 = b.size2.value(n, vals) if b.size2 is not None else None
    return probs * b.prob, s1, s2


def self_loop_free(prr: CanonicalPrr) -> bool:
    return all(not isinstance(b.dist, Discrete) or b.r == 2 for b in prr.branches)


def mean_pre_cost(prr: CanonicalPrr, n: int) -> float:
    return sum(b.prob * b.cost(n) for b in prr.branches)


def isclose_one(x: float) -> bool:
    return math.isclose(x, 1.0, abs_tol=1e-9)
