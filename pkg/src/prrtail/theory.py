"""Expected runtime oracle, the increment-constant and monotone pre-cost checks, and the closed-form bound.

The closed form is

    Pr[C >= alpha * E[p(n*)]] <= exp(-2 (alpha-1)^2 / (alpha (M - M')^2) * E[p(n*)] / E[S(n*)])

which follows from f = w(alpha) E[p(n)], t = lambda(alpha) / E[S(n)] with
w(alpha) = 2 alpha / (1 + alpha).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .canonicalizer import CanonicalPrr, branch_outcomes, mean_pre_cost
from .errors import DegenerateInterval, DivergentRecurrence, EmptySupport, SizeRangeViolationError
from .sympoly import ALPHA, PseudoPoly, leading_monomial, to_text


@dataclass
class ExpectedRuntime:
    values: np.ndarray
    symbolic_bound: PseudoPoly | None = None

    def __call__(self, n):
        n = np.asarray(n)
        return np.where(n >= 0, self.values[np.clip(n, 0, len(self.values) - 1)], 0.0)

    @property
    def n_max(self) -> int:
        return len(self.values) - 1


def solve_expected_runtime(prr: CanonicalPrr, n_max: int, symbolic_bound: PseudoPoly | None = None) -> ExpectedRuntime:
    """E[p(n)] for n in [0, n_max], solving self-loops as a linear equation."""
    if n_max < prr.c_p:
        raise ValueError("n_max must be at least c_p")
    vals = np.zeros(n_max + 1)
    for n in range(prr.c_p, n_max + 1):
        const = 0.0
        loop = 0.0
        for b in prr.branches:
            probs, s1, s2 = branch_outcomes(b, n)
            const += b.prob * b.cost(n)
            for s in (s1, s2):
                if s is None:
                    continue
                if np.any(s > n):
                    raise SizeRangeViolationError(f"size above n={n}")
                at_n = s == n
                loop += float(probs[at_n].sum())
                below = (~at_n) & (s >= prr.c_p)
                const += float((probs[below] * vals[s[below]]).sum())
        if loop >= 1 - 1e-12:
            raise DivergentRecurrence(f"self-loop probability {loop} at n={n}")
        vals[n] = const / (1 - loop)
    return ExpectedRuntime(vals, symbolic_bound)


def estimate_increment_constants(prr: CanonicalPrr, ep: ExpectedRuntime, n_range) -> tuple[float, float]:
    """(M', M): extremes of (V + sum E[p(s_i)] - E[p(n)]) / E[S(n)] over n_range."""
    lo_n, hi_n = n_range
    hi_n = min(hi_n, ep.n_max)
    lo, hi = math.inf, -math.inf
    for n in range(max(lo_n, prr.c_p), hi_n + 1):
        es = mean_pre_cost(prr, n)
        if es <= 0:
            continue
        for b in prr.branches:
            probs, s1, s2 = branch_outcomes(b, n)
            if len(probs) == 0:
                raise EmptySupport(f"empty support at n={n}")
            tot = b.cost(n) + ep(s1) * (s1 >= prr.c_p)
            if s2 is not None:
                tot = tot + ep(s2) * (s2 >= prr.c_p)
            r = (tot - ep.values[n]) / es
            r = r[probs > 0]
            lo = min(lo, float(r.min()))
            hi = max(hi, float(r.max()))
    if lo is math.inf:
        raise EmptySupport("no sizes in range")
    return lo, hi


def pre_cost_monotone(prr: CanonicalPrr, n_max: int = 1000) -> bool:
    """E[S(n)] non-decreasing on [c_p, n_max]."""
    es = [mean_pre_cost(prr, n) for n in range(prr.c_p, n_max + 1)]
    return all(b >= a - 1e-12 for a, b in zip(es, es[1:]))


def w_of(alpha: float) -> float:
    return 2 * alpha / (1 + alpha)


def lambda_of(alpha: float, m_lo: float, m_hi: float) -> float:
    w = w_of(alpha)
    return 8 * (w - 1) / (w * w * (m_hi - m_lo) ** 2)


@dataclass
class SymbolicBound:
    """u(alpha, n*) = exp(exponent) for the threshold alpha * threshold_scale(n*)."""

    exponent: PseudoPoly
    threshold_scale: PseudoPoly
    ep_sym: PseudoPoly | None = None
    es_sym: PseudoPoly | None = None
    m_lo: float = 0.0
    m_hi: float = 0.0

    def value(self, alpha: float, n: float) -> float:
        return math.exp(self.exponent.eval(alpha=alpha, n=n))

    def log_value(self, alpha: float, n: float) -> float:
        return self.exponent.eval(alpha=alpha, n=n)

    def text(self) -> str:
        return f"exp({to_text(self.exponent)})"

    @property
    def coefficient(self) -> float:
        """c in exp(-c (alpha-1)^2/alpha * r(n)) where r is E[p]/E[S] with its
        constant factor stripped, e.g. 0.70 for QuickSort's ln n."""
        groups = self.exponent.split_by("alpha")
        lead = groups.get((1, 0))
        if lead is None or lead.is_zero():
            return 0.0
        return -max(lead.monomials(), key=lambda m: m.exps("n")).coeff

    # f and t evaluated at a concrete alpha
    def f(self, alpha: float, n: float) -> float:
        return w_of(alpha) * self.ep_sym.eval(n=n)

    def t(self, alpha: float, n: float) -> float:
        return lambda_of(alpha, self.m_lo, self.m_hi) / self.es_sym.eval(n=n)


def monomial_upper(p: PseudoPoly, n_lo: int, n_hi: int = 10**6) -> PseudoPoly:
    """c * lead(p) with p(n) <= c * lead(p)(n) on [n_lo, n_hi], c found by a log-spaced scan.

    Used when E[S(n)] has several terms, so that E[p]/E[S] stays a
    pseudo-polynomial; over-estimating E[S] only weakens the bound.
    """
    if len(p.terms) == 1:
        return p
    lead = leading_monomial(p, "n").as_poly()
    ns = np.unique(np.concatenate([np.arange(max(n_lo, 1), 200),
                                   np.geomspace(200, n_hi, 400).astype(int)]))
    c = max(p.eval(n=float(n)) / lead.eval(n=float(n)) for n in ns)
    return lead * c


def comp_tail_bound(ep_sym: PseudoPoly, es_sym: PseudoPoly, m_lo: float, m_hi: float) -> SymbolicBound:
    if m_hi == m_lo:
        raise DegenerateInterval("M and M' coincide")
    if m_hi < m_lo:
        raise DegenerateInterval("M must not be below M'")
    if es_sym.is_zero():
        raise ZeroDivisionError("E[S(n)] is zero")
    ratio = ep_sym / es_sym
    # (alpha - 1)^2 / alpha = alpha - 2 + 1/alpha
    shape = ALPHA - 2 + ALPHA.inverse()
    expo = shape * ratio * (-2.0 / (m_hi - m_lo) ** 2)
    return SymbolicBound(expo, ep_sym, ep_sym, es_sym, m_lo, m_hi)
