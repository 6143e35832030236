"""Shared generators for the randomized decision-procedure suites."""

import random

import numpy as np

from prrtail.decider import decide
from prrtail.strengthener import CanonicalConstraint, Term
from prrtail.sympoly import PseudoPoly, derivative, eval_numeric, leading_monomial, limit_at_infinity, negative_lb

ALPHA_GRID = [2.0 ** k for k in range(6, 21)]
N_MAX = 10_000

# alpha shapes whose value at 2^20 is within 1e-6 of the limit (or tiny)
_ALPHA_SHAPES = [(0, 0), (-1, 0), (1, 0), (1, 1), (-1, 1)]
_N_SHAPES = [(1, 0), (0, 1), (0, 0), (-1, 0), (0, -1), (1, 1)]


def random_constraint(rng: random.Random) -> CanonicalConstraint:
    terms = []
    for _ in range(rng.randint(1, 3)):
        f = PseudoPoly.const(rng.uniform(-3, 0.5))
        if rng.random() < 0.6:
            a = rng.choice(_ALPHA_SHAPES)
            c = rng.uniform(0.5, 2.0)
            sign = -1 if a in ((1, 0), (1, 1)) else rng.choice((-1, 1))
            f = f + PseudoPoly.mono(sign * c, alpha=a)
        g = PseudoPoly()
        shapes = rng.sample(_N_SHAPES, rng.randint(1, 3))
        lead = max(shapes)
        for s in shapes:
            c = rng.uniform(0.1, 3.0)
            if s == lead and s > (0, 0):
                c = -c
            elif rng.random() < 0.5:
                c = -c
            g = g + PseudoPoly.mono(c, n=s)
        terms.append(Term(rng.uniform(0.05, 1.0), f, g))
    return CanonicalConstraint(tuple(terms), rng.randint(2, 4))


def grid_values(q: CanonicalConstraint, alpha: float) -> np.ndarray:
    ns = np.arange(q.c_p, N_MAX + 1, dtype=float)
    ln = np.log(ns)
    total = np.zeros_like(ns)
    for t in q.terms:
        g = np.zeros_like(ns)
        for s, c in t.g_n.terms.items():
            g += c * ns ** s[2] * ln ** s[3]
        with np.errstate(over="ignore"):
            total += t.gamma * np.exp(t.f_alpha.eval(alpha=alpha) + g)
    return total


def limit_value(q: CanonicalConstraint, alpha: float) -> float:
    """Q_L(alpha, n) as n -> infinity."""
    total = 0.0
    for t in q.terms:
        lim = limit_at_infinity(t.g_n, "n")
        if lim.kind == "-inf":
            continue
        total += t.gamma * np.exp(t.f_alpha.eval(alpha=alpha) + lim.value)
    return total


def random_n_poly(rng: random.Random) -> PseudoPoly:
    p = PseudoPoly()
    for _ in range(rng.randint(1, 4)):
        p = p + PseudoPoly.mono(rng.uniform(-5, 5), n=(rng.randint(-2, 2), rng.randint(-2, 2)))
    return p


def negative_lb_scan(count: int, seed: int):
    """(failures, finite thresholds checked); scans 3000 integers past T plus powers of ten."""
    rng = random.Random(seed)
    bad, checked = [], 0
    for _ in range(count):
        p = random_n_poly(rng)
        if p.is_zero():
            continue
        T = negative_lb(p)
        lead = leading_monomial(p, "n")
        if T == float("inf"):
            if lead.coeff <= 0:
                bad.append((str(p), T))
            continue
        ns = list(range(int(T), int(T) + 3000)) + [10 ** e for e in range(4, 13)]
        for n in ns:
            if n >= T and eval_numeric(p, {"n": float(n)}) > 1e-9 * max(1.0, abs(lead.coeff) * n ** 2):
                bad.append((str(p), T, n))
                break
        checked += 1
    return bad, checked


def derivative_fd_check(count: int, seed: int, rel: float = 1e-5):
    rng = random.Random(seed)
    bad = []
    for _ in range(count):
        p = random_n_poly(rng)
        d = derivative(p, "n")
        n = rng.uniform(3, 1000)
        h = 1e-4 * n
        fd = (p.eval(n=n + h) - p.eval(n=n - h)) / (2 * h)
        scale = sum(abs(c) * abs(PseudoPoly({s: 1.0}).eval(n=n)) for s, c in p.terms.items()) / n
        if abs(fd - d.eval(n=n)) > rel * max(abs(d.eval(n=n)), scale):
            bad.append((str(p), n))
    return bad


def run_random_suite(count=1000, seed=2024):
    """(soundness violations, completeness violations, number accepted).

    Soundness: an accepted constraint stays <= 1 + 1e-6 at alpha = 2^20 on
    every n in [c_p, 10^4].  Completeness: a rejected constraint must not
    have margin <= 0.99, the margin being the largest value over the alpha
    grid, the n grid and the n -> infinity limit.
    """
    rng = random.Random(seed)
    unsound, incomplete, accepted = [], [], 0
    for i in range(count):
        q = random_constraint(rng)
        verdict = decide(q).verdict
        at_top = grid_values(q, ALPHA_GRID[-1])
        if verdict:
            accepted += 1
            if at_top.max() > 1 + 1e-6:
                unsound.append(i)
        else:
            margin = max(max(grid_values(q, a).max(), limit_value(q, a)) for a in ALPHA_GRID)
            if margin <= 0.99:
                incomplete.append(i)
    return unsound, incomplete, accepted
