"""Turn the martingale condition for concrete (f, t) into a canonical constraint.

For a candidate pair the condition to establish is, for every n >= c_p,

    sum_i c_i * E_v[ exp(t(n) * (S_i(n) + sum_j f~(size_ij) - f(n))) ] <= 1

where f~ is f above the threshold and 0 below it.  The rewriting rules
over-approximate the left-hand side by a finite sum of separable
exponentials gamma * exp(f_alpha(alpha) + g_n(n)), which the decider then
settles.

Two regimes are kept apart.  Sizes n >= n0 go through the symbolic rules.
Sizes in [c_p, n0) are evaluated exactly, one alpha-polynomial per outcome;
the decider treats those slices just like the scanned prefix of the
symbolic part.  Using n0 instead of c_p inside the log and sup/inf rules only tightens the
constants those rules introduce.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import lrec
from .canonicalizer import Branch, CanonicalPrr, SizeExpr, support
from .errors import NonPositiveW, StrengtheningFailure
from .lrec import Discrete, MUniform, PiecewiseUniform, SizeBase, Uniform
from .sympoly import (
    ALPHA,
    LN_ALPHA,
    LN_N,
    N,
    ONE,
    ZERO,
    PseudoPoly,
    is_superconstant,
    leading_monomial,
    monotonicity_class,
    substitute,
)

DEFAULT_N0 = 32
DEFAULT_Q = 8


# ---------------------------------------------------------------------------
# output types


@dataclass(frozen=True)
class Term:
    gamma: float
    f_alpha: PseudoPoly
    g_n: PseudoPoly

    def value(self, alpha: float, n: float) -> float:
        return self.gamma * math.exp(self.f_alpha.eval(alpha=alpha) + self.g_n.eval(n=n))

    def to_dict(self) -> dict:
        return {"gamma": self.gamma, "f_alpha": str(self.f_alpha), "g_n": str(self.g_n)}


@dataclass(frozen=True)
class ExactSlice:
    """Exact left-hand side at one size n: sum of gamma * exp(h(alpha))."""

    n: int
    terms: tuple  # of (gamma, PseudoPoly over alpha)

    def value(self, alpha: float) -> float:
        return sum(g * math.exp(h.eval(alpha=alpha)) for g, h in self.terms)


@dataclass(frozen=True)
class CanonicalConstraint:
    terms: tuple
    c_p: int
    n_from: int | None = None
    exact: tuple = ()

    @property
    def start(self) -> int:
        return self.c_p if self.n_from is None else self.n_from

    def value(self, alpha: float, n: int) -> float:
        """Numeric Q_L(alpha, n); uses the exact slice below the symbolic range."""
        if n < self.start:
            for s in self.exact:
                if s.n == n:
                    return s.value(alpha)
        return sum(t.value(alpha, n) for t in self.terms)

    def check_structure(self):
        for t in self.terms:
            if not t.gamma > 0:
                raise StrengtheningFailure(f"non-positive gamma {t.gamma}")
            if t.f_alpha.symbols() - {"alpha"} or t.g_n.symbols() - {"n"}:
                raise StrengtheningFailure("exponent is not separable")
            for sig in t.g_n.terms:
                if sig[2] < 0 or (sig[2] == 0 and sig[3] < 0):
                    raise StrengtheningFailure(f"subconstant n-term left in {t.g_n}")

    def to_json(self) -> str:
        return json.dumps({
            "c_p": self.c_p,
            "n_from": self.start,
            "terms": [t.to_dict() for t in self.terms],
            "exact": [{"n": s.n, "terms": [[g, str(h)] for g, h in s.terms]} for s in self.exact],
        }, indent=2)


class Trace:
    """Ordered record of rewriting steps, serialisable to JSON."""

    def __init__(self):
        self.steps: list[dict] = []

    def add(self, rule: str, before, after, note: str = ""):
        row = {"rule": rule, "before": str(before), "after": str(after)}
        if note:
            row["note"] = note
        self.steps.append(row)

    def to_json(self) -> str:
        return json.dumps(self.steps, indent=2)


def _log(trace, rule, before, after, note=""):
    """Record a step; ``before``/``after`` may be callables so the text is
    only built when a trace is actually being kept."""
    if trace is None:
        return
    if callable(before):
        before = before()
    if callable(after):
        after = after()
    trace.add(rule, before, after, note)


# ---------------------------------------------------------------------------
# small helpers


def _n_sup(u: int, w: int, n0: int) -> float:
    """sup of n^u ln^w n over n >= n0, for a subconstant monomial."""
    cls = monotonicity_class(PseudoPoly.mono(1.0, n=(u, w)))
    at = max(float(n0), cls.turn or 0.0) if cls.kind == "UpThenDown" else float(n0)
    return at ** u * math.log(at) ** w


def _n_inf(u: int, w: int, n0: int) -> float:
    """inf of n^u ln^w n over n >= n0, for a superconstant monomial."""
    cls = monotonicity_class(PseudoPoly.mono(1.0, n=(u, w)))
    at = max(float(n0), cls.turn or 0.0) if cls.kind == "DownThenUp" else float(n0)
    return at ** u * math.log(at) ** w


def _lead_sign(p: PseudoPoly) -> int:
    """Sign of p(alpha) for all sufficiently large alpha (0 for the zero poly)."""
    if p.is_zero():
        return 0
    return 1 if leading_monomial(p, "alpha").coeff > 0 else -1


def _rename(p: PseudoPoly, src: str, dst: str) -> PseudoPoly:
    i = {"alpha": 0, "n": 2, "v": 4}[src]
    j = {"alpha": 0, "n": 2, "v": 4}[dst]
    out = {}
    for s, c in p.terms.items():
        t = list(s)
        t[j], t[j + 1] = t[i], t[i + 1]
        t[i] = t[i + 1] = 0
        out[tuple(t)] = c
    return PseudoPoly(out)


def _affine(E: PseudoPoly):
    """(a, b) if E = a*n + b, else None."""
    a = b = 0.0
    for s, c in E.terms.items():
        if s == (0, 0, 0, 0, 0, 0):
            b = c
        elif s == (0, 0, 1, 0, 0, 0):
            a = c
        else:
            return None
    return a, b


def _mono_parts(p: PseudoPoly):
    """Split a single monomial into (alpha-part incl. coefficient, (u, w))."""
    m = p.single()
    return PseudoPoly({m.sig[:2] + (0, 0, 0, 0): m.coeff}), (m.sig[2], m.sig[3])


def log_upper(E: PseudoPoly, n0: int, trace=None) -> PseudoPoly:
    """An upper bound on ln(E(n)) valid for n >= n0 (log rule for affine E)."""
    if E.is_monomial() and E.single().coeff > 0:
        return substitute(PseudoPoly.symbol("v", 0, 1), "v", E)
    ab = _affine(E)
    if ab is None or ab[0] <= 0:
        raise StrengtheningFailure(f"cannot bound ln({E})")
    a, b = ab
    if b <= 0:
        out = LN_N + math.log(a)
    else:
        out = LN_N + math.log(min(1.0, a + b / n0))
    _log(trace, "log", lambda: f"ln({E})", out)
    return out


_F_AT_CACHE: dict = {}


def f_at(fbar: PseudoPoly, E: PseudoPoly, c_p: int, n0: int, trace=None) -> PseudoPoly:
    """Upper bound on f~(alpha, E(n)) for n >= n0.

    E must stay >= 1 on that range so that every ln factor is non-negative
    and the rounded-down part of f~ (zero below c_p) is dominated.
    Results are memoised when no trace is requested; templates sharing an
    f-part all hit the same entries.
    """
    if trace is not None:
        return _f_at(fbar, E, c_p, n0, trace)
    key = (fbar, E, c_p, n0)
    hit = _F_AT_CACHE.get(key)
    if hit is None:
        if len(_F_AT_CACHE) > 50_000:
            _F_AT_CACHE.clear()
        hit = _F_AT_CACHE[key] = _f_at(fbar, E, c_p, n0, None)
    return hit


def _f_at(fbar: PseudoPoly, E: PseudoPoly, c_p: int, n0: int, trace=None) -> PseudoPoly:
    if E.is_const():
        s = E.const_value()
        if s < c_p:
            return ZERO
        return substitute(fbar, "n", E)
    ab = _affine(E)
    if ab is not None:
        a, b = ab
        if a < 0 or a * n0 + b < 1:
            raise StrengtheningFailure(f"size {E} may drop below 1")
    alpha_part, (u, w) = _mono_parts(fbar)
    if w < 0:
        raise StrengtheningFailure("negative ln power in f")
    out = alpha_part * (E ** u)
    if w:
        out = out * log_upper(E, n0, trace) ** w
    return out


# ---------------------------------------------------------------------------
# from a raw exponent to separable terms


def to_separable(X: PseudoPoly, n0: int, trace=None) -> tuple[PseudoPoly, PseudoPoly]:
    """Split X(alpha, n) into f(alpha) + g(n) with X <= f + g for n >= n0.

    Each n-monomial N(n) with alpha-coefficient A(alpha) is handled by sign:
    constant A goes to g; a subconstant N with A eventually positive is
    bounded by its supremum and one with A eventually negative is
    dropped; a superconstant N whose non-constant coefficient is eventually
    negative is bounded by its infimum.  Anything else mixes alpha and n
    irreparably and fails.
    """
    if "v" in X.symbols():
        raise StrengtheningFailure("v left in exponent")
    f_alpha = ZERO
    g_n = ZERO
    for (u, w), A in X.split_by("n").items():
        if (u, w) == (0, 0):
            f_alpha = f_alpha + A
            continue
        Nmono = PseudoPoly.mono(1.0, n=(u, w))
        if is_superconstant(u, w):
            a0 = A.const_value()
            rest = A - a0
            if a0:
                g_n = g_n + Nmono * a0
            if rest.is_zero():
                continue
            if _lead_sign(rest) > 0:
                raise StrengtheningFailure(f"cross term ({rest})*{Nmono} grows with n")
            lo = _n_inf(u, w, n0)
            f_alpha = f_alpha + rest * lo
            _log(trace, "sup-inf", lambda: f"({rest})*{Nmono}", rest * lo, "superconstant, bounded at its infimum")
        else:
            sgn = _lead_sign(A)
            if sgn <= 0:
                _log(trace, "sup-inf", lambda: f"({A})*{Nmono}", 0, "eventually non-positive, dropped")
                continue
            hi = _n_sup(u, w, n0)
            f_alpha = f_alpha + A * hi
            _log(trace, "sup-inf", lambda: f"({A})*{Nmono}", A * hi)
    return f_alpha, g_n


def prefactor_terms(pref: PseudoPoly, n0: int, trace=None) -> list[tuple[float, PseudoPoly]]:
    """Rewrite each positive monomial of a prefactor as gamma * exp(logs).

    ln factors are removed first (1 <= ln alpha <= alpha, ln n0 <= ln n <= n);
    then gamma * alpha^a * n^u becomes gamma * exp(a ln alpha + u ln n).
    Negative monomials only lower the value and are dropped.
    """
    out = []
    for m in pref.monomials():
        if m.coeff <= 0:
            continue
        a, b, u, w = m.sig[0], m.sig[1], m.sig[2], m.sig[3]
        gamma = m.coeff
        if b > 0:
            a += b
        if w > 0:
            u += w
        elif w < 0:
            gamma *= math.log(n0) ** w
        logs = LN_ALPHA * a + LN_N * u
        _log(trace, "move-to-exponent", m, lambda: f"{gamma:g}*exp({logs})")
        out.append((gamma, logs))
    return out


def finalize(gamma: float, pref: PseudoPoly, X: PseudoPoly, n0: int, trace=None) -> list[Term]:
    out = []
    for g, logs in prefactor_terms(pref, n0, trace):
        fa, gn = to_separable(X + logs, n0, trace)
        out.append(Term(gamma * g, fa, gn))
    return out


# ---------------------------------------------------------------------------
# Case I: finite-support discrete distributions


def _size_bounds(size: SizeExpr, value: lrec.Expr):
    """Upper bound (pseudo-poly in n) on the passed size for one arm value."""
    up = lrec.expr_to_poly(value, {"n": "n"}, rounding="upper", sign=1)
    if size.base is None:
        return up
    lo = lrec.expr_to_poly(value, {"n": "n"}, rounding="upper", sign=-1)
    return base_upper(size.base) - lo


def base_upper(base: SizeBase) -> PseudoPoly:
    out = N / base.b + base.c
    if base.kind == "ceil" and base.b > 1:
        out = out + (base.b - 1) / base.b
    return out


def _superadditive(fbar: PseudoPoly) -> bool:
    _, (u, w) = _mono_parts(fbar)
    return u >= 1 and w >= 0


def strengthen_branch_discrete(branch: Branch, fbar, tbar, c_p: int = 1, n0: int = DEFAULT_N0,
                               trace=None) -> list[Term]:
    """Case I: one exponential per arm, S2-D first, S1-D as the fallback."""
    if not isinstance(branch.dist, Discrete):
        raise TypeError("discrete branch expected")
    S = branch.pre_cost
    out = []
    for prob_e, val_e in branch.dist.arms:
        prob = lrec.const_value(prob_e)
        if prob <= 0:
            continue
        sizes = [_size_bounds(branch.size1, val_e)]
        if branch.size2 is not None:
            sizes.append(_size_bounds(branch.size2, val_e))
        try:
            inner = S - fbar
            for E in sizes:
                inner = inner + f_at(fbar, E, c_p, n0, trace)
            X = tbar * inner
            _log(trace, "S2-D", lambda: f"arm {lrec.expr_text(val_e)}", X)
            out += finalize(prob, ONE, X, n0, trace)
            continue
        except StrengtheningFailure as exc:
            _log(trace, "S2-D", lambda: f"arm {lrec.expr_text(val_e)}", "failed", str(exc))
        if branch.r == 1 or _superadditive(fbar):
            X = tbar * S
        else:
            X = tbar * (S + fbar)
        _log(trace, "S1-D", lambda: f"arm {lrec.expr_text(val_e)}", X)
        out += finalize(prob, ONE, X, n0, trace)
    return out


# ---------------------------------------------------------------------------
# Case II: integrals over uniform-like distributions


def exp_integral(exponent: PseudoPoly, upper: PseudoPoly) -> tuple[PseudoPoly, PseudoPoly]:
    """Bound sum_{v=0}^{U-1} exp(exponent(v)) by prefactor * exp(exponent_out).

    The v-part must be one monomial W * v^d * ln^l v with W > 0 (plus an
    optional v-free part that passes through).  It is lifted to v or ln v
    by evaluating the remaining factor at v = U, then one of three closed
    forms applies:

        W*v      ->  exp(U*W) / W
        W*ln v   ->  U * exp(W*ln U) / W
        W        ->  U * exp(W)

    The v = 0 summand (where f~ vanishes) is absorbed by the dropped
    "-1" and by W^2 <= U^(W+1), so the bounds hold for U >= 2.
    """
    groups = exponent.split_by("v")
    base = groups.pop((0, 0), ZERO)
    if not groups:
        return upper, base
    if len(groups) > 1:
        raise StrengtheningFailure("more than one v-monomial in the integrand")
    (d, l), W = next(iter(groups.items()))
    if any(c <= 0 for c in W.terms.values()):
        raise NonPositiveW(f"integrand coefficient {W} is not positive")
    if d < 0 or l < 0:
        raise StrengtheningFailure(f"v^{d} ln^{l} v is not monotone")
    ln_u = substitute(PseudoPoly.symbol("v", 0, 1), "v", upper)
    if d >= 1 and (d, l) != (1, 0):
        W = W * upper ** (d - 1) * ln_u ** l
        d, l = 1, 0
    elif d == 0 and l > 1:
        W = W * ln_u ** (l - 1)
        l = 1
    if not W.is_monomial():
        raise NonPositiveW(f"cannot invert {W}")
    if (d, l) == (1, 0):
        return W.inverse(), base + upper * W
    return upper * W.inverse(), base + W * ln_u


def _density(dist, n0: int):
    """Upper bound on n times the per-point mass of a (m)uniform draw."""
    if isinstance(dist, Uniform):
        return 1.0
    if isinstance(dist, MUniform):
        return 2.0
    raise TypeError(dist)


def _f_of_v(fbar: PseudoPoly) -> PseudoPoly:
    return _rename(fbar, "n", "v")


def strengthen_branch_uniform(branch: Branch, fbar, tbar, Q: int = DEFAULT_Q, c_p: int = 1,
                              n0: int = DEFAULT_N0, trace=None) -> list[Term]:
    """Case II: single recursion with a uniform, muniform or piecewise sample."""
    if branch.r != 1:
        raise TypeError("single recursion expected")
    S = branch.pre_cost
    Y = tbar * _f_of_v(fbar)
    pref, E = exp_integral(Y, N)
    _log(trace, "integral", Y, lambda: f"({pref})*exp({E})")
    tail = tbar * (S - fbar)
    out: list[Term] = []
    extra_self = 0.0   # weight of outcomes whose size equals n
    extra_zero = 0.0   # weight of outcomes whose size is negative

    size = branch.size1
    if size.base is not None:
        if size.base.b != 1:
            raise StrengtheningFailure("base-v with a divided base is not supported")
        c = size.base.c
        if c > 0:
            raise StrengtheningFailure("size may exceed n")
        if c == 0:
            extra_self = 1.0
        else:
            extra_zero = float(-c - 1)

    dist = branch.dist
    if isinstance(dist, (Uniform, MUniform)):
        w = _density(dist, n0)
        out += finalize(w, pref * N.inverse(), E + tail, n0, trace)
        if extra_self:
            out += finalize(w * extra_self, N.inverse(), tbar * S, n0, trace)
        if extra_zero:
            out += finalize(w * extra_zero, N.inverse(), tail, n0, trace)
        return out

    if not isinstance(dist, PiecewiseUniform):
        raise TypeError(dist)
    if size.base is not None:
        raise StrengtheningFailure("piecewise sampling with base-v is not supported")
    for lo_e, hi_e, w_e in dist.pieces:
        w = lrec.const_value(w_e)
        if w <= 0:
            continue
        hi_lo = lrec.expr_to_poly(hi_e, {"n": "n"}, rounding="upper", sign=-1)
        lo_up = lrec.expr_to_poly(lo_e, {"n": "n"}, rounding="upper", sign=1)
        length = _affine(hi_lo - lo_up + 1)
        if length is not None and length[0] > 0:
            a, b = length
            scale = a + min(b, 0.0) / n0
            if scale <= 0:
                raise StrengtheningFailure("piece length not bounded below")
            _log(trace, "piece", lambda: f"{lrec.expr_text(lo_e)}..{lrec.expr_text(hi_e)}", lambda: f"density <= {w / scale:g}/n")
            out += finalize(w / scale, pref * N.inverse(), E + tail, n0, trace)
        else:
            # a short piece: every point is at most the largest size, f~ <= f(n)
            _log(trace, "piece", lambda: f"{lrec.expr_text(lo_e)}..{lrec.expr_text(hi_e)}", "max over piece")
            out += finalize(w, ONE, tbar * S, n0, trace)
    return out


def strengthen_branch_dnc(branch: Branch, fbar, tbar, Q: int = DEFAULT_Q, c_p: int = 1,
                          n0: int = DEFAULT_N0, trace=None) -> list[Term]:
    """Two recursive calls on v and H - v with H = n + c.

    Linear (or constant) f makes f(v) + f(H - v) independent of v, so the
    expectation is evaluated exactly.  For convex f the summand is symmetric
    about H/2 and falls towards the middle; the sum is at most twice the
    half-sum, and the half-sum is bounded by its v = 0 term plus a Q-part
    left-endpoint sum of the integral.  Concave f uses f~ <= f(n) for both
    calls.
    """
    if branch.r != 2:
        raise TypeError("divide-and-conquer branch expected")
    if isinstance(branch.dist, Discrete):
        return strengthen_branch_discrete(branch, fbar, tbar, c_p, n0, trace)
    if not isinstance(branch.dist, (Uniform, MUniform)):
        raise StrengtheningFailure("divide-and-conquer needs uniform or muniform sampling")
    base = branch.size2.base
    if base.b != 1 or base.c > -1:
        raise StrengtheningFailure("only H = n + c with c <= -1 is supported")
    c = base.c
    H = N + c
    w = _density(branch.dist, n0)
    S = branch.pre_cost
    _, (u, l) = _mono_parts(fbar)
    out: list[Term] = []
    if c < -1:
        # v > H: the second call is below zero, f~ = 0 there
        out += finalize(w * (-c - 1), N.inverse(), tbar * S, n0, trace)

    if u == 0:
        X = tbar * (S + fbar)
        _log(trace, "dnc-S1", "f~(v) + f~(H-v)", "2*f(n)")
        return out + finalize(1.0, ONE, X, n0, trace)
    if u == 1 and l == 0:
        X = tbar * (S + f_at(fbar, H, c_p, n0, trace) - fbar)
        _log(trace, "dnc-linear", "f(v) + f(H-v)", "f(H)")
        return out + finalize(1.0, ONE, X, n0, trace)

    if H.eval(n=n0) / (2 * Q) < 1:
        raise StrengtheningFailure("partition points fall below 1 at n0")
    f_H = f_at(fbar, H, c_p, n0, trace)
    out += finalize(2 * w, N.inverse(), tbar * (S + f_H - fbar), n0, trace)
    for j in range(Q):
        if j == 0:
            inner = f_H
        else:
            x = H * (j / (2 * Q))
            inner = f_at(fbar, x, c_p, n0, trace) + f_at(fbar, H - x, c_p, n0, trace)
        X = tbar * (S + inner - fbar)
        _log(trace, "dnc-part", lambda: f"j={j}/{Q}", X)
        out += finalize(w / Q, ONE, X, n0, trace)
    return out


# ---------------------------------------------------------------------------
# whole PRR


def combine_branches(per_branch, c_p: int, n_from: int | None = None, exact=()) -> CanonicalConstraint:
    terms = []
    for prob, ts in per_branch:
        for t in ts:
            terms.append(Term(prob * t.gamma, t.f_alpha, t.g_n))
    q = CanonicalConstraint(tuple(terms), c_p, n_from, tuple(exact))
    q.check_structure()
    return q


def strengthen_branch(branch: Branch, fbar, tbar, Q: int = DEFAULT_Q, c_p: int = 1,
                      n0: int = DEFAULT_N0, trace=None) -> list[Term]:
    if isinstance(branch.dist, Discrete):
        return strengthen_branch_discrete(branch, fbar, tbar, c_p, n0, trace)
    if branch.r == 2:
        return strengthen_branch_dnc(branch, fbar, tbar, Q, c_p, n0, trace)
    return strengthen_branch_uniform(branch, fbar, tbar, Q, c_p, n0, trace)


def strengthen(prr: CanonicalPrr, fbar: PseudoPoly, tbar: PseudoPoly, Q: int = DEFAULT_Q,
               n0: int | None = None, exact: bool = True, trace=None) -> CanonicalConstraint:
    """Canonical constraint for the whole PRR at concrete (f, t)."""
    n0 = max(prr.c_p, DEFAULT_N0 if n0 is None else n0)
    per = [(b.prob, strengthen_branch(b, fbar, tbar, Q, prr.c_p, n0, trace)) for b in prr.branches]
    slices = exact_slices(prr, fbar, tbar, prr.c_p, n0) if exact else ()
    return combine_branches(per, prr.c_p, n0, slices)


# ---------------------------------------------------------------------------
# exact left-hand side


def _n_factor(p: PseudoPoly, sizes: np.ndarray) -> tuple[PseudoPoly, np.ndarray]:
    """Split a monomial into its alpha part and its n-part evaluated at sizes."""
    alpha_part, (u, w) = _mono_parts(p)
    x = sizes.astype(float)
    with np.errstate(divide="ignore", invalid="ignore"):
        vals = np.where(x > 0, x ** u * np.log(np.where(x > 0, x, 1.0)) ** w, 0.0)
    return alpha_part, vals


def exact_slices(prr: CanonicalPrr, fbar, tbar, lo: int, hi: int) -> tuple:
    """Exact left-hand side at every n in [lo, hi) as alpha-polynomials."""
    Pf, _ = _n_factor(fbar, np.array([1]))
    Pt, _ = _n_factor(tbar, np.array([1]))
    PtPf = Pt * Pf
    out = []
    for n in range(lo, hi):
        _, tn = _n_factor(tbar, np.array([n]))
        _, fn = _n_factor(fbar, np.array([n]))
        if not np.isfinite(tn[0]):
            raise StrengtheningFailure(f"t is undefined at n={n}")
        acc: dict = {}
        for b in prr.branches:
            vals, probs = support(b.dist, n)
            s1 = b.size1.value(n, vals)
            _, f1 = _n_factor(fbar, s1)
            fs = np.where(s1 >= prr.c_p, f1, 0.0)
            if b.size2 is not None:
                s2 = b.size2.value(n, vals)
                _, f2 = _n_factor(fbar, s2)
                fs = fs + np.where(s2 >= prr.c_p, f2, 0.0)
            a = tn[0] * b.cost(n)
            coef = tn[0] * (fs - fn[0])
            for p, cb in zip(probs * b.prob, coef):
                key = (round(a, 12), round(float(cb), 12))
                acc[key] = acc.get(key, 0.0) + float(p)
        terms = []
        for (a, cb), g in acc.items():
            if g <= 0:
                continue
            terms.append((g, Pt * a + PtPf * cb))
        out.append(ExactSlice(n, tuple(terms)))
    return tuple(out)


def exact_lhs(prr: CanonicalPrr, fbar, tbar, alpha: float, n: int) -> float:
    """E[exp(t (S + sum f~(size) - f(n)))] computed by summing the support."""
    t = tbar.eval(alpha=alpha, n=n)
    fn = fbar.eval(alpha=alpha, n=n)

    def ft(s):
        return fbar.eval(alpha=alpha, n=float(s)) if s >= prr.c_p else 0.0

    total = 0.0
    for b in prr.branches:
        vals, probs = support(b.dist, n)
        S = b.cost(n)
        for v, p in zip(vals, probs):
            inner = S + ft(b.size1.value(n, int(v))) - fn
            if b.size2 is not None:
                inner += ft(b.size2.value(n, int(v)))
            total += b.prob * p * math.exp(t * inner)
    return total


def template_polys(c_f: float, c_t: float, f_exps, t_exps) -> tuple[PseudoPoly, PseudoPoly]:
    """f = c_f a^p ln^q a n^u ln^v n and t likewise."""
    p, q, u, v = f_exps
    fbar = PseudoPoly.mono(c_f, alpha=(p, q), n=(u, v))
    p, q, u, v = t_exps
    tbar = PseudoPoly.mono(c_t, alpha=(p, q), n=(u, v))
    return fbar, tbar


__all__ = [
    "ALPHA", "CanonicalConstraint", "ExactSlice", "Term", "Trace", "combine_branches",
    "exact_lhs", "exact_slices", "exp_integral", "f_at", "finalize", "log_upper",
    "strengthen", "strengthen_branch", "strengthen_branch_discrete", "strengthen_branch_dnc",
    "strengthen_branch_uniform", "template_polys", "to_separable",
]
