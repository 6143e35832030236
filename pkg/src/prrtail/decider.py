"""Decision procedure for canonical constraints.

Question: for all sufficiently large alpha and every n >= c_p, is

    Q(alpha, n) = sum_i gamma_i * exp(f_i(alpha) + g_i(n)) <= 1 ?

Past T_n every g_i is non-increasing, so only the sizes in [start, T_n]
need a look; at each of them the answer is the alpha-limit of Q.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ScanCapExceeded
from .strengthener import CanonicalConstraint
from .sympoly import (
    PseudoPoly,
    derivative_n,
    leading_monomial,
    limit_at_infinity,
    negative_lb,
)

EPS_DECIDE = 1e-9
SCAN_LIMIT = 5_000_000


@dataclass
class DecideReport:
    verdict: bool
    T_n: float = 0
    per_n_limits: list = field(default_factory=list)
    failure_witness: tuple | None = None
    reason: str = ""

    def to_json(self) -> str:
        return json.dumps({
            "verdict": self.verdict,
            "T_n": self.T_n if math.isfinite(self.T_n) else "inf",
            "per_n_limits": [[n, r if math.isfinite(r) else "inf"] for n, r in self.per_n_limits],
            "failure_witness": self.failure_witness,
            "reason": self.reason,
        })


def _settles_from_below(h: PseudoPoly) -> bool:
    """h(alpha) minus its constant part is zero or eventually negative."""
    rest = h - h.const_value()
    if rest.is_zero():
        return True
    return leading_monomial(rest, "alpha").coeff < 0


def _alpha_info(f: PseudoPoly):
    """(limit kind, finite limit, settles-from-below) of an alpha polynomial."""
    lim = limit_at_infinity(f, "alpha")
    return lim.kind, (lim.value if lim.is_finite else 0.0), (lim.is_finite and _settles_from_below(f))


def _judge(R: float, exact_ok: bool) -> bool:
    if R < 1 - EPS_DECIDE:
        return True
    return R <= 1 + EPS_DECIDE and exact_ok


def decide(q: CanonicalConstraint, keep_limits: bool = False) -> DecideReport:
    """Accept iff the constraint holds for large alpha at every n >= start.

    The R = 1 boundary is accepted only when every contributing term has a
    finite alpha-limit and reaches it from below or is constant in alpha;
    a term that decays to zero still adds a positive amount, so it blocks
    acceptance at the boundary.
    """
    rep = DecideReport(False)
    limits = []

    # exact prefix below the symbolic range
    for s in q.exact:
        R = 0.0
        ok = True
        for i, (g, h) in enumerate(s.terms):
            kind, val, below = _alpha_info(h)
            if kind == "+inf":
                rep.failure_witness = (s.n, i)
                rep.per_n_limits = limits
                rep.reason = f"exact slice n={s.n}: term {i} diverges in alpha"
                return rep
            if kind == "-inf":
                ok = False
                continue
            R += g * math.exp(val)
            ok = ok and below
        limits.append((s.n, R))
        if not _judge(R, ok):
            rep.failure_witness = (s.n, None)
            rep.per_n_limits = limits
            rep.reason = f"exact slice n={s.n}: limit {R:.6g}"
            return rep

    terms = q.terms
    start = q.start
    # step 1: n-limits and the point past which every g_n is monotone
    T = start
    rising = [False] * len(terms)
    g_lim = [0.0] * len(terms)
    for i, t in enumerate(terms):
        lim = limit_at_infinity(t.g_n, "n")
        if lim.kind == "+inf":
            rep.failure_witness = (None, i)
            rep.T_n = math.inf
            rep.per_n_limits = limits
            rep.reason = f"term {i}: g_n = {t.g_n} is unbounded"
            return rep
        if t.g_n.is_const():
            continue
        d = derivative_n(t.g_n)
        if leading_monomial(d, "n").coeff > 0:
            # increases towards a finite limit
            rising[i] = True
            g_lim[i] = lim.value
            T = max(T, negative_lb(-d, start=max(start, 2)))
        else:
            T = max(T, negative_lb(d, start=max(start, 2)))
    rep.T_n = T
    if T - start > SCAN_LIMIT:
        raise ScanCapExceeded(f"scan range [{start}, {T}] too large")

    # step 2: alpha-limits at each n in [start, T]
    infos = [_alpha_info(t.f_alpha) for t in terms]
    for i, (kind, _, _) in enumerate(infos):
        if kind == "+inf":
            rep.failure_witness = (start, i)
            rep.per_n_limits = limits
            rep.reason = f"term {i}: f_alpha = {terms[i].f_alpha} diverges"
            return rep
    boundary_ok = all(kind != "-inf" and below for kind, _, below in infos)
    lo = start
    hi = int(T)
    while True:
        ns = np.arange(lo, hi + 1, dtype=float)
        R = np.zeros_like(ns)
        with np.errstate(over="ignore"):
            for t, (kind, val, _) in zip(terms, infos):
                if kind != "-inf":
                    R += t.gamma * np.exp(val + _eval_n(t.g_n, ns))
        if keep_limits or len(limits) + len(ns) <= 64:
            limits += list(zip(ns.astype(int).tolist(), R.tolist()))
        good = R < 1 - EPS_DECIDE
        bad = ~good if not boundary_ok else ~good & ~(R <= 1 + EPS_DECIDE)
        if bad.any():
            k = int(np.argmax(bad))
            rep.failure_witness = (int(ns[k]), None)
            rep.per_n_limits = limits
            rep.reason = f"limit {R[k]:.6g} at n={int(ns[k])}"
            return rep
        if not any(rising):
            break
        # beyond hi: falling terms stay below their value at hi, rising ones below their limit
        tail = 0.0
        for i, (t, (kind, val, _)) in enumerate(zip(terms, infos)):
            if kind == "-inf":
                continue
            g = g_lim[i] if rising[i] else float(_eval_n(t.g_n, np.array([float(hi)]))[0])
            tail += t.gamma * math.exp(val + g)
        if _judge(tail, boundary_ok):
            break
        if hi - start > SCAN_LIMIT:
            rep.failure_witness = (None, None)
            rep.per_n_limits = limits
            rep.reason = f"tail bound {tail:.6g} beyond n={hi}"
            return rep
        lo, hi = hi + 1, 2 * hi
        rep.T_n = hi
    rep.per_n_limits = limits
    rep.verdict = True
    return rep


def _eval_n(g: PseudoPoly, ns: np.ndarray) -> np.ndarray:
    out = np.zeros_like(ns)
    ln = np.log(ns)
    for s, c in g.terms.items():
        u, w = s[2], s[3]
        out += c * ns ** u * ln ** w
    return out


def constraint_value(q: CanonicalConstraint, alpha: float, n: int) -> float:
    return q.value(alpha, n)
