"""Template enumeration, the coefficient guess loop and bound assembly."""

from __future__ import annotations

import itertools
import logging
import math
import time
from dataclasses import dataclass, field

from .canonicalizer import CanonicalPrr
from .decider import decide
from .errors import NoBoundFound, PrrError, StrengtheningFailure
from .strengthener import DEFAULT_N0, DEFAULT_Q, combine_branches, exact_slices, strengthen_branch
from .sympoly import PseudoPoly, leading_monomial, to_text

log = logging.getLogger(__name__)

EXPONENT_NAMES = ("p_f", "q_f", "u_f", "v_f", "p_t", "q_t", "u_t", "v_t")


@dataclass(frozen=True, order=True)
class BoundTemplate:
    p_f: int
    q_f: int
    u_f: int
    v_f: int
    p_t: int
    q_t: int
    u_t: int
    v_t: int

    @property
    def f_exps(self):
        return (self.p_f, self.q_f, self.u_f, self.v_f)

    @property
    def t_exps(self):
        return (self.p_t, self.q_t, self.u_t, self.v_t)

    def polys(self, c_f: float, c_t: float) -> tuple[PseudoPoly, PseudoPoly]:
        f = PseudoPoly.mono(c_f, alpha=(self.p_f, self.q_f), n=(self.u_f, self.v_f))
        t = PseudoPoly.mono(c_t, alpha=(self.p_t, self.q_t), n=(self.u_t, self.v_t))
        return f, t

    def text(self) -> str:
        f, t = self.polys(1.0, 1.0)
        return f"f: {to_text(f)}, t: {to_text(t)}"


@dataclass
class CandidateBound:
    template: BoundTemplate
    c_f: float
    c_t: float
    f_bar: PseudoPoly
    t_bar: PseudoPoly
    kappa: PseudoPoly
    bound_exponent: PseudoPoly
    diagnostics: list = field(default_factory=list)
    seconds: float = 0.0

    def text(self) -> str:
        return f"exp({to_text(self.bound_exponent)})"

    def value(self, alpha: float, n: float) -> float:
        return math.exp(self.bound_exponent.eval(alpha=alpha, n=n))

    def log_value(self, alpha: float, n: float) -> float:
        return self.bound_exponent.eval(alpha=alpha, n=n)

    def to_dict(self) -> dict:
        return {
            "template": dict(zip(EXPONENT_NAMES, self.template.f_exps + self.template.t_exps)),
            "c_f": self.c_f,
            "c_t": self.c_t,
            "f_bar": to_text(self.f_bar),
            "t_bar": to_text(self.t_bar),
            "kappa": to_text(self.kappa),
            "bound": self.text(),
            "seconds": self.seconds,
        }


# ---------------------------------------------------------------------------
# templates


def _n_mag(p: PseudoPoly) -> tuple[int, int]:
    return leading_monomial(p, "n").exps("n")


def raw_templates(B: int):
    """All exponent tuples in [-B, B] with u_f, v_f >= 0 and u_t, v_t <= 0."""
    full = range(-B, B + 1)
    nonneg = range(0, B + 1)
    nonpos = range(-B, 1)
    for pf, qf, uf, vf, pt, qt, ut, vt in itertools.product(full, full, nonneg, nonneg, full, full, nonpos, nonpos):
        yield BoundTemplate(pf, qf, uf, vf, pt, qt, ut, vt)


def raw_count(B: int) -> int:
    return (2 * B + 1) ** 4 * (B + 1) ** 4


def _tightness_key(tpl: BoundTemplate, kappa_mag):
    """Sort key, smaller is tried first.

    The bound exponent behaves like -t * alpha * kappa when f sits strictly
    below alpha * kappa, so larger magnitude of t * alpha * kappa means a
    faster decaying bound: compare its n-degree, then its alpha-degree.
    Ties prefer f strictly below alpha * kappa, then the smaller f.
    """
    n_deg = (tpl.u_t + kappa_mag[0], tpl.v_t + kappa_mag[1])
    a_deg = (tpl.p_t + 1, tpl.q_t)
    f_alpha = (tpl.p_f, tpl.q_f)
    f_n = (tpl.u_f, tpl.v_f)
    strictly_below = f_alpha < (1, 0) or f_n < tuple(kappa_mag)
    return (
        tuple(-x for x in n_deg),
        tuple(-x for x in a_deg),
        0 if strictly_below else 1,
        f_alpha,
        f_n,
    )


def enumerate_templates(B: int, ep_sym: PseudoPoly, kappa: PseudoPoly) -> list[BoundTemplate]:
    """Pruned templates in the order they are tried.

    Kept: (p_f, q_f) <= (1, 0) and (p_t, q_t) >= (-1, 0) lexicographically,
    the n-part of f between ep_sym and kappa, and 1/t no larger than kappa.
    """
    ep_mag = _n_mag(ep_sym)
    k_mag = _n_mag(kappa)
    full = range(-B, B + 1)
    f_alpha = [x for x in itertools.product(full, full) if x <= (1, 0)]
    t_alpha = [x for x in itertools.product(full, full) if x >= (-1, 0)]
    f_n = [x for x in itertools.product(range(0, B + 1), repeat=2) if ep_mag <= x <= k_mag]
    t_n = [x for x in itertools.product(range(-B, 1), repeat=2) if (-x[0], -x[1]) <= k_mag]
    out = [BoundTemplate(*fa, *fn, *ta, *tn) for fa, fn, ta, tn in itertools.product(f_alpha, f_n, t_alpha, t_n)]
    out.sort(key=lambda t: (_tightness_key(t, k_mag), t))
    return out


# ---------------------------------------------------------------------------
# checking one (c_f, c_t)


@dataclass
class CheckResult:
    accepted: bool
    stage: str
    detail: str = ""


def check_cond(prr: CanonicalPrr, tpl: BoundTemplate, c_f: float, c_t: float,
               Q: int = DEFAULT_Q, n0: int | None = None) -> CheckResult:
    """Strengthen, then decide; the exact small-n slices are checked last."""
    fbar, tbar = tpl.polys(c_f, c_t)
    n0 = max(prr.c_p, DEFAULT_N0 if n0 is None else n0)
    try:
        per = [(b.prob, strengthen_branch(b, fbar, tbar, Q, prr.c_p, n0)) for b in prr.branches]
        q = combine_branches(per, prr.c_p, n0)
    except (StrengtheningFailure, ZeroDivisionError, OverflowError, ValueError) as exc:
        return CheckResult(False, "strengthen", str(exc))
    rep = decide(q)
    if not rep.verdict:
        return CheckResult(False, "decide", rep.reason)
    try:
        slices = exact_slices(prr, fbar, tbar, prr.c_p, n0)
    except StrengtheningFailure as exc:
        return CheckResult(False, "exact", str(exc))
    rep = decide(combine_branches([], prr.c_p, n0, slices))
    if not rep.verdict:
        return CheckResult(False, "exact", rep.reason)
    return CheckResult(True, "ok")


def coefficient_grid(M: int):
    c_ts = [2.0 ** -k for k in range(0, M + 1)]
    c_fs = [2.0 ** k for k in range(-1, M)]
    return c_ts, c_fs


def bound_decreasing(tpl: BoundTemplate, c_f: float, c_t: float, kappa: PseudoPoly) -> bool:
    """Whether exp(t (f - alpha kappa)) eventually decreases in alpha for every n."""
    fbar, tbar = tpl.polys(c_f, c_t)
    expo = tbar * (fbar - PseudoPoly.symbol("alpha") * kappa)
    groups = expo.split_by("alpha")
    if not groups:
        return False
    lead = max(groups)
    if lead <= (0, 0):
        return False
    coeff = groups[lead]
    return leading_monomial(coeff, "n").coeff < 0 if not coeff.is_zero() else False


def guess_coefficients(tpl: BoundTemplate, prr: CanonicalPrr, M: int, Q: int = DEFAULT_Q,
                       kappa: PseudoPoly | None = None, prefilter: bool = True,
                       diagnostics: list | None = None, n0: int | None = None):
    """First (c_f, c_t) accepted by the doubling/halving loop, or None.

    With ``prefilter`` the most permissive pair is checked first; by the
    monotonicity of the check in both coefficients a rejection there rules
    out the whole template.
    """
    c_ts, c_fs = coefficient_grid(M)
    if prefilter:
        res = check_cond(prr, tpl, c_fs[-1], c_ts[-1], Q, n0)
        if diagnostics is not None:
            diagnostics.append({"template": tpl.text(), "c_f": c_fs[-1], "c_t": c_ts[-1],
                                "accepted": res.accepted, "stage": res.stage, "detail": res.detail})
        if not res.accepted:
            return None
    for c_t in c_ts:
        for c_f in c_fs:
            if kappa is not None and not bound_decreasing(tpl, c_f, c_t, kappa):
                continue
            res = check_cond(prr, tpl, c_f, c_t, Q, n0)
            if diagnostics is not None:
                diagnostics.append({"template": tpl.text(), "c_f": c_f, "c_t": c_t,
                                    "accepted": res.accepted, "stage": res.stage, "detail": res.detail})
            if res.accepted:
                return c_f, c_t
    return None


def assemble_bound(tpl: BoundTemplate, c_f: float, c_t: float, kappa: PseudoPoly) -> CandidateBound:
    fbar, tbar = tpl.polys(c_f, c_t)
    expo = tbar * (fbar - PseudoPoly.symbol("alpha") * kappa)
    return CandidateBound(tpl, c_f, c_t, fbar, tbar, kappa, expo)


def synthesize(prr: CanonicalPrr, kappa: PseudoPoly, ep_sym: PseudoPoly, B: int = 2, M: int = 4,
               Q: int = DEFAULT_Q, all_templates: bool = False, n0: int | None = None,
               prefilter: bool = True):
    """Tightest accepted bound in template order.

    With ``all_templates`` every template is tried and the list of all
    accepted candidates is returned instead of the first one.
    """
    t0 = time.perf_counter()
    diags: list = []
    found = []
    for tpl in enumerate_templates(B, ep_sym, kappa):
        try:
            pair = guess_coefficients(tpl, prr, M, Q, kappa, prefilter, diags, n0)
        except PrrError as exc:  # one bad template never aborts the search
            diags.append({"template": tpl.text(), "accepted": False, "stage": "error", "detail": str(exc)})
            continue
        if pair is None:
            continue
        cand = assemble_bound(tpl, *pair, kappa)
        cand.seconds = time.perf_counter() - t0
        cand.diagnostics = diags
        if not all_templates:
            return cand
        found.append(cand)
    if all_templates and found:
        return found
    raise NoBoundFound(f"no template accepted after {len(diags)} checks")
