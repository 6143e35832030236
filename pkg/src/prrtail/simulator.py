"""Monte Carlo and exact semantics of a canonical PRR.

The sampler runs the stack machine: pick a branch, draw v, pay S(n),
push the second call (if any) and continue with the first.  All size
dependent quantities are tabulated for 0..n* first, so the hot loop is
the same in the compiled kernel and in the pure-Python twin.

Random numbers come from a counter-based splitmix64 stream keyed by
(seed, run index).  Every run is therefore independent of how the runs
are split between worker threads.
"""

from __future__ import annotations

import csv
import json
import logging
import math
import os
from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.stats import beta as beta_dist

from . import lrec
from ._pykernel import Stream
from ._pykernel import simulate_tables as _py_simulate
from .canonicalizer import CanonicalPrr, branch_outcomes, support
from .errors import SizeRangeViolationError, StateExplosion, StepCapExceeded, UnsupportedShape
from .lrec import Choice, Discrete, MUniform, PiecewiseUniform, PrrAst, Uniform

log = logging.getLogger(__name__)

try:
    from ._kernel import simulate_tables as _c_simulate
    BACKEND = "cython"
except ImportError:  # pragma: no cover - depends on the build
    _c_simulate = None
    BACKEND = "python"

RNG_NAME = "splitmix64-counter"
STEP_CAP = 10**7
CONFIDENCE = 0.99
CHUNK = 4096


# ---------------------------------------------------------------------------
# tables


@dataclass
class Tables:
    n_star: int
    c_p: int
    br_cum: np.ndarray
    br_kind: np.ndarray
    br_r: np.ndarray
    br_s1_minus: np.ndarray
    cost: np.ndarray
    base: np.ndarray
    arm_cum: np.ndarray
    arm_count: np.ndarray
    arm_lo: np.ndarray
    arm_hi: np.ndarray

    def args(self):
        return (self.br_cum, self.br_kind, self.br_r, self.br_s1_minus, self.cost, self.base,
                self.arm_cum, self.arm_count, self.arm_lo, self.arm_hi)


def _as_int(x: float, what: str) -> int:
    k = round(x)
    if abs(x - k) > 1e-9:
        raise SizeRangeViolationError(f"{what} evaluates to non-integer {x}")
    return int(k)


def build_tables(prr: CanonicalPrr, n_star: int) -> Tables:
    branches = prr.branches
    nb = len(branches)
    N = n_star + 1
    probs = np.array([b.prob for b in branches])
    cum = np.cumsum(probs) / probs.sum()
    cum[-1] = 1.0
    kind = np.zeros(nb, dtype=np.int32)
    r = np.array([b.r for b in branches], dtype=np.int32)
    s1_minus = np.array([0 if b.size1.base is None else 1 for b in branches], dtype=np.int32)
    cost = np.zeros((nb, N))
    base = np.zeros((nb, N), dtype=np.int64)
    n_arms = max([len(b.dist.arms) if isinstance(b.dist, Discrete) else
                  len(b.dist.pieces) if isinstance(b.dist, PiecewiseUniform) else 1 for b in branches])
    arm_cum = np.ones((nb, n_arms))
    arm_count = np.ones(nb, dtype=np.int32)
    arm_lo = np.zeros((nb, n_arms, N), dtype=np.int64)
    arm_hi = np.zeros((nb, n_arms, N), dtype=np.int64)
    lo_n = min(prr.c_p, N)
    for k, b in enumerate(branches):
        sb = b.size1.base or (b.size2.base if b.size2 is not None else None)
        for n in range(lo_n, N):
            cost[k, n] = b.cost(n)
            if sb is not None:
                base[k, n] = sb.value(n)
        d = b.dist
        if isinstance(d, Uniform):
            kind[k] = 0
        elif isinstance(d, MUniform):
            kind[k] = 1
        elif isinstance(d, Discrete):
            kind[k] = 2
            w = np.array([lrec.const_value(p) for p, _ in d.arms])
            arm_count[k] = len(w)
            arm_cum[k, :len(w)] = np.cumsum(w) / w.sum()
            for j, (_, e) in enumerate(d.arms):
                for n in range(lo_n, N):
                    val = _as_int(lrec.eval_expr(e, {"n": n}), "discrete arm")
                    arm_lo[k, j, n] = val
        else:
            kind[k] = 3
            w = np.array([lrec.const_value(wt) for _, _, wt in d.pieces])
            arm_count[k] = len(w)
            arm_cum[k, :len(w)] = np.cumsum(w) / w.sum()
            for j, (lo, hi, _) in enumerate(d.pieces):
                for n in range(lo_n, N):
                    a = _as_int(lrec.eval_expr(lo, {"n": n}), "piece bound")
                    c = _as_int(lrec.eval_expr(hi, {"n": n}), "piece bound")
                    if c < a:
                        raise SizeRangeViolationError(f"empty piece [{a},{c}] at n={n}")
                    arm_lo[k, j, n] = a
                    arm_hi[k, j, n] = c
        arm_cum[k, arm_count[k] - 1:] = 1.0
    return Tables(n_star, prr.c_p, cum, kind, r, s1_minus, cost, base, arm_cum, arm_count, arm_lo, arm_hi)


# ---------------------------------------------------------------------------
# sampling


def _kernel(backend: str | None):
    backend = backend or BACKEND
    if backend == "cython":
        if _c_simulate is None:
            raise ImportError("compiled kernel not available")
        return _c_simulate
    return _py_simulate


def sample_costs(prr: CanonicalPrr, n_star: int, samples: int, seed: int, *,
                 backend: str | None = None, step_cap: int = STEP_CAP,
                 workers: int | None = None, tables: Tables | None = None) -> np.ndarray:
    """C_tau for runs 0..samples-1 of the stream keyed by ``seed``."""
    if n_star < 0:
        raise ValueError("n_star must be non-negative")
    if n_star < prr.c_p:
        return np.zeros(samples)
    tab = tables or build_tables(prr, n_star)
    fn = _kernel(backend)
    seed = int(seed) & ((1 << 64) - 1)
    chunks = [(lo, min(CHUNK, samples - lo)) for lo in range(0, samples, CHUNK)]

    def work(chunk):
        lo, cnt = chunk
        return fn(n_star, prr.c_p, cnt, seed, lo, step_cap, *tab.args())

    if fn is _c_simulate and len(chunks) > 1:
        n_workers = workers or min(len(chunks), os.cpu_count() or 1)
        with ThreadPoolExecutor(n_workers) as pool:
            parts = list(pool.map(work, chunks))
    else:
        parts = [work(c) for c in chunks]
    out = np.concatenate([p[0] for p in parts]) if parts else np.zeros(0)
    status = np.concatenate([p[1] for p in parts]) if parts else np.zeros(0, dtype=np.int32)
    if np.any(status == 1):
        raise StepCapExceeded(f"a run exceeded {step_cap} transitions at n*={n_star}")
    if np.any(status == 2):
        raise SizeRangeViolationError(f"a call size left [0, n] at n*={n_star}")
    return out


def run_once(prr: CanonicalPrr, n_star: int, seed: int = 0, run: int = 0, backend: str | None = None) -> float:
    """One sample of C_tau; ``run`` selects the substream."""
    if n_star < prr.c_p:
        return 0.0
    tab = build_tables(prr, n_star)
    fn = _kernel(backend)
    out, status = fn(n_star, prr.c_p, 1, int(seed) & ((1 << 64) - 1), run, STEP_CAP, *tab.args())
    if status[0] == 1:
        raise StepCapExceeded(f"run exceeded {STEP_CAP} transitions")
    if status[0] == 2:
        raise SizeRangeViolationError("a call size left [0, n]")
    return float(out[0])


# ---------------------------------------------------------------------------
# AST-level interpreter (independent of the canonical form)


def _draw(dist, n: int, rng: Stream) -> int:
    if isinstance(dist, Uniform):
        return int(rng.unit() * n)
    if isinstance(dist, MUniform):
        i = int(rng.unit() * n)
        return max(i, n - 1 - i)
    if isinstance(dist, Discrete):
        u = rng.unit()
        acc = 0.0
        total = sum(lrec.const_value(p) for p, _ in dist.arms)
        for p, e in dist.arms:
            acc += lrec.const_value(p) / total
            if u < acc:
                break
        return _as_int(lrec.eval_expr(e, {"n": n}), "discrete arm")
    u = rng.unit()
    acc = 0.0
    total = sum(lrec.const_value(w) for _, _, w in dist.pieces)
    for lo, hi, w in dist.pieces:
        acc += lrec.const_value(w) / total
        if u < acc:
            break
    a = _as_int(lrec.eval_expr(lo, {"n": n}), "piece bound")
    b = _as_int(lrec.eval_expr(hi, {"n": n}), "piece bound")
    return a + int(rng.unit() * (b - a + 1))


def run_ast_once(ast: PrrAst, n_star: int, rng: Stream, step_cap: int = STEP_CAP) -> float:
    """Walk the nested ``with`` blocks directly instead of the branch list."""
    total = 0.0
    stack = [n_star]
    steps = 0
    while stack:
        n = stack.pop()
        while n >= ast.c_p:
            steps += 1
            if steps > step_cap:
                raise StepCapExceeded(f"run exceeded {step_cap} transitions")
            cmd = ast.body
            while isinstance(cmd, Choice):
                u = rng.unit()
                acc = 0.0
                for p, sub in cmd.arms:
                    acc += lrec.const_value(p)
                    chosen = sub
                    if u < acc:
                        break
                cmd = chosen
            v = _draw(cmd.dist, n, rng)
            body = cmd.body
            total += lrec.eval_expr(body.pre_cost, {"n": n})
            if body.calls == "v":
                nxt = v
            elif body.calls == "size-v":
                nxt = body.size_base.value(n) - v
            else:
                nxt = v
                other = body.size_base.value(n) - v
                if other > n:
                    raise SizeRangeViolationError(f"size {other} above n={n}")
                if other >= ast.c_p:
                    stack.append(other)
            if nxt > n:
                raise SizeRangeViolationError(f"size {nxt} above n={n}")
            n = nxt
    return total


def sample_ast(ast: PrrAst, n_star: int, samples: int, seed: int) -> np.ndarray:
    return np.array([run_ast_once(ast, n_star, Stream(seed, i)) for i in range(samples)])


# ---------------------------------------------------------------------------
# exact distribution for single recursion


def exact_distribution(prr: CanonicalPrr, n_star: int, prune: float = 1e-12,
                       max_support: int = 2_000_000) -> dict[float, float]:
    """Exact law of C_tau, built bottom-up over sizes; self-loops are unrolled
    until the remaining mass drops below ``prune``."""
    if any(b.r != 1 for b in prr.branches):
        raise UnsupportedShape("exact distribution needs single recursion")
    if n_star > 30:
        raise StateExplosion("n_star above 30")
    if n_star < prr.c_p:
        return {0.0: 1.0}
    dists: dict[int, dict[float, float]] = {}
    for n in range(prr.c_p, n_star + 1):
        moves = []  # (prob, cost, next size)
        for b in prr.branches:
            probs, s1, _ = branch_outcomes(b, n)
            c = b.cost(n)
            for p, s in zip(probs, s1):
                if p <= 0:
                    continue
                if s > n:
                    raise SizeRangeViolationError(f"size {s} above n={n}")
                moves.append((float(p), c, int(s)))
        out: dict[float, float] = defaultdict(float)
        frontier = {0.0: 1.0}
        while frontier:
            nxt: dict[float, float] = defaultdict(float)
            for acc, q in frontier.items():
                for p, c, s in moves:
                    w = q * p
                    base = round(acc + c, 9)
                    if s == n:
                        nxt[base] += w
                    elif s < prr.c_p:
                        out[base] += w
                    else:
                        for cc, pp in dists[s].items():
                            out[round(base + cc, 9)] += w * pp
            frontier = {k: v for k, v in nxt.items() if v > prune}
            if len(out) > max_support:
                raise StateExplosion(f"support above {max_support} at n={n}")
        dists[n] = dict(out)
    return dict(sorted(dists[n_star].items()))


# ---------------------------------------------------------------------------
# tails and validation


def clopper_pearson_upper(k: int, N: int, level: float = CONFIDENCE) -> float:
    if k >= N:
        return 1.0
    return float(beta_dist.ppf(level, k + 1, N - k))


def clopper_pearson_lower(k: int, N: int, level: float = CONFIDENCE) -> float:
    if k <= 0:
        return 0.0
    return float(beta_dist.ppf(1 - level, k, N - k + 1))


@dataclass
class EmpiricalTail:
    samples: np.ndarray
    n_star: int
    seed: int
    rng: str = RNG_NAME

    def __post_init__(self):
        if len(self.samples) == 0:
            raise ValueError("no samples")
        self._sorted = np.sort(self.samples)

    def count_at_least(self, x: float) -> int:
        return int(len(self._sorted) - np.searchsorted(self._sorted, x, side="left"))

    def tail(self, x: float) -> float:
        return self.count_at_least(x) / len(self._sorted)

    def upper(self, x: float, level: float = CONFIDENCE) -> float:
        return clopper_pearson_upper(self.count_at_least(x), len(self._sorted), level)

    def lower(self, x: float, level: float = CONFIDENCE) -> float:
        return clopper_pearson_lower(self.count_at_least(x), len(self._sorted), level)

    @property
    def mean(self) -> float:
        return float(self.samples.mean())

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["cost"])
            for c in self.samples:
                w.writerow([repr(float(c))])


def estimate_tail(prr: CanonicalPrr, n_star: int, samples: int, seed: int, **kw) -> EmpiricalTail:
    if samples < 1000:
        raise ValueError("at least 1000 samples are required")
    return EmpiricalTail(sample_costs(prr, n_star, samples, seed, **kw), n_star, seed)


@dataclass
class ValidationRow:
    alpha: float
    n_star: int
    threshold: float
    u: float
    tail: float
    lower: float
    upper: float
    verdict: str  # CERTIFIED, CONSISTENT, REFUTED or VACUOUS
    mgf_mean: float | None = None
    mgf_se: float | None = None
    mgf_rhs: float | None = None
    mgf_ok: bool | None = None

    @property
    def passed(self) -> bool:
        """Strict reading: the 99% upper limit must sit at or below u."""
        return self.verdict in ("CERTIFIED", "VACUOUS") and self.mgf_ok is not False

    @property
    def refuted(self) -> bool:
        return self.verdict == "REFUTED" or self.mgf_ok is False


@dataclass
class ValidationReport:
    rows: list = field(default_factory=list)
    rng: str = RNG_NAME
    seed: int = 0
    samples: int = 0

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows)

    @property
    def refuted(self) -> bool:
        """True when some point is contradicted by the samples themselves."""
        return any(r.refuted for r in self.rows)

    def counts(self) -> dict:
        out: dict = defaultdict(int)
        for r in self.rows:
            out[r.verdict] += 1
        return dict(out)

    def to_json(self) -> str:
        return json.dumps({"rng": self.rng, "seed": self.seed, "samples": self.samples,
                           "passed": self.passed, "refuted": self.refuted,
                           "rows": [asdict(r) for r in self.rows]}, indent=2)

    def to_csv(self, path):
        names = list(ValidationRow.__dataclass_fields__)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(names)
            for r in self.rows:
                w.writerow([getattr(r, k) for k in names])


def _bound_parts(bound, kappa, alpha: float, n: int):
    """(threshold, log u, t, f) for either bound flavour; t and f may be None."""
    if hasattr(bound, "threshold_scale"):
        thr = alpha * bound.threshold_scale.eval(n=n)
        t = f = None
        if bound.ep_sym is not None and bound.es_sym is not None and alpha > 1:
            t, f = bound.t(alpha, n), bound.f(alpha, n)
        return thr, bound.log_value(alpha, n), t, f
    thr = alpha * kappa.eval(n=n)
    t_bar, f_bar = getattr(bound, "t_bar", None), getattr(bound, "f_bar", None)
    if t_bar is None or f_bar is None:
        return thr, bound.log_value(alpha, n), None, None
    return thr, bound.log_value(alpha, n), t_bar.eval(alpha=alpha, n=n), f_bar.eval(alpha=alpha, n=n)


def mgf_check(costs: np.ndarray, t: float, f: float):
    """(mean of exp(tC), its standard error, exp(t f)); computed relative to exp(t f)."""
    z = t * costs - t * f
    with np.errstate(over="ignore"):
        vals = np.exp(z)
    mean = float(vals.mean())
    se = float(vals.std(ddof=1) / math.sqrt(len(vals))) if len(vals) > 1 else 0.0
    scale = math.exp(t * f) if t * f < 700 else math.inf
    return mean * scale, se * scale, scale, mean <= 1.0 + 3 * se


def validate_bound(prr: CanonicalPrr, bound, kappa=None, alpha_grid=(4, 8, 16), n_grid=(64, 256),
                   samples: int = 100_000, seed: int = 0, check_mgf: bool = True, **kw) -> ValidationReport:
    """Compare u(alpha, n*) with the sampled tail at alpha * kappa(n*).

    A point is REFUTED when even the 99% lower confidence limit of the
    tail exceeds u, CERTIFIED when the 99% upper limit is at most u, and
    CONSISTENT in between (typically u below the sampling resolution).
    """
    rep = ValidationReport(seed=seed, samples=samples)
    for n in n_grid:
        costs = sample_costs(prr, n, samples, seed, **kw)
        tail = EmpiricalTail(costs, n, seed)
        for a in alpha_grid:
            thr, logu, t, f = _bound_parts(bound, kappa, a, n)
            u = math.exp(min(logu, 700.0))
            k = tail.count_at_least(thr * (1 - 1e-12))
            lo = clopper_pearson_lower(k, samples)
            hi = clopper_pearson_upper(k, samples)
            if logu > 0:
                verdict = "VACUOUS"
            elif hi <= u:
                verdict = "CERTIFIED"
            elif lo <= u:
                verdict = "CONSISTENT"
            else:
                verdict = "REFUTED"
            row = ValidationRow(a, n, thr, u, k / samples, lo, hi, verdict)
            if check_mgf and t is not None and f is not None and t > 0:
                m, se, rhs, ok = mgf_check(costs, t, f)
                row.mgf_mean, row.mgf_se, row.mgf_rhs, row.mgf_ok = m, se, rhs, ok
            rep.rows.append(row)
    return rep


def support_values(prr: CanonicalPrr, n: int):
    """Union of the sampled-variable supports of all branches (for tests)."""
    return sorted({int(v) for b in prr.branches for v in support(b.dist, n)[0]})
