"""``prr-tail`` command line, benchmark corpus and reference comparisons.

Exit codes: 0 success, 1 synthesis or verification failure, 2 usage or
input error.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from . import simulator, theory
from .canonicalizer import CanonicalPrr, to_canonical
from .errors import LRecSyntaxError, MissingReference, MultipleProcedures, NoBoundFound, PrrError, UnboundVariable
from .lrec import parse, parse_poly, validate
from .sympoly import ALPHA, PseudoPoly, to_text
from .synthesizer import synthesize

log = logging.getLogger("prrtail")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
INPUT_ERRORS = (LRecSyntaxError, UnboundVariable, MultipleProcedures)
DEFAULT_POINTS = ((10, 13), (11, 15), (12, 17))
BENCH_COLUMNS = ("benchmark", "kappa", "f_bar", "t_bar", "bound")


# ---------------------------------------------------------------------------
# corpus


def data_dir() -> Path:
    return Path(str(resources.files("prrtail") / "data"))


@dataclass
class BenchmarkSpec:
    name: str
    prr_path: Path
    kappa: PseudoPoly
    ep_sym: PseudoPoly
    karp_reference: str | None
    comp_reference: dict | None
    reference_bound: dict
    concrete: list = field(default_factory=list)

    def load_prr(self) -> CanonicalPrr:
        return load_prr(self.prr_path)


def load_prr(path) -> CanonicalPrr:
    ast = parse(Path(path).read_text())
    bad = validate(ast)
    if bad:
        raise PrrError("; ".join(str(v) for v in bad))
    return to_canonical(ast)


def load_benchmark(name_or_path) -> BenchmarkSpec:
    p = Path(name_or_path)
    if not p.suffix:
        p = data_dir() / f"{name_or_path}.json"
    if not p.exists():
        raise FileNotFoundError(f"no benchmark config {p}")
    cfg = json.loads(p.read_text())
    return BenchmarkSpec(cfg["name"], (p.parent / cfg["prr"]).resolve(), parse_poly(cfg["kappa"]),
                         parse_poly(cfg["ep"]), cfg.get("karp"), cfg.get("comp"), cfg["reference"],
                         cfg.get("concrete", []))


def benchmark_names() -> list[str]:
    return sorted(p.stem for p in data_dir().glob("*.json"))


def parse_bound(text: str) -> PseudoPoly:
    """Exponent of a bound written as ``exp(<pseudo-polynomial>)``; ``n`` stands for n*."""
    s = text.strip().replace(" ", "")
    if not (s.startswith("exp(") and s.endswith(")")):
        raise ValueError(f"bound must read exp(...): {text!r}")
    return parse_poly(s[4:-1])


@dataclass
class ExpressionBound:
    """A bound given only as exp(expr), e.g. from the command line."""

    exponent: PseudoPoly

    def log_value(self, alpha: float, n: float) -> float:
        return self.exponent.eval(alpha=alpha, n=n)

    def value(self, alpha: float, n: float) -> float:
        return math.exp(self.log_value(alpha, n))

    def text(self) -> str:
        return f"exp({to_text(self.exponent)})"


def reference_row(spec: BenchmarkSpec) -> dict:
    """Canonical printing of the reference (f, t) and of t (f - alpha kappa)."""
    f = parse_poly(spec.reference_bound["f"])
    t = parse_poly(spec.reference_bound["t"])
    return {"benchmark": spec.name, "kappa": to_text(spec.kappa), "f_bar": to_text(f),
            "t_bar": to_text(t), "bound": f"exp({to_text(t * (f - ALPHA * spec.kappa))})"}


def golden_path() -> Path:
    return data_dir() / "golden_bench.csv"


def write_rows(path, rows, columns):
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(columns), extrasaction="ignore")
        w.writeheader()
        for r in rows:
            w.writerow(r)


def read_rows(path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


# ---------------------------------------------------------------------------
# benchmarks


def run_one(name: str, B: int = 2, M: int = 4, Q: int = 8) -> dict:
    spec = load_benchmark(name)
    ref = reference_row(spec)
    row = {"benchmark": name, "kappa": ref["kappa"], "karp": spec.karp_reference or "not applicable"}
    t0 = time.perf_counter()
    try:
        cand = synthesize(spec.load_prr(), spec.kappa, spec.ep_sym, B=B, M=M, Q=Q)
    except PrrError as exc:
        row.update(f_bar="", t_bar="", bound="", time_s=time.perf_counter() - t0,
                   match=False, error=f"{type(exc).__name__}: {exc}")
        return row
    row.update(f_bar=to_text(cand.f_bar), t_bar=to_text(cand.t_bar), bound=cand.text(),
               time_s=time.perf_counter() - t0, error="")
    row["match"] = all(row[k] == ref[k] for k in ("f_bar", "t_bar", "bound"))
    return row


def run_benchmarks(names=None, B: int = 2, M: int = 4, Q: int = 8, out_dir=None, jobs: int = 1) -> list[dict]:
    """Synthesize every selected benchmark; rows come back sorted by name."""
    names = sorted(names or benchmark_names())
    if jobs > 1:
        with ProcessPoolExecutor(jobs) as pool:
            rows = list(pool.map(run_one, names, [B] * len(names), [M] * len(names), [Q] * len(names)))
    else:
        rows = [run_one(n, B, M, Q) for n in names]
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_rows(out / "bench.csv", rows, BENCH_COLUMNS + ("time_s", "karp", "match", "error"))
        (out / "bench.json").write_text(json.dumps(rows, indent=2))
    return rows


def compare_reference(spec: BenchmarkSpec, points=DEFAULT_POINTS, bound=None, out_dir=None) -> list[dict]:
    """Our bound against the stored reference bound at concrete (alpha, n*)."""
    if not spec.karp_reference:
        raise MissingReference(f"{spec.name} has no reference bound")
    if bound is None:
        bound = synthesize(spec.load_prr(), spec.kappa, spec.ep_sym)
    karp = ExpressionBound(parse_bound(spec.karp_reference))
    rows = []
    for a, n in points:
        ours = bound.value(a, n)
        other = karp.value(a, n)
        rows.append({"alpha": a, "n": n, "ours": ours, "karp": other,
                     "ratio": other / ours if ours > 0 else math.inf})
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_rows(out / f"{spec.name}_compare.csv", rows, ("alpha", "n", "ours", "karp", "ratio"))
        grid = np.linspace(10, 15, 51)
        for tag, b in (("ours", bound), ("karp", karp)):
            with open(out / f"{spec.name}_{tag}.dat", "w") as fh:
                fh.write(f"# alpha  {tag} bound at n*=17\n")
                for a in grid:
                    fh.write(f"{a:.2f} {b.value(float(a), 17):.6e}\n")
    return rows


def comp_bound(prr: CanonicalPrr, ep_sym: PseudoPoly, n_min: int = 10, n_max: int = 1000):
    """DP oracle, increment constants on [n_min, n_max], then the closed-form bound."""
    ep = theory.solve_expected_runtime(prr, n_max, ep_sym)
    m_lo, m_hi = theory.estimate_increment_constants(prr, ep, (n_min, n_max))
    es_sym = PseudoPoly()
    for b in prr.branches:
        es_sym = es_sym + b.pre_cost * b.prob
    return theory.comp_tail_bound(ep_sym, theory.monomial_upper(es_sym, prr.c_p), m_lo, m_hi)


# ---------------------------------------------------------------------------
# argument handling


def _floats(text: str) -> list[float]:
    return [float(x) for x in text.replace(";", ",").split(",") if x.strip()]


def _ints(text: str) -> list[int]:
    return [int(x) for x in text.replace(";", ",").split(",") if x.strip()]


def _points(text: str):
    out = []
    for chunk in text.split(";"):
        if chunk.strip():
            a, n = chunk.split(",")
            out.append((float(a), int(n)))
    return out


def _cmd_synth(args) -> int:
    prr = load_prr(args.file)
    kappa, ep = parse_poly(args.kappa), parse_poly(args.ep)
    t0 = time.perf_counter()
    try:
        res = synthesize(prr, kappa, ep, B=args.B, M=args.M, Q=args.Q, all_templates=args.all_templates)
    except NoBoundFound as exc:
        print(f"no bound found: {exc}", file=sys.stderr)
        return EXIT_FAIL
    cands = res if isinstance(res, list) else [res]
    elapsed = time.perf_counter() - t0
    if args.json:
        print(json.dumps({"seconds": elapsed, "bounds": [c.to_dict() for c in cands]}, indent=2))
    else:
        for c in cands:
            print(f"f_bar  = {to_text(c.f_bar)}")
            print(f"t_bar  = {to_text(c.t_bar)}")
            print(f"bound  = Pr[C >= alpha*({to_text(kappa)})] <= {c.text()}")
        print(f"time   = {elapsed:.3f}s")
    return EXIT_OK


def _cmd_simulate(args) -> int:
    prr = load_prr(args.file)
    tail = simulator.estimate_tail(prr, args.n, args.samples, args.seed)
    s = tail.samples
    print(json.dumps({"n_star": args.n, "samples": len(s), "seed": args.seed, "rng": tail.rng,
                      "backend": simulator.BACKEND, "mean": float(s.mean()), "std": float(s.std()),
                      "min": float(s.min()), "median": float(np.median(s)), "max": float(s.max())}, indent=2))
    if args.csv:
        tail.to_csv(args.csv)
    return EXIT_OK


def _cmd_verify(args) -> int:
    prr = load_prr(args.file)
    bound = ExpressionBound(parse_bound(args.bound))
    rep = simulator.validate_bound(prr, bound, parse_poly(args.kappa), _floats(args.alpha), _ints(args.n),
                                   args.samples, args.seed)
    print(rep.to_json())
    if args.csv:
        rep.to_csv(args.csv)
    return EXIT_OK if rep.passed else EXIT_FAIL


def _cmd_comp(args) -> int:
    prr = load_prr(args.file)
    b = comp_bound(prr, parse_poly(args.ep), args.n_min, args.n_max)
    print(json.dumps({"M_lo": b.m_lo, "M_hi": b.m_hi, "threshold": f"alpha*({to_text(b.threshold_scale)})",
                      "bound": b.text(), "coefficient": b.coefficient}, indent=2))
    return EXIT_OK


def _cmd_bench(args) -> int:
    names = None if args.all or not args.name else [args.name]
    rows = run_benchmarks(names, args.B, args.M, args.Q, args.out, args.jobs)
    w = csv.DictWriter(sys.stdout, fieldnames=list(BENCH_COLUMNS + ("time_s", "match")), extrasaction="ignore")
    w.writeheader()
    for r in rows:
        w.writerow({**r, "time_s": f"{r['time_s']:.3f}"})
    return EXIT_OK if all(not r["error"] for r in rows) else EXIT_FAIL


def _cmd_compare(args) -> int:
    spec = load_benchmark(args.name)
    try:
        rows = compare_reference(spec, _points(args.points), out_dir=args.out)
    except MissingReference as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_FAIL
    except NoBoundFound as exc:
        print(f"no bound found: {exc}", file=sys.stderr)
        return EXIT_FAIL
    print("alpha,n,ours,karp,ratio")
    for r in rows:
        print(f"{r['alpha']:g},{r['n']},{r['ours']:.3e},{r['karp']:.3e},{r['ratio']:.3e}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="prr-tail", description="Tail bounds for probabilistic recurrences.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("synth", help="synthesize a tail bound")
    p.add_argument("file", help="PRR source file")
    p.add_argument("--kappa", required=True, help="threshold scale, e.g. 'n' or 'n*ln(n)'")
    p.add_argument("--ep", required=True, help="expected-cost estimate E[p(n)]")
    p.add_argument("--B", type=int, default=2, help="exponent range of the templates")
    p.add_argument("--M", type=int, default=4, help="doubling/halving steps for the coefficients")
    p.add_argument("--Q", type=int, default=8, help="parts in the divide-and-conquer sum")
    p.add_argument("--all-templates", action="store_true", help="list every accepted template")
    p.add_argument("--json", action="store_true")
    p.set_defaults(run=_cmd_synth)

    p = sub.add_parser("simulate", help="sample the total cost")
    p.add_argument("file")
    p.add_argument("--n", type=int, required=True, help="initial size n*")
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--csv")
    p.set_defaults(run=_cmd_simulate)

    p = sub.add_parser("verify", help="check a bound against simulation")
    p.add_argument("file")
    p.add_argument("--bound", required=True, help="'exp(<alpha/n pseudo-polynomial>)'")
    p.add_argument("--kappa", required=True)
    p.add_argument("--alpha", default="4,8,16", help="comma-separated alpha grid")
    p.add_argument("--n", default="64,256", help="comma-separated n* grid")
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--csv")
    p.set_defaults(run=_cmd_verify)

    p = sub.add_parser("comp-bound", help="closed-form bound from fitted increment constants")
    p.add_argument("file")
    p.add_argument("--ep", required=True, help="E[p(n)] used as the threshold scale")
    p.add_argument("--n-min", type=int, default=10)
    p.add_argument("--n-max", type=int, default=1000)
    p.set_defaults(run=_cmd_comp)

    p = sub.add_parser("bench", help="run the benchmark corpus")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--all", action="store_true")
    g.add_argument("--name")
    p.add_argument("--out", help="directory for bench.csv and bench.json")
    p.add_argument("--B", type=int, default=2)
    p.add_argument("--M", type=int, default=4)
    p.add_argument("--Q", type=int, default=8)
    p.add_argument("--jobs", type=int, default=1, help="worker processes")
    p.set_defaults(run=_cmd_bench)

    p = sub.add_parser("compare", help="compare with the stored reference bound")
    p.add_argument("--name", required=True)
    p.add_argument("--points", default="10,13;11,15;12,17", help="alpha,n pairs separated by ';'")
    p.add_argument("--out", help="directory for the CSV and plot data")
    p.set_defaults(run=_cmd_compare)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.run(args)
    except (OSError, ValueError, PrrError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        usage = not isinstance(exc, PrrError) or isinstance(exc, INPUT_ERRORS)
        return EXIT_USAGE if usage else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
