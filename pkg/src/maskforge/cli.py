"""Command-line front end.

Exit codes: 0 when every asserted inequality holds, 2 on a violation (or a
non-universal masker under ``verify``), 1 on malformed input.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import zoo
from .bounds import (
    flow_profile,
    max_embedding_flow,
    min_embedding_bound,
    theorem1_bound,
    theorem3_bound,
    unevenness_I1,
    unevenness_Iinf_estimate,
)
from .capacity import erasure_capacity, robust_bounds, theorem2_check
from .conjecture import CandidateBasis, RecipeFailure, find_violation
from .masker import (
    Masker,
    check_fact1,
    decompose_embeddings,
    randomness_cost,
    verify_orthogonal_images,
    verify_threshold_shares,
    verify_universal,
)

DEFAULT_SEED = 42
BOUND_TOL = 1e-9
EXIT_OK, EXIT_MALFORMED, EXIT_VIOLATION = 0, 1, 2


class MalformedInput(Exception):
    pass


@dataclass
class RunConfig:
    """Parsed invocation; ``extra`` holds command-specific options."""

    command: str
    input: str | None = None
    output: str | None = None
    tol: float | None = None
    seed: int = DEFAULT_SEED
    d: list[int] = field(default_factory=list)
    fmt: str = "json"
    extra: dict = field(default_factory=dict)

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "RunConfig":
        common = {"command", "input", "out", "tol", "seed", "d", "format", "func"}
        d = getattr(args, "d", None)
        d = d if isinstance(d, list) else ([] if d is None else [d])
        return cls(
            command=args.command,
            input=getattr(args, "input", None),
            output=args.out,
            tol=args.tol,
            seed=args.seed,
            d=d,
            fmt=args.format,
            extra={k: v for k, v in vars(args).items() if k not in common},
        )


# ---------------------------------------------------------------- analyses

def _clean(x):
    """JSON-safe floats: NaN/inf become null, numpy scalars become Python."""
    if isinstance(x, dict):
        return {k: _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else None
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def verify_report(m: Masker, tol: float = 1e-10) -> dict:
    rep = verify_universal(m, tol)
    emb = decompose_embeddings(m)
    out = rep.to_json()
    out["orthogonal_images"] = verify_orthogonal_images(emb)
    out["fact1"] = check_fact1(m, rep) if rep.is_universal else None
    out["shares"] = verify_threshold_shares(m, tol).to_json()
    return out


def bounds_report(m: Masker, gamma: str = "maxent", n: int = 1, seed: int = DEFAULT_SEED,
                  tol: float = 1e-10) -> dict:
    rep = verify_universal(m, tol)
    emb = decompose_embeddings(m)
    prof = flow_profile(emb)
    d = m.dI
    R = randomness_cost(m)
    I1 = unevenness_I1(emb, gamma=gamma, seed=seed)
    Iinf = unevenness_Iinf_estimate(emb, n) if n != 1 else None
    out = {
        "universal": rep.is_universal,
        "d": d,
        "R": R,
        "theorem1": theorem1_bound(prof),
        "theorem3": theorem3_bound(prof),
        "I1": I1.value,
        "I1_maxent": I1.maxent_value,
        "I1_detail": I1.to_json(),
        "Iinf_estimate": Iinf.value if Iinf else I1.value,
        "Iinf_n": n,
        "min_embedding": min_embedding_bound(prof),
        "max_embedding": max_embedding_flow(prof),
        "embeddings": prof.rows(),
    }
    checks = {
        "theorem1": out["theorem1"] <= R + BOUND_TOL,
        "theorem3": out["theorem3"] <= R + BOUND_TOL,
        "min_embedding": out["min_embedding"] <= R + BOUND_TOL,
        "theorem4_oneshot": out["I1"] <= R + 2 * math.log2(d) / d + BOUND_TOL,
        "I1_band": math.log2(d) - BOUND_TOL <= out["I1"] <= 2 * (1 + 1 / d) * math.log2(d) + BOUND_TOL,
    }
    out["checks"] = checks if rep.is_universal else {k: None for k in checks}
    out["violations"] = [k for k, v in checks.items() if not v] if rep.is_universal else []
    return out


def capacity_report(m: Masker, sides=("A", "B"), tol: float = 1e-6) -> dict:
    rows = theorem2_check(m, tol, sides)
    e = {s: next((r.e for r in rows if r.side == s), None) for s in ("A", "B")}
    worst = min((r.slack for r in rows), default=None)
    return {
        "e_A": e["A"],
        "e_B": e["B"],
        "worst_slack": worst,
        "rows": [r.to_json() for r in rows],
        "violations": [f"{r.name}/{r.side}" for r in rows if not r.ok],
    }


def conjecture_report(d: int, trials: int, seed: int) -> dict:
    witnesses, failures = [], []
    rng = np.random.default_rng(seed)
    for t in range(trials):
        basis = CandidateBasis.haar(d, rng)
        try:
            w = find_violation(basis)
            witnesses.append({"trial": t, **w.to_json()})
        except RecipeFailure as exc:
            failures.append({"trial": t, "best_gap": exc.best.diagonal_gap if exc.best else None})
    analytic = find_violation(CandidateBasis.computational(d))
    return {
        "d": d,
        "trials": trials,
        "seed": seed,
        "analytic_product_gap": analytic.diagonal_gap,
        "min_gap": min((w["diagonal_gap"] for w in witnesses), default=None),
        "witnesses": witnesses,
        "failures": failures,
    }


SUMMARY_FIELDS = [
    "masker", "d", "eps", "universal", "marginal_deviation", "R", "R_expected",
    "theorem1", "theorem3", "I1", "Iinf_n2", "min_embedding", "max_embedding",
    "fact1", "thm2_worst_slack", "e_A", "e_B", "robust_theorem3", "robust_I1",
    "I_RA", "I_RB", "I_RK", "I_RAK", "I_RBK", "gap_measured", "gap_formula",
]


def summary_row(name: str, d: int, eps: float = 0.0, seed: int = DEFAULT_SEED,
                with_iinf: bool = True) -> dict:
    entry = zoo.entry(name, d, eps, seed)
    m = entry.masker
    rep = verify_universal(m)
    emb = decompose_embeddings(m)
    prof = flow_profile(emb)
    R = randomness_cost(m)
    I1 = unevenness_I1(emb).value
    row = dict.fromkeys(SUMMARY_FIELDS)
    row.update(
        masker=name, d=d, eps=eps, universal=rep.is_universal,
        marginal_deviation=rep.marginal_deviation, R=R, R_expected=entry.expected_R,
        theorem1=theorem1_bound(prof), theorem3=theorem3_bound(prof), I1=I1,
        min_embedding=min_embedding_bound(prof), max_embedding=max_embedding_flow(prof),
        fact1=check_fact1(m, rep) if rep.is_universal else None,
    )
    # the n=2 family is |emb|^2 dense embeddings; only exact rows, desk-sized
    if with_iinf and eps == 0 and len(emb) ** 2 * max(m.dA, m.dB) <= 1024:
        row["Iinf_n2"] = unevenness_Iinf_estimate(emb, 2).value
    cap = capacity_report(m)
    row.update(thm2_worst_slack=cap["worst_slack"], e_A=cap["e_A"], e_B=cap["e_B"])
    if eps > 0:
        rb = robust_bounds(prof, max(cap["e_A"], cap["e_B"]))
        row.update(robust_theorem3=rb.theorem3, robust_I1=rb.I1)
    shares = verify_threshold_shares(m)
    row.update(I_RA=shares.I_RA, I_RB=shares.I_RB, I_RK=shares.I_RK,
               I_RAK=shares.I_RAK, I_RBK=shares.I_RBK)
    if name == "odd_d":
        row["gap_measured"] = R - I1
        row["gap_formula"] = math.log2(1 + 1 / d) - (d - 1) / (d * (d + 1)) * math.log2(d)
    return _clean(row)


def _threads() -> int:
    raw = os.environ.get("MASKFORGE_THREADS")
    if raw is None:
        return os.cpu_count() or 1
    return max(int(raw), 0)


def run_all(d_values, seed: int = DEFAULT_SEED, eps: float = 0.02) -> list[dict]:
    jobs = []
    for d in d_values:
        jobs.append(("qotp", d, 0.0))
        jobs.append(("coinflip", d, 0.0))
        if d % 2 == 1 and d >= 3:
            jobs.append(("odd_d", d, 0.0))
    jobs.append(("qotp", min(d_values), eps))
    jobs.sort(key=lambda j: (j[0], j[1], j[2]))
    threads = _threads()
    if threads <= 1:
        rows = [summary_row(n, d, e, seed) for n, d, e in jobs]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(lambda j: summary_row(j[0], j[1], j[2], seed), jobs))
    return rows


# ---------------------------------------------------------------- I/O

def load_masker(path) -> Masker:
    p = Path(path)
    if not p.is_file():
        raise MalformedInput(f"no such file: {path}")
    try:
        return Masker.from_json(json.loads(p.read_text()))
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise MalformedInput(f"{path}: {exc}") from exc


def rows_to_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    fields = list(rows[0].keys()) if rows else SUMMARY_FIELDS
    w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: ("" if v is None else v) for k, v in r.items()})
    return buf.getvalue()


def _flat_rows(report: dict) -> list[dict]:
    for key in ("rows", "embeddings", "witnesses"):
        if key in report and isinstance(report[key], list):
            return [
                {k: v for k, v in r.items() if not isinstance(v, (dict, list))}
                for r in report[key]
            ]
    return [{k: v for k, v in report.items() if not isinstance(v, (dict, list))}]


def write_report(report, path, fmt: str = "json") -> None:
    report = _clean(report)
    if fmt == "csv":
        rows = report if isinstance(report, list) else _flat_rows(report)
        text = rows_to_csv(rows)
    else:
        text = json.dumps(report, indent=2, sort_keys=False) + "\n"
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


# ---------------------------------------------------------------- commands

def _cmd_zoo(cfg: RunConfig) -> int:
    name, eps = cfg.extra["name"], cfg.extra["eps"]
    target = cfg.extra.get("output") or cfg.output
    try:
        m = zoo.build(name, cfg.d[0], eps, cfg.seed)
    except ValueError as exc:
        raise MalformedInput(str(exc)) from exc
    if target in (None, "-"):
        sys.stdout.write(json.dumps(m.to_json()) + "\n")
    else:
        m.save(target)
        print(f"wrote {name} (d={cfg.d[0]}, eps={eps}) to {target}", file=sys.stderr)
    return EXIT_OK


def _cmd_verify(cfg: RunConfig) -> int:
    m = load_masker(cfg.input)
    rep = verify_report(m, cfg.tol or 1e-10)
    write_report(rep, cfg.output, cfg.fmt)
    print(f"universal={rep['universal']} deviation={rep['marginal_deviation']:.3e} "
          f"R={rep['R']:.6f}", file=sys.stderr)
    return EXIT_OK if rep["universal"] else EXIT_VIOLATION


def _cmd_bounds(cfg: RunConfig) -> int:
    m = load_masker(cfg.input)
    rep = bounds_report(m, cfg.extra["gamma"], cfg.extra["n"], cfg.seed, cfg.tol or 1e-10)
    write_report(rep, cfg.output, cfg.fmt)
    print(f"R={rep['R']:.6f} thm1={rep['theorem1']:.6f} thm3={rep['theorem3']:.6f} "
          f"I1={rep['I1']:.6f} min_embedding={rep['min_embedding']:.6f}", file=sys.stderr)
    if rep["violations"]:
        print(f"bound violation: {', '.join(rep['violations'])}", file=sys.stderr)
        return EXIT_VIOLATION
    return EXIT_OK


def _cmd_capacity(cfg: RunConfig) -> int:
    m = load_masker(cfg.input)
    side = cfg.extra["side"]
    sides = ("A", "B") if side == "both" else (side,)
    rep = capacity_report(m, sides, cfg.tol or 1e-6)
    write_report(rep, cfg.output, cfg.fmt)
    print(f"e_A={rep['e_A']} e_B={rep['e_B']} worst_slack={rep['worst_slack']}", file=sys.stderr)
    if rep["violations"]:
        print(f"bound violation: {', '.join(rep['violations'])}", file=sys.stderr)
        return EXIT_VIOLATION
    return EXIT_OK


def _cmd_conjecture(cfg: RunConfig) -> int:
    d, trials = cfg.d[0], cfg.extra["trials"]
    rep = conjecture_report(d, trials, cfg.seed)
    write_report(rep, cfg.output, cfg.fmt)
    print(f"d={d}: {len(rep['witnesses'])}/{trials} witnesses, "
          f"min gap {rep['min_gap']}", file=sys.stderr)
    return EXIT_VIOLATION if rep["failures"] else EXIT_OK


def _cmd_all(cfg: RunConfig) -> int:
    start = time.perf_counter()
    rows = run_all(cfg.d or [2, 3], cfg.seed, cfg.extra["eps"])
    write_report(rows if cfg.fmt == "csv" else {"seed": cfg.seed, "rows": rows},
                 cfg.output, cfg.fmt)
    bad = []
    for r in rows:
        name = f"{r['masker']}(d={r['d']}, eps={r['eps']})"
        print(f"{name:28s} R={r['R']:.4f} thm1={r['theorem1']:.4f} thm3={r['theorem3']:.4f} "
              f"I1={r['I1']:.4f} min={r['min_embedding']:.4f}", file=sys.stderr)
        if r["universal"]:
            R = r["R"]
            for key in ("theorem1", "theorem3", "min_embedding"):
                if r[key] > R + BOUND_TOL:
                    bad.append(f"{name}:{key}")
        if r["thm2_worst_slack"] is not None and r["thm2_worst_slack"] < -1e-3:
            bad.append(f"{name}:theorem2")
    print(f"{len(rows)} rows in {time.perf_counter() - start:.1f}s", file=sys.stderr)
    if bad:
        print("bound violations: " + ", ".join(bad), file=sys.stderr)
        return EXIT_VIOLATION
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=DEFAULT_SEED)
    common.add_argument("--tol", type=float, default=None)
    common.add_argument("--out", default=None, help="report path (stdout if omitted)")
    common.add_argument("--format", choices=("json", "csv"), default="json")

    parser = argparse.ArgumentParser(prog="maskforge", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("zoo", parents=[common], help="build a zoo masker")
    p.add_argument("action", choices=("build",))
    p.add_argument("name", choices=sorted(zoo.BUILDERS))
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--eps", type=float, default=0.0)
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=_cmd_zoo)

    p = sub.add_parser("verify", parents=[common], help="check universality")
    p.add_argument("input")
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("bounds", parents=[common], help="randomness-cost lower bounds")
    p.add_argument("input")
    p.add_argument("--gamma", choices=("maxent", "search"), default="maxent")
    p.add_argument("--n", type=int, choices=(1, 2), default=1)
    p.set_defaults(func=_cmd_bounds)

    p = sub.add_parser("capacity", parents=[common], help="subchannel capacity trade-off")
    p.add_argument("input")
    p.add_argument("--side", choices=("A", "B", "both"), default="both")
    p.set_defaults(func=_cmd_capacity)

    p = sub.add_parser("conjecture", parents=[common], help="disk-conjecture witnesses")
    p.add_argument("--d", type=int, choices=(2, 3), default=2)
    p.add_argument("--trials", type=int, default=50)
    p.set_defaults(func=_cmd_conjecture)

    p = sub.add_parser("all", parents=[common], help="full zoo summary")
    p.add_argument("--d", type=int, nargs="+", default=None)
    p.add_argument("--eps", type=float, default=0.02)
    p.set_defaults(func=_cmd_all)
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_MALFORMED if exc.code else EXIT_OK
    try:
        return args.func(RunConfig.from_args(args))
    except MalformedInput as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MALFORMED


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
