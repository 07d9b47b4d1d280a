"""Haar sweep of candidate bases: how large a diagonal gap each recipe finds."""

import argparse
import time
from collections import Counter
from dataclasses import dataclass

import numpy as np

from maskforge.conjecture import CandidateBasis, RecipeFailure, find_violation


@dataclass
class SweepConfig:
    d: int = 2
    trials: int = 200
    seed: int = 42


def sweep(cfg: SweepConfig) -> dict:
    rng = np.random.default_rng(cfg.seed)
    gaps, branches, failures = [], Counter(), 0
    worst_marginal = 0.0
    for _ in range(cfg.trials):
        try:
            w = find_violation(CandidateBasis.haar(cfg.d, rng))
        except RecipeFailure:
            failures += 1
            continue
        gaps.append(w.diagonal_gap)
        branches[w.branch] += 1
        worst_marginal = max(worst_marginal, w.marginal_deviation())
    gaps = np.array(gaps)
    return {
        "d": cfg.d,
        "trials": cfg.trials,
        "failures": failures,
        "branches": dict(branches),
        "gap_min": float(gaps.min()) if gaps.size else None,
        "gap_median": float(np.median(gaps)) if gaps.size else None,
        "gap_max": float(gaps.max()) if gaps.size else None,
        "worst_marginal_deviation": worst_marginal,
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--d", type=int, nargs="+", default=[2, 3])
    ap.add_argument("--trials", type=int, default=200)
    ap.add_argument("--seed", type=int, default=42)
    args = ap.parse_args()
    for d in args.d:
        start = time.perf_counter()
        s = sweep(SweepConfig(d, args.trials, args.seed))
        print(f"d={d}: {s['trials'] - s['failures']}/{s['trials']} witnesses, "
              f"gap min/median/max {s['gap_min']:.3f}/{s['gap_median']:.3f}/{s['gap_max']:.3f}, "
              f"branches {s['branches']}, marginal dev {s['worst_marginal_deviation']:.1e} "
              f"[{time.perf_counter() - start:.1f}s]")


if __name__ == "__main__":
    main()
