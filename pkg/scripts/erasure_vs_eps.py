"""Erasure capacity e of perturbed QOTP maskers as the perturbation grows."""

import argparse
from dataclasses import dataclass

import numpy as np

from maskforge import zoo
from maskforge.bounds import flow_profile
from maskforge.capacity import erasure_capacity, robust_bounds
from maskforge.masker import decompose_embeddings, randomness_cost, verify_universal


@dataclass
class EpsConfig:
    d: int = 2
    eps_values: tuple[float, ...] = (0.0, 0.005, 0.01, 0.02, 0.05, 0.1)
    seeds: tuple[int, ...] = (0, 1, 2)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--d", type=int, default=2)
    ap.add_argument("--eps", type=float, nargs="+", default=list(EpsConfig.eps_values))
    ap.add_argument("--seeds", type=int, nargs="+", default=list(EpsConfig.seeds))
    args = ap.parse_args()
    cfg = EpsConfig(args.d, tuple(args.eps), tuple(args.seeds))

    print(f"{'eps':>6} {'seed':>4} {'deviation':>10} {'e_A':>10} {'e_B':>10} {'I1_adj':>9} {'R':>7}")
    for eps in cfg.eps_values:
        for seed in cfg.seeds:
            m = zoo.perturb(zoo.build_qotp(cfg.d), eps, seed)
            e_a, e_b = erasure_capacity(m, "A"), erasure_capacity(m, "B")
            rb = robust_bounds(flow_profile(decompose_embeddings(m)), max(e_a, e_b))
            dev = verify_universal(m).marginal_deviation
            print(f"{eps:6.3f} {seed:4d} {dev:10.2e} {e_a:10.2e} {e_b:10.2e} "
                  f"{rb.I1:9.5f} {randomness_cost(m):7.4f}")
    print(f"one-shot ceiling R + 2 log d / d = {2 * np.log2(cfg.d) * (1 + 1 / cfg.d):.4f}")


if __name__ == "__main__":
    main()
