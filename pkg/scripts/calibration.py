"""Miss rates of the Monte-Carlo estimators against exact oracles over many seeds.

    python3 scripts/calibration.py --seeds 1000 --accuracy 0.05 --confidence 0.1
"""
import argparse

import numpy as np

from implicert import families
from implicert.estimators import (
    EstimatorConfig, estimate_noise_sensitivity, estimate_score, hoeffding_samples,
)
from implicert.model import compile_model
from implicert.oracles import TruthTable, exact_noise_sensitivity, exact_score


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=int, default=1000)
    ap.add_argument("--accuracy", type=float, default=0.05)
    ap.add_argument("--confidence", type=float, default=0.1)
    ap.add_argument("--p", type=float, default=0.1)
    ap.add_argument("--d", type=int, default=6)
    args = ap.parse_args()

    m = hoeffding_samples(args.accuracy, args.confidence)
    rng = np.random.default_rng(0)
    print(f"m = {m}")
    print(f"{'family':<10} {'NS miss':>8} {'score miss':>11}")
    for name, src in families.standard_families(args.d, rng, tables=2).items():
        f = compile_model(src)
        t = TruthTable.from_model(f)
        ns, score = exact_noise_sensitivity(t, args.p), exact_score(t, 0, args.p)
        miss_ns = miss_score = 0
        for seed in range(args.seeds):
            cfg = EstimatorConfig(m, seed, args.p)
            miss_ns += abs(estimate_noise_sensitivity(f, cfg) - ns) > args.accuracy
            miss_score += abs(estimate_score(f, 0, cfg) - score) > args.accuracy
        print(f"{name:<10} {miss_ns / args.seeds:>8.3f} {miss_score / args.seeds:>11.3f}")


if __name__ == "__main__":
    main()
