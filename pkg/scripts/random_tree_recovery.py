"""Batch certification on random depth-k trees, with a look at why it fails.

For each random tree model the script reports the bottom rate of exact-mode
batch certification and whether the exact greedy noise-stabilizing tree of the
same depth reproduces the model.  Models whose greedy tree differs from the
model are the ones with high bottom rates.

    python3 scripts/random_tree_recovery.py --models 100 --d 8 --k 3 --p 0.2
"""
import argparse

import numpy as np

from implicert import families
from implicert.certifier import CertifierConfig, certify_batch, wire_parameters
from implicert.implicit_tree import EXACT
from implicert.model import Restriction, all_instances, compile_model
from implicert.oracles import TruthTable, exact_greedy_tree, exact_scores


def greedy_table(t: TruthTable, p: float, k: int) -> np.ndarray:
    return TruthTable.from_model(f"{exact_greedy_tree(t, p, k).to_dsl()} d={t.d}").labels


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--models", type=int, default=100)
    ap.add_argument("--d", type=int, default=8)
    ap.add_argument("--k", type=int, default=3)
    ap.add_argument("--epsilon", type=float, default=0.2)
    ap.add_argument("--delta", type=float, default=0.2)
    ap.add_argument("--p", type=float, default=None, help="noise rate (default: wired)")
    ap.add_argument("--seed", type=int, default=5)
    ap.add_argument("--show", type=int, default=3, help="print root scores of this many failures")
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    cfg = CertifierConfig(args.epsilon, args.delta, depth=args.k, noise_rate=args.p)
    X = all_instances(args.d)
    rates, recovered, shown = [], 0, 0
    for j in range(args.models):
        src = families.random_tree(args.d, args.k, rng)
        f = compile_model(src)
        t = TruthTable.from_model(f)
        params = wire_parameters(cfg, args.d, seed=j, mode=EXACT)
        rate = certify_batch(f, X, cfg, params).bottom_rate
        rates.append(rate)
        same = np.array_equal(greedy_table(t, params.noise_rate, args.k), t.labels)
        recovered += same
        if not same and shown < args.show:
            shown += 1
            scores = exact_scores(t, Restriction(), params.noise_rate)
            top = sorted(scores.items(), key=lambda kv: -kv[1])[:3]
            print(f"model {j}: {src}")
            print(f"  bottom rate {rate:.3f}; top root scores "
                  + ", ".join(f"x{i}={s:.4f}" for i, s in top))
    rates = np.array(rates)
    print(f"p = {params.noise_rate:.4f}, eta = {params.eta:.4f}")
    print(f"greedy tree reproduces the model: {recovered}/{args.models}")
    print(f"models with bottom rate <= {args.epsilon}: {int((rates <= args.epsilon).sum())}/{args.models}")
    print(f"mean bottom rate: {rates.mean():.3f}")


if __name__ == "__main__":
    main()
