"""Parity succinctness benchmark: implicit certifier vs greedy precision baseline.

    python3 scripts/bench_parity.py --grid 6,8,10 --mode exact
"""
import argparse
import csv
import sys

from implicert.bench import PARITY_COLUMNS, bench_parity
from implicert.implicit_tree import EXACT, MONTE_CARLO


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--grid", default="6,8,10")
    ap.add_argument("--mode", choices=("exact", "mc"), default="exact")
    ap.add_argument("--seeds", type=int, default=50)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    rows = bench_parity([int(d) for d in args.grid.split(",")],
                        mode=EXACT if args.mode == "exact" else MONTE_CARLO,
                        seeds=args.seeds, seed=args.seed)
    writer = csv.DictWriter(sys.stdout, fieldnames=PARITY_COLUMNS, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)


if __name__ == "__main__":
    main()
