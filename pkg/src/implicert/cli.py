"""Command line front end.

Exit codes: 0 on success (a bottom verdict is a result, not a failure),
1 on usage, parse or validation errors, 2 when an internal invariant breaks.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import time
from pathlib import Path

from . import __version__
from .baseline import BaselineConfig, greedy_precision_certificate
from .bench import PARITY_COLUMNS, bench_parity, selftest
from .certifier import Certificate, CertifierConfig, certify_batch, find_certificate, wire_parameters
from .implicit_tree import EXACT, MONTE_CARLO
from .model import (
    ModelError, Restriction, all_instances, compile_model, instance_from_bits, instance_to_bits,
)
from .oracles import (
    TruthTable, exact_avg_certificate_complexity, exact_dt_complexity, exact_greedy_tree,
    exact_noise_sensitivity, exact_precision_error, exact_score, smallest_certificate,
)

SCHEMA_VERSION = "1"
MODES = {"mc": MONTE_CARLO, "exact": EXACT}
ORACLE_QUANTITIES = ("ns", "score", "precision", "cert-complexity", "avg-cert-complexity",
                     "dt-complexity", "greedy-tree")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def load_model_text(source: str) -> str:
    path = Path(source)
    if "(" not in source and path.exists():
        return path.read_text(encoding="utf-8")
    return source


def resolve_seed(seed: int | None) -> int:
    if seed is not None:
        return seed
    env = os.environ.get("IMPLICERT_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"IMPLICERT_SEED must be an integer, got {env!r}") from None


def _common(p: argparse.ArgumentParser, model=True):
    if model:
        p.add_argument("--model", required=True, help="DSL file or inline DSL text")
    p.add_argument("--seed", type=int, default=None, help="job seed (falls back to $IMPLICERT_SEED, then 0)")
    p.add_argument("--out", help="write the report here instead of stdout")
    p.add_argument("--format", choices=("json", "csv"), default="json")


def _certifier_flags(p: argparse.ArgumentParser):
    p.add_argument("--epsilon", type=float, default=0.1)
    p.add_argument("--delta", type=float, default=0.1)
    p.add_argument("--depth", type=int, help="explicit depth budget k")
    p.add_argument("--d-bound", type=float, help="bound on decision-tree complexity, wires k, eta, p")
    p.add_argument("--p", type=float, help="noise rate override")
    p.add_argument("--eta", type=float, help="score tolerance override")
    p.add_argument("--mode", choices=tuple(MODES), default="mc")
    p.add_argument("--prune", action="store_true", help="stop early on near-constant subfunctions")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--baseline", action="store_true", help="also run the greedy precision baseline")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="implicert", description="certificates for blackbox Boolean models")
    parser.add_argument("--version", action="version", version=f"implicert {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("certify", help="certify one instance")
    _common(p)
    _certifier_flags(p)
    p.add_argument("--instance", required=True, help="0/1 string, index 0 leftmost")

    p = sub.add_parser("certify-batch", help="certify many instances against one shared tree")
    _common(p)
    _certifier_flags(p)
    src = p.add_mutually_exclusive_group()
    src.add_argument("--instances", help="file with one 0/1 string per line")
    src.add_argument("--all", action="store_true", help="every instance of the cube (default)")

    p = sub.add_parser("oracle", help="exact brute-force quantities at small d")
    p.add_argument("quantity", choices=ORACLE_QUANTITIES)
    _common(p)
    p.add_argument("--p", type=float, default=0.1)
    p.add_argument("--epsilon", type=float, default=0.0)
    p.add_argument("--feature", type=int)
    p.add_argument("--instance")
    p.add_argument("--cert", default="", help="comma-separated features for 'precision'")
    p.add_argument("--depth", type=int, help="depth for 'greedy-tree' (default d)")

    p = sub.add_parser("bench", help="benchmarks")
    p.add_argument("name", choices=("parity",))
    _common(p, model=False)
    p.add_argument("--grid", default="6,8,10", help="comma-separated dimensions")
    p.add_argument("--mode", choices=tuple(MODES), default="exact")
    p.add_argument("--seeds", type=int, default=50)
    p.add_argument("--epsilon", type=float, default=0.1)
    p.add_argument("--delta", type=float, default=0.1)
    p.add_argument("--depth", type=int, default=2)
    p.add_argument("--p", type=float, default=0.1)
    p.add_argument("--eta", type=float, default=0.05)

    p = sub.add_parser("selftest", help="estimator vs exact-oracle cross checks")
    _common(p, model=False)
    return parser


def _job_echo(args) -> dict:
    job = {k: v for k, v in vars(args).items() if k not in ("out", "format")}
    job["seed"] = args.seed
    return job


def _certifier_config(args) -> CertifierConfig:
    if args.depth is None and args.d_bound is None:
        raise UsageError("pass --depth or --d-bound")
    return CertifierConfig(args.epsilon, args.delta, depth=args.depth, d_bound=args.d_bound,
                           noise_rate=args.p, eta=args.eta)


def cmd_certify(args) -> dict:
    f = compile_model(load_model_text(args.model))
    x = instance_from_bits(args.instance, f.dimension)
    cfg = _certifier_config(args)
    params = wire_parameters(cfg, f.dimension, seed=args.seed, mode=MODES[args.mode],
                             prune_constant=args.prune, threads=args.threads)
    result = find_certificate(f, x, cfg, params)
    out = {"params": params.as_dict(), "certificate": result.as_dict(), "f_x": f.evaluate(x)}
    if isinstance(result, Certificate) and len(result) > params.depth:
        raise AssertionError("certificate longer than the depth budget")
    if args.baseline:
        base = greedy_precision_certificate(
            f, x, BaselineConfig(args.epsilon, mode=MODES[args.mode], seed=args.seed))
        out["baseline"] = base.as_dict()
    return out


def _read_instances(args, d: int):
    if args.instances:
        lines = Path(args.instances).read_text(encoding="utf-8").split()
        return [instance_from_bits(s, d) for s in lines]
    if d > 16:
        raise UsageError(f"refusing to enumerate 2^{d} instances; pass --instances")
    return list(all_instances(d))


def cmd_certify_batch(args) -> dict:
    f = compile_model(load_model_text(args.model))
    X = _read_instances(args, f.dimension)
    cfg = _certifier_config(args)
    params = wire_parameters(cfg, f.dimension, seed=args.seed, mode=MODES[args.mode],
                             prune_constant=args.prune, threads=args.threads)
    batch = certify_batch(f, X, cfg, params)
    rows = []
    for x, r in zip(X, batch.results):
        row = {**r.as_dict(), "instance": instance_to_bits(x)}
        if args.baseline:
            base = greedy_precision_certificate(
                f, x, BaselineConfig(args.epsilon, mode=MODES[args.mode], seed=args.seed))
            row["baseline_features"] = base.as_dict()["features"]
        rows.append(row)
    return {"params": params.as_dict(), "summary": batch.summary(), "instances": rows}


def cmd_oracle(args) -> dict:
    t = TruthTable.from_model(load_model_text(args.model))
    q = args.quantity
    x = instance_from_bits(args.instance, t.d) if args.instance else None

    def need_instance():
        if x is None:
            raise UsageError(f"oracle {q} needs --instance")
        return x

    if q == "ns":
        value = exact_noise_sensitivity(t, args.p)
    elif q == "score":
        if args.feature is None:
            raise UsageError("oracle score needs --feature")
        value = exact_score(t, args.feature, args.p)
    elif q == "precision":
        xi = need_instance()
        feats = [int(s) for s in args.cert.split(",") if s.strip()]
        value = exact_precision_error(t, xi, Restriction.from_instance(xi, feats))
    elif q == "cert-complexity":
        witness = smallest_certificate(t, need_instance(), args.epsilon)
        return {"quantity": q, "value": len(witness), "witness": list(witness)}
    elif q == "avg-cert-complexity":
        value = exact_avg_certificate_complexity(t, args.epsilon)
    elif q == "dt-complexity":
        value = exact_dt_complexity(t, args.epsilon)
    else:
        depth = t.d if args.depth is None else args.depth
        tree = exact_greedy_tree(t, args.p, depth)
        return {"quantity": q, "value": tree.to_dict(), "dsl": f"{tree.to_dsl()} d={t.d}"}
    return {"quantity": q, "value": value}


def cmd_bench_parity(args) -> dict:
    grid = [int(s) for s in args.grid.split(",") if s.strip()]
    if not grid:
        raise UsageError("empty --grid")
    rows = bench_parity(grid, mode=MODES[args.mode], seeds=args.seeds, epsilon=args.epsilon,
                        delta=args.delta, depth=args.depth, noise_rate=args.p, eta=args.eta,
                        seed=args.seed)
    return {"table": rows}


def cmd_selftest(args) -> dict:
    checks = selftest(seed=args.seed)
    return {"checks": checks, "passed": all(c["passed"] for c in checks)}


COMMANDS = {
    "certify": cmd_certify,
    "certify-batch": cmd_certify_batch,
    "oracle": cmd_oracle,
    "bench": cmd_bench_parity,
    "selftest": cmd_selftest,
}


def render(report: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(report, indent=2, sort_keys=True) + "\n"
    results = report["results"]
    if "table" in results:
        rows, columns = results["table"], PARITY_COLUMNS
    elif "instances" in results:
        rows = results["instances"]
        columns = sorted({k for r in rows for k in r})
    elif "checks" in results:
        rows, columns = results["checks"], ["model", "quantity", "exact", "estimate", "tolerance", "passed"]
    else:
        raise UsageError("csv output is only available for tables")
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=columns, extrasaction="ignore", lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: (" ".join(map(str, v)) if isinstance(v, list) else v) for k, v in row.items()})
    return buf.getvalue()


def run(argv=None) -> tuple[int, dict | None]:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # usage errors, --help and --version
        return (exc.code if isinstance(exc.code, int) else 1), None
    try:
        args.seed = resolve_seed(args.seed)
        start = time.perf_counter()
        results = COMMANDS[args.command](args)
        report = {
            "schema_version": SCHEMA_VERSION,
            "tool": "implicert",
            "version": __version__,
            "job": _job_echo(args),
            "seed": args.seed,
            "results": results,
            "wall_time_s": round(time.perf_counter() - start, 6),
        }
        text = render(report, args.format)
    except (UsageError, ModelError, ValueError, OSError) as exc:
        print(f"implicert: error: {exc}", file=sys.stderr)
        return 1, None
    except AssertionError as exc:
        print(f"implicert: internal invariant violated: {exc}", file=sys.stderr)
        return 2, None
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    if args.command == "selftest" and not results["passed"]:
        return 2, report
    return 0, report


def main(argv=None) -> int:
    return run(argv)[0]


if __name__ == "__main__":
    sys.exit(main())
