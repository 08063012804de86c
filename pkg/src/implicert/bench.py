"""Experiments: the parity succinctness benchmark and the oracle-vs-estimator self test."""
from __future__ import annotations

import numpy as np

from . import families
from .baseline import BaselineConfig, greedy_precision_certificate
from .certifier import Certificate, CertifierConfig, certify_batch, find_certificate, wire_parameters
from .estimators import (
    EstimatorConfig, estimate_mean, estimate_noise_sensitivity, estimate_precision_error,
    estimate_score, hoeffding_samples, make_rng, uniform_signs,
)
from .implicit_tree import EXACT, MONTE_CARLO, ImplicitTree
from .model import Restriction, all_instances, compile_model
from .oracles import (
    TruthTable, exact_avg_certificate_complexity, exact_mean, exact_noise_sensitivity,
    exact_precision_error, exact_score, pair_enumeration_noise_sensitivity,
)

PARITY_COLUMNS = [
    "d", "mode", "instances", "exact_certificate_complexity",
    "implicit_size_mean", "implicit_size_max", "implicit_bottom_rate", "implicit_size2_rate",
    "implicit_max_exact_error", "implicit_queries_mean",
    "baseline_size_mean", "baseline_size_min", "baseline_max_exact_error", "baseline_queries_mean",
]


def bench_parity(grid, mode: str = EXACT, seeds: int = 50, epsilon: float = 0.1,
                 delta: float = 0.1, depth: int = 2, noise_rate: float = 0.1,
                 eta: float = 0.05, seed: int = 0, baseline_samples: int = 2000) -> list[dict]:
    """Implicit certifier vs greedy precision baseline on ``x_{d-1} xor x_d``.

    Exact mode certifies every instance; Monte-Carlo mode certifies one random
    instance per seed.
    """
    grid = [int(d) for d in grid]
    if not grid:
        raise ValueError("the dimension grid is empty")
    if any(d < 2 for d in grid):
        raise ValueError("parity benchmark needs d >= 2")
    rows = []
    for d in grid:
        f = compile_model(families.last_pair_parity(d))
        table = TruthTable.from_model(f)
        cfg = CertifierConfig(epsilon, delta, depth=depth, noise_rate=noise_rate, eta=eta)
        base_cfg = BaselineConfig(epsilon, samples=baseline_samples, mode=mode, seed=seed)
        if mode == EXACT:
            X = all_instances(d)
            batch = certify_batch(f, X, cfg, wire_parameters(cfg, d, seed=seed, mode=EXACT))
            implicit = batch.results
        else:
            rng = make_rng(seed, d)
            X = uniform_signs(rng, (seeds, d))
            implicit = [
                find_certificate(f, x, cfg, wire_parameters(cfg, d, seed=seed + s, mode=MONTE_CARLO))
                for s, x in enumerate(X)
            ]
        baseline = [greedy_precision_certificate(f, x, base_cfg) for x in X]
        accepted = [(x, r) for x, r in zip(X, implicit) if isinstance(r, Certificate)]
        sizes = [len(r) for _, r in accepted]
        rows.append({
            "d": d,
            "mode": mode,
            "instances": len(X),
            "exact_certificate_complexity": exact_avg_certificate_complexity(table, 0.0),
            "implicit_size_mean": float(np.mean(sizes)) if sizes else None,
            "implicit_size_max": max(sizes) if sizes else None,
            "implicit_bottom_rate": 1 - len(accepted) / len(X),
            "implicit_size2_rate": sum(s == 2 for s in sizes) / len(X),
            "implicit_max_exact_error": max(
                (exact_precision_error(table, x, r.features) for x, r in accepted), default=None),
            "implicit_queries_mean": float(np.mean([r.queries for r in implicit])),
            "baseline_size_mean": float(np.mean([len(b) for b in baseline])),
            "baseline_size_min": min(len(b) for b in baseline),
            "baseline_max_exact_error": max(
                exact_precision_error(table, x, b.features) for x, b in zip(X, baseline)),
            "baseline_queries_mean": float(np.mean([b.queries for b in baseline])),
        })
    return rows


def selftest(seed: int = 0, accuracy: float = 0.05, confidence: float = 0.01,
             noise_rate: float = 0.1) -> list[dict]:
    """Cross-check each estimator against its exact oracle on small models.

    Each check passes when the estimate lands within ``accuracy`` of the exact
    value at the Hoeffding sample size for ``(accuracy, confidence)``.
    """
    m = hoeffding_samples(accuracy, confidence)
    rng = np.random.default_rng(seed)
    checks = []
    for name, src in families.standard_families(6, rng, tables=3).items():
        f = compile_model(src)
        t = TruthTable.from_model(f)
        x = all_instances(6)[int(rng.integers(64))]
        C = Restriction.from_instance(x, [0, 3])
        spectral = exact_noise_sensitivity(t, noise_rate)
        pairs = {
            "ns_spectral_vs_pairs": (spectral, pair_enumeration_noise_sensitivity(t, noise_rate), 1e-9),
            "ns": (spectral, estimate_noise_sensitivity(f, EstimatorConfig(m, seed, noise_rate)), accuracy),
            "score": (exact_score(t, 5, noise_rate),
                      estimate_score(f, 5, EstimatorConfig(m, seed, noise_rate)), accuracy),
            "mean": (exact_mean(t), estimate_mean(f, EstimatorConfig(m, seed)), 2 * accuracy),
            "precision": (exact_precision_error(t, x, C),
                          estimate_precision_error(f, x, C, EstimatorConfig(m, seed)), accuracy),
        }
        for quantity, (exact, est, tol) in pairs.items():
            checks.append({
                "model": src, "quantity": quantity, "exact": exact, "estimate": est,
                "tolerance": tol, "passed": bool(abs(exact - est) <= tol),
            })
    return checks


def walk_all(f, params, instances) -> dict[str, int]:
    """Node -> feature map induced by walking every instance through one implicit tree."""
    return ImplicitTree(f, params).walked_tree(instances)
