"""Certificate finding by walking the implicit tree, then checking precision by sampling."""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .estimators import PRECISION_STREAM, conditional_samples, make_rng
from .implicit_tree import MONTE_CARLO, ImplicitTree, NodeCache, TreeParams
from .model import BlackboxModel, Restriction, as_instance, instance_code, instance_to_bits

VERIFY_STREAM = 0x5EF1


@dataclass(frozen=True)
class CertifierConfig:
    epsilon: float
    delta: float
    depth: int | None = None  # None means wire k from d_bound
    d_bound: float | None = None
    c_k: float = 1.0
    c_eta: float = 1.0
    c_p: float = 1.0
    noise_rate: float | None = None
    eta: float | None = None

    def __post_init__(self):
        for name in ("epsilon", "delta"):
            v = getattr(self, name)
            if not 0 < v < 1:
                raise ValueError(f"{name} must lie in (0, 1), got {v}")
        for name in ("c_k", "c_eta", "c_p"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.d_bound is not None and self.d_bound <= 0:
            raise ValueError(f"d_bound must be positive, got {self.d_bound}")
        if self.depth is not None and self.depth < 0:
            raise ValueError(f"depth must be nonnegative, got {self.depth}")


def d_bound_from_certificate_complexity(c_hat: float, epsilon: float, delta: float, c: float = 1.0) -> float:
    """Decision-tree depth bound ``c * C^2 / (eps*delta)^9`` implied by a certificate complexity guess.

    Valid but wildly conservative; practical runs pass an explicit depth.
    """
    return c * c_hat ** 2 / (epsilon * delta) ** 9


def wire_parameters(cfg: CertifierConfig, d: int, seed: int = 0, mode: str = MONTE_CARLO,
                    **tree_options) -> TreeParams:
    """Tree parameters ``k = ceil(c_k (D/eps)^3)`` (capped at d), ``eta = c_eta/k``, ``p = c_p eps/D``.

    An explicit ``cfg.depth`` overrides k.  Without ``d_bound`` the depth itself
    stands in for D when choosing p.  eta is clamped to 1/2 for k <= 1.
    """
    if cfg.depth is None and cfg.d_bound is None:
        raise ValueError("need either an explicit depth or a decision-tree depth bound")
    if cfg.depth is not None:
        k = min(cfg.depth, d)
    else:
        k = min(d, math.ceil(cfg.c_k * (cfg.d_bound / cfg.epsilon) ** 3))
    eta = cfg.eta if cfg.eta is not None else min(0.5, cfg.c_eta / max(k, 1))
    if cfg.noise_rate is not None:
        p = cfg.noise_rate
    else:
        bound = cfg.d_bound if cfg.d_bound is not None else max(k, 1)
        p = min(1.0, cfg.c_p * cfg.epsilon / bound)
    return TreeParams(depth=k, eta=eta, noise_rate=p, seed=seed, mode=mode, **tree_options)


def verification_samples(epsilon: float, delta: float) -> int:
    return math.ceil(2 * math.log(2 / delta) / epsilon ** 2)


def acceptance_probability(true_error: float, epsilon: float, delta: float) -> float:
    """Chance that :func:`verify_certificate` accepts a certificate with this true error."""
    m = verification_samples(epsilon, delta)
    return float(stats.binom.cdf(math.floor(epsilon * m), m, true_error))


@dataclass(frozen=True)
class Verification:
    accepted: bool
    error: float
    samples: int


def verify_certificate(f: BlackboxModel, x, C: Restriction, epsilon: float, delta: float,
                       seed: int = 0) -> Verification:
    """Accept iff the empirical error over ``ceil(2 ln(2/delta)/eps^2)`` completions is <= eps.

    True error <= eps/2 is accepted, and true error >= 3 eps/2 rejected, each
    with probability at least 1 - delta.
    """
    x = as_instance(x, f.dimension)
    C.check_dimension(f.dimension)
    if not C.agrees_with(x):
        raise ValueError(f"restriction {C} disagrees with the instance")
    m = verification_samples(epsilon, delta)
    fx = f.evaluate(x)
    Y = conditional_samples(x, C, m, make_rng(seed, VERIFY_STREAM, PRECISION_STREAM))
    wrong = int(np.count_nonzero(f.evaluate_batch(Y) != fx))
    return Verification(wrong <= epsilon * m, wrong / m, m)


@dataclass(frozen=True)
class Certificate:
    features: Restriction
    instance: np.ndarray = field(repr=False)
    error: float
    queries: int
    params: TreeParams
    accepted: bool = True

    def __len__(self):
        return len(self.features)

    def as_dict(self) -> dict:
        return {
            "verdict": "certificate",
            "features": [i for i, _ in self.features],
            "values": [v for _, v in self.features],
            "size": len(self),
            "empirical_error": self.error,
            "queries": self.queries,
            "instance": instance_to_bits(self.instance),
        }


@dataclass(frozen=True)
class Bottom:
    reason: str
    error: float
    candidate: Restriction
    queries: int = 0
    accepted: bool = False

    def as_dict(self) -> dict:
        return {
            "verdict": "bottom",
            "reason": self.reason,
            "empirical_error": self.error,
            "candidate": [i for i, _ in self.candidate],
            "queries": self.queries,
        }


def verification_seed(params: TreeParams, x) -> int:
    """Per-instance verification stream, independent of walk order across a batch."""
    return (params.seed * 0x9E3779B97F4A7C15 + instance_code(x)) & ((1 << 64) - 1)


def find_certificate(f: BlackboxModel, x, cfg: CertifierConfig, params: TreeParams,
                     tree: ImplicitTree | None = None) -> Certificate | Bottom:
    x = as_instance(x, f.dimension)
    before = f.queries
    tree = tree if tree is not None else ImplicitTree(f, params)
    C = tree.walk(x)
    check = verify_certificate(f, x, C, cfg.epsilon, cfg.delta, verification_seed(params, x))
    queries = f.queries - before
    if check.accepted:
        return Certificate(C, x, check.error, queries, params)
    return Bottom(f"empirical error {check.error:.4f} exceeds epsilon {cfg.epsilon}",
                  check.error, C, queries)


@dataclass
class BatchResult:
    results: list
    bottom_rate: float
    size_histogram: dict[int, int]
    mean_queries: float

    def summary(self) -> dict:
        return {
            "instances": len(self.results),
            "bottom_rate": self.bottom_rate,
            "size_histogram": {str(k): v for k, v in sorted(self.size_histogram.items())},
            "mean_queries": self.mean_queries,
        }


def certify_batch(f: BlackboxModel, instances, cfg: CertifierConfig, params: TreeParams,
                  cache: NodeCache | None = None) -> BatchResult:
    """Certify every instance against one shared implicit tree."""
    tree = ImplicitTree(f, params, cache)
    results = [find_certificate(f, x, cfg, params, tree) for x in instances]
    n = len(results)
    bottoms = sum(isinstance(r, Bottom) for r in results)
    sizes = Counter(len(r) for r in results if isinstance(r, Certificate))
    mean_q = float(np.mean([r.queries for r in results])) if n else 0.0
    return BatchResult(results, bottoms / n if n else 0.0, dict(sizes), mean_q)
