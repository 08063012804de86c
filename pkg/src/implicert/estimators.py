"""Seeded Monte-Carlo estimators for noise sensitivity, scores, precision and means.

All randomness comes from :func:`make_rng`, a Philox (counter-based) generator
keyed by a 64-bit seed plus a stream path, so every estimate is a fixed
function of ``(model, config)``.
"""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass

import numpy as np

from .model import BlackboxModel, Restriction, as_instance

SEED_MASK = (1 << 64) - 1

# stream tags, so distinct estimators never share draws under one seed
NS_STREAM = 1
SCORE_STREAM = 2
PRECISION_STREAM = 3
MEAN_STREAM = 4


@dataclass(frozen=True)
class EstimatorConfig:
    samples: int
    seed: int = 0
    noise_rate: float = 0.1

    def __post_init__(self):
        if int(self.samples) < 1:
            raise ValueError(f"samples must be >= 1, got {self.samples}")
        if not 0 < self.noise_rate <= 1:
            raise ValueError(f"noise rate must lie in (0, 1], got {self.noise_rate}")


@dataclass(frozen=True)
class EstimateReport:
    estimate: float
    samples: int
    queries: int


def make_rng(seed: int, *stream: int) -> np.random.Generator:
    entropy = [int(seed) & SEED_MASK, *(int(s) & SEED_MASK for s in stream)]
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))


def node_seed(global_seed: int, alpha: Restriction) -> int:
    """64-bit seed for a tree node; depends on alpha only through its canonical key."""
    payload = f"{int(global_seed) & SEED_MASK}|{alpha.key()}".encode()
    return int.from_bytes(hashlib.blake2b(payload, digest_size=8).digest(), "little")


def hoeffding_samples(accuracy: float, confidence: float) -> int:
    """Samples so a [0,1]-bounded mean is within ``accuracy`` w.p. >= 1 - ``confidence``."""
    if not 0 < accuracy < 1:
        raise ValueError(f"accuracy must lie in (0, 1), got {accuracy}")
    if not 0 < confidence < 1:
        raise ValueError(f"confidence must lie in (0, 1), got {confidence}")
    return math.ceil(math.log(2 / confidence) / (2 * accuracy ** 2))


def uniform_signs(rng: np.random.Generator, shape) -> np.ndarray:
    return (2 * rng.integers(0, 2, size=shape, dtype=np.int8) - 1).astype(np.int8)


def perturb(x: np.ndarray, p: float, rng: np.random.Generator) -> np.ndarray:
    """Rerandomize each coordinate independently with probability ``p``.

    Works on one instance or a batch; a rerandomized coordinate is a fresh
    uniform sign, so it actually flips with probability ``p / 2``.
    """
    if not 0 <= p <= 1:
        raise ValueError(f"noise rate must lie in [0, 1], got {p}")
    x = np.asarray(x, dtype=np.int8)
    mask = rng.random(x.shape) < p
    fresh = uniform_signs(rng, x.shape)
    return np.where(mask, fresh, x).astype(np.int8)


def noisy_pairs(d: int, m: int, p: float, rng: np.random.Generator):
    X = uniform_signs(rng, (m, d))
    return X, perturb(X, p, rng)


def disagreement(f: BlackboxModel, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """Per-pair indicator ``f(X) != f(Y)`` (2 queries per pair)."""
    return f.evaluate_batch(X) != f.evaluate_batch(Y)


def estimate_noise_sensitivity(f: BlackboxModel, cfg: EstimatorConfig) -> float:
    X, Y = noisy_pairs(f.dimension, cfg.samples, cfg.noise_rate, make_rng(cfg.seed, NS_STREAM))
    return float(disagreement(f, X, Y).mean())


def score_samples(f: BlackboxModel, i: int, X: np.ndarray, Y: np.ndarray,
                  parent: np.ndarray | None = None) -> np.ndarray:
    """Per-pair score contributions of feature ``i`` on common noisy pairs.

    The three noise-sensitivity estimates share ``(X, Y)``, so a feature the
    function ignores gets a score of exactly zero.  ``parent`` may carry the
    already computed disagreement of ``f`` itself on these pairs.
    """
    if parent is None:
        parent = disagreement(f, X, Y)
    lo = disagreement(f.restrict(Restriction(((i, -1),))), X, Y)
    hi = disagreement(f.restrict(Restriction(((i, 1),))), X, Y)
    return parent - 0.5 * (lo.astype(np.float64) + hi)


def estimate_score(f: BlackboxModel, i: int, cfg: EstimatorConfig) -> float:
    if not 0 <= i < f.dimension:
        raise ValueError(f"feature {i} out of range for dimension {f.dimension}")
    X, Y = noisy_pairs(f.dimension, cfg.samples, cfg.noise_rate, make_rng(cfg.seed, SCORE_STREAM))
    return float(score_samples(f, i, X, Y).mean())


def conditional_samples(x: np.ndarray, C: Restriction, m: int, rng: np.random.Generator) -> np.ndarray:
    """``m`` uniform instances agreeing with ``x`` on the features of ``C``."""
    return C.apply(uniform_signs(rng, (m, len(x))))


def _check_certificate(x: np.ndarray, C: Restriction) -> None:
    C.check_dimension(len(x))
    if not C.agrees_with(x):
        raise ValueError(f"restriction {C} disagrees with the instance")


def estimate_precision_error(f: BlackboxModel, x, C: Restriction, cfg: EstimatorConfig) -> float:
    """Estimate ``Pr[f(y) != f(x) | y_C = x_C]`` from uniform completions."""
    x = as_instance(x, f.dimension)
    _check_certificate(x, C)
    fx = f.evaluate(x)
    Y = conditional_samples(x, C, cfg.samples, make_rng(cfg.seed, PRECISION_STREAM))
    return float((f.evaluate_batch(Y) != fx).mean())


def estimate_mean(f: BlackboxModel, cfg: EstimatorConfig) -> float:
    X = uniform_signs(make_rng(cfg.seed, MEAN_STREAM), (cfg.samples, f.dimension))
    return float(f.evaluate_batch(X).mean())


def measure(estimator, f: BlackboxModel, *args, cfg: EstimatorConfig) -> EstimateReport:
    """Run ``estimator(f, *args, cfg)`` and record the queries it spent."""
    before = f.queries
    value = estimator(f, *args, cfg)
    return EstimateReport(value, cfg.samples, f.queries - before)
