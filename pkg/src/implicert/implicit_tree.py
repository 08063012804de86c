"""Implicit access to the depth-k approximate greedy noise-stabilizing tree.

The tree is never built.  A node is a :class:`Restriction`; ``query`` estimates
the scores of the free features of ``f_alpha`` and returns the best one.  Every
random draw at a node is seeded by ``node_seed(seed, alpha)``, so a node's
answer is the same whichever walk reaches it first, with or without the cache.
"""
from __future__ import annotations

import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .estimators import (
    MEAN_STREAM, SCORE_STREAM, disagreement, hoeffding_samples, make_rng, node_seed, noisy_pairs,
    score_samples, uniform_signs,
)
from .model import BlackboxModel, Restriction, as_instance
from .oracles import TruthTable, argmax_lowest, exact_greedy_tree_query, exact_scores, sign_of_mean

MONTE_CARLO = "monte_carlo"
EXACT = "exact_oracle"
MODES = (MONTE_CARLO, EXACT)


@dataclass(frozen=True)
class TreeParams:
    depth: int
    eta: float
    noise_rate: float
    seed: int = 0
    mode: str = MONTE_CARLO
    prune_constant: bool = False
    node_delta: float | None = None  # default 0.01 / (d * k)
    threads: int = 1

    def __post_init__(self):
        if self.depth < 0:
            raise ValueError(f"depth must be nonnegative, got {self.depth}")
        if not 0 < self.eta < 1:
            raise ValueError(f"eta must lie in (0, 1), got {self.eta}")
        if not 0 < self.noise_rate <= 1:
            raise ValueError(f"noise rate must lie in (0, 1], got {self.noise_rate}")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.node_delta is not None and not 0 < self.node_delta < 1:
            raise ValueError(f"node_delta must lie in (0, 1), got {self.node_delta}")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")

    def as_dict(self) -> dict:
        return {
            "depth": self.depth, "eta": self.eta, "noise_rate": self.noise_rate,
            "seed": self.seed, "mode": self.mode, "prune_constant": self.prune_constant,
            "node_delta": self.node_delta, "threads": self.threads,
        }


class NodeCache:
    """First write wins; later writers get the stored value back."""

    def __init__(self):
        self._data: dict[tuple[str, str], object] = {}
        self._lock = threading.Lock()

    def get(self, kind: str, alpha: Restriction):
        return self._data.get((kind, alpha.key()))

    def put(self, kind: str, alpha: Restriction, value):
        with self._lock:
            return self._data.setdefault((kind, alpha.key()), value)

    def __len__(self):
        return len(self._data)

    def items(self, kind: str):
        return [(k, v) for (t, k), v in self._data.items() if t == kind]


class ImplicitTree:
    def __init__(self, f: BlackboxModel, params: TreeParams, cache: NodeCache | None = None):
        if params.depth > f.dimension:
            raise ValueError(f"depth {params.depth} exceeds the dimension {f.dimension}")
        self.f = f
        self.params = params
        self.cache = cache if cache is not None else NodeCache()
        self._table: TruthTable | None = None
        self._table_lock = threading.Lock()
        d, k = f.dimension, max(params.depth, 1)
        self.node_delta = params.node_delta if params.node_delta is not None else min(0.5, 0.01 / (d * k))
        self.samples = hoeffding_samples(params.eta / 2, self.node_delta)

    @property
    def table(self) -> TruthTable:
        with self._table_lock:
            if self._table is None:
                self._table = TruthTable.from_model(self.f)
            return self._table

    def _check(self, alpha: Restriction) -> None:
        alpha.check_dimension(self.f.dimension)
        if len(alpha) > self.params.depth:
            raise ValueError(f"node {alpha} is deeper than the depth budget {self.params.depth}")

    # -- means -------------------------------------------------------------

    def node_mean(self, alpha: Restriction) -> float:
        cached = self.cache.get("mean", alpha)
        if cached is not None:
            return cached
        if self.params.mode == EXACT:
            mean = self.table.restrict(alpha).mean()
        else:
            rng = make_rng(node_seed(self.params.seed, alpha), MEAN_STREAM)
            X = uniform_signs(rng, (self.samples, self.f.dimension))
            mean = float(self.f.restrict(alpha).evaluate_batch(X).mean())
        return self.cache.put("mean", alpha, mean)

    # -- the three operations ----------------------------------------------

    def is_leaf(self, alpha: Restriction) -> bool:
        self._check(alpha)
        if len(alpha) == self.params.depth:
            return True
        if self.params.prune_constant:
            return abs(self.node_mean(alpha)) > 1 - 2 * self.params.eta
        return False

    def node_scores(self, alpha: Restriction) -> dict[int, float]:
        """Score (estimated or exact) of every free feature of ``f_alpha``."""
        if self.params.mode == EXACT:
            return exact_scores(self.table, alpha, self.params.noise_rate)
        d = self.f.dimension
        fixed = set(alpha.features)
        free = [i for i in range(d) if i not in fixed]
        if not free:
            return {}
        rng = make_rng(node_seed(self.params.seed, alpha), SCORE_STREAM)
        X, Y = noisy_pairs(d, self.samples, self.params.noise_rate, rng)
        sub = self.f.restrict(alpha)
        parent = disagreement(sub, X, Y)

        def one(i):
            return float(score_samples(sub, i, X, Y, parent).mean())

        if self.params.threads > 1:
            with ThreadPoolExecutor(self.params.threads) as pool:
                values = list(pool.map(one, free))
        else:
            values = [one(i) for i in free]
        return dict(zip(free, values))

    def query(self, alpha: Restriction) -> int:
        self._check(alpha)
        cached = self.cache.get("query", alpha)
        if cached is not None:
            return cached
        if self.is_leaf(alpha):
            raise ValueError(f"node {alpha} is a leaf")
        if len(alpha) >= self.f.dimension:
            raise ValueError("every feature is already restricted")
        if self.params.mode == EXACT:
            feature = exact_greedy_tree_query(self.table, alpha, self.params.noise_rate)
        else:
            feature = argmax_lowest(self.node_scores(alpha))
        return self.cache.put("query", alpha, feature)

    def leaf_value(self, alpha: Restriction) -> int:
        if not self.is_leaf(alpha):
            raise ValueError(f"node {alpha} is not a leaf")
        return sign_of_mean(self.node_mean(alpha))

    def walk(self, x) -> Restriction:
        """Root-to-leaf path of ``x``, in query order."""
        x = as_instance(x, self.f.dimension)
        alpha = Restriction()
        while not self.is_leaf(alpha):
            i = self.query(alpha)
            alpha = alpha.extend(i, int(x[i]))
        return alpha

    def predict(self, x) -> int:
        return self.leaf_value(self.walk(x))

    def walked_tree(self, instances: np.ndarray) -> dict[str, int]:
        """Map node key -> queried feature over the walks of ``instances``.

        Raises if some node would be queried with two different features.
        """
        nodes: dict[str, int] = {}
        for x in instances:
            alpha = Restriction()
            for i, v in self.walk(x):
                if nodes.setdefault(alpha.key(), i) != i:
                    raise AssertionError(f"node {alpha} queried with {nodes[alpha.key()]} and {i}")
                alpha = alpha.extend(i, v)
        return nodes
