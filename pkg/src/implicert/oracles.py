"""Brute-force ground truth at small dimension.

Truth tables are indexed by instance code (feature 0 is the most significant
bit), so ``labels.reshape((2,) * d)`` puts feature ``i`` on axis ``i`` with
index 0 for -1 and index 1 for +1.  Subcube tables use a third index, 2, for
"free".
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .model import (
    TABLE_MAX_DIM, BlackboxModel, DimensionError, ModelExpr, Restriction, all_instances,
    as_instance, compile_model, instance_code,
)

DT_MAX_DIM = 14
CERT_MAX_DIM = 16
AVG_CERT_MAX_DIM = 12
PAIR_ENUM_MAX_DIM = 10
TIE_TOL = 1e-12


def _cap(d: int, cap: int, what: str) -> None:
    if d > cap:
        raise DimensionError(f"{what} is capped at d <= {cap}, got d={d}")


@dataclass(frozen=True, eq=False)
class TruthTable:
    d: int
    labels: np.ndarray

    def __post_init__(self):
        _cap(self.d, TABLE_MAX_DIM, "truth table")
        labels = np.asarray(self.labels, dtype=np.int8)
        if labels.shape != (1 << self.d,):
            raise DimensionError(f"truth table needs {1 << self.d} entries, got {labels.shape}")
        if not np.all((labels == 1) | (labels == -1)):
            raise ValueError("truth table entries must be -1 or +1")
        object.__setattr__(self, "labels", labels)

    @classmethod
    def from_model(cls, f: BlackboxModel | ModelExpr | str) -> "TruthTable":
        """Materialize ``f`` by querying all ``2**d`` instances."""
        if not isinstance(f, BlackboxModel):
            f = compile_model(f)
        _cap(f.dimension, TABLE_MAX_DIM, "truth table")
        return cls(f.dimension, f.evaluate_batch(all_instances(f.dimension)))

    def cube(self) -> np.ndarray:
        return self.labels.reshape((2,) * self.d)

    def __call__(self, x) -> int:
        return int(self.labels[instance_code(as_instance(x, self.d))])

    def __eq__(self, other):
        return isinstance(other, TruthTable) and self.d == other.d and np.array_equal(
            self.labels, other.labels)

    def restrict(self, alpha: Restriction) -> "TruthTable":
        """``f_alpha`` as a table over the same ``d`` features."""
        alpha.check_dimension(self.d)
        if not alpha.pairs:
            return self
        index = [slice(None)] * self.d
        for i, v in alpha:
            index[i] = slice(1, 2) if v > 0 else slice(0, 1)
        sub = self.cube()[tuple(index)]
        return TruthTable(self.d, np.broadcast_to(sub, (2,) * self.d).reshape(-1))

    def mean(self) -> float:
        return float(self.labels.mean())


@dataclass(frozen=True, eq=False)
class Spectrum:
    d: int
    coefficients: np.ndarray  # indexed by subset mask, feature 0 = most significant bit

    def coefficient(self, subset) -> float:
        mask = sum(1 << (self.d - 1 - i) for i in set(subset))
        return float(self.coefficients[mask])

    def weights(self) -> np.ndarray:
        return self.coefficients ** 2


def subset_sizes(d: int) -> np.ndarray:
    sizes = np.zeros(1 << d, dtype=np.int64)
    for b in range(d):
        sizes += (np.arange(1 << d) >> b) & 1
    return sizes


def walsh_hadamard(t: TruthTable) -> Spectrum:
    """All Fourier coefficients ``E[f(x) prod_{i in S} x_i]`` in ``O(d 2^d)``."""
    a = t.labels.astype(np.float64).reshape((2,) * t.d)
    for axis in range(t.d):
        lo, hi = np.take(a, 0, axis=axis), np.take(a, 1, axis=axis)
        a = np.stack([lo + hi, hi - lo], axis=axis)
    return Spectrum(t.d, a.reshape(-1) / (1 << t.d))


def inverse_walsh_hadamard(s: Spectrum) -> np.ndarray:
    """Function values ``sum_S fhat(S) chi_S(x)`` in code order."""
    a = s.coefficients.reshape((2,) * s.d)
    for axis in range(s.d):
        c0, c1 = np.take(a, 0, axis=axis), np.take(a, 1, axis=axis)
        a = np.stack([c0 - c1, c0 + c1], axis=axis)
    return a.reshape(-1)


def exact_noise_sensitivity(t: TruthTable, p: float) -> float:
    if not 0 <= p <= 1:
        raise ValueError(f"noise rate must lie in [0, 1], got {p}")
    w = walsh_hadamard(t).weights()
    stability = float(np.sum((1.0 - p) ** subset_sizes(t.d) * w))
    return 0.5 - 0.5 * stability


def pair_enumeration_noise_sensitivity(t: TruthTable, p: float) -> float:
    """Noise sensitivity by summing over all ``4**d`` pairs; independent of the spectrum."""
    _cap(t.d, PAIR_ENUM_MAX_DIM, "pair enumeration")
    codes = np.arange(1 << t.d)
    hamming = subset_sizes(t.d)[codes[:, None] ^ codes[None, :]]
    flip = p / 2
    trans = flip ** hamming * (1 - flip) ** (t.d - hamming)
    differ = t.labels[:, None] != t.labels[None, :]
    return float((trans * differ).sum() / (1 << t.d))


def exact_score(t: TruthTable, i: int, p: float) -> float:
    if not 0 <= i < t.d:
        raise ValueError(f"feature {i} out of range for d={t.d}")
    lo = exact_noise_sensitivity(t.restrict(Restriction(((i, -1),))), p)
    hi = exact_noise_sensitivity(t.restrict(Restriction(((i, 1),))), p)
    return exact_noise_sensitivity(t, p) - 0.5 * (lo + hi)


def _subcube(t: TruthTable, C: Restriction) -> np.ndarray:
    index = [slice(None)] * t.d
    for i, v in C:
        index[i] = 1 if v > 0 else 0
    return t.cube()[tuple(index)]


def exact_mean(t: TruthTable) -> float:
    return t.mean()


def exact_precision_error(t: TruthTable, x, C: Restriction) -> float:
    x = as_instance(x, t.d)
    C.check_dimension(t.d)
    if not C.agrees_with(x):
        raise ValueError(f"restriction {C} disagrees with the instance")
    fx = t(x)
    return float(np.mean(_subcube(t, C) != fx))


def smallest_certificate(t: TruthTable, x, eps: float, max_size: int | None = None) -> tuple[int, ...] | None:
    """First subset (by size, then lexicographic) that is an ``eps``-error certificate for ``x``.

    Returns None only when ``max_size`` cuts the search short.
    """
    _cap(t.d, CERT_MAX_DIM, "certificate enumeration")
    if not 0 <= eps < 1:
        raise ValueError(f"eps must lie in [0, 1), got {eps}")
    x = as_instance(x, t.d)
    fx = t(x)
    cube = t.cube()
    bits = (x > 0).astype(np.intp)
    top = t.d if max_size is None else min(max_size, t.d)
    for size in range(top + 1):
        budget = eps * (1 << (t.d - size))
        for S in itertools.combinations(range(t.d), size):
            index = [slice(None)] * t.d
            for i in S:
                index[i] = bits[i]
            wrong = np.count_nonzero(cube[tuple(index)] != fx)
            if wrong <= budget:
                return S
    return None


def exact_certificate_complexity(t: TruthTable, x, eps: float) -> int:
    return len(smallest_certificate(t, x, eps))


def subcube_sums(t: TruthTable) -> np.ndarray:
    """Sum of labels over every subcube; shape ``(3,) * d``, index 2 means free."""
    a = t.cube().astype(np.int64)
    for axis in range(t.d):
        a = np.concatenate([a, a.sum(axis=axis, keepdims=True)], axis=axis)
    return a


def _free_counts(d: int) -> np.ndarray:
    n = np.ones((3,) * d, dtype=np.int64)
    for axis in range(d):
        shape = [1] * d
        shape[axis] = 3
        n = n * np.array([1, 1, 2], dtype=np.int64).reshape(shape)
    return n


def certificate_complexities(t: TruthTable, eps: float) -> np.ndarray:
    """``C(f, x, eps)`` for every instance, in code order."""
    _cap(t.d, AVG_CERT_MAX_DIM, "all-instance certificate enumeration")
    if not 0 <= eps < 1:
        raise ValueError(f"eps must lie in [0, 1), got {eps}")
    d = t.d
    sums = subcube_sums(t).reshape(-1)
    bits = (all_instances(d) > 0).astype(np.int64)
    w = 3 ** np.arange(d - 1, -1, -1, dtype=np.int64)
    fx = t.labels.astype(np.int64)
    result = np.full(1 << d, -1, dtype=np.int64)
    for size in range(d + 1):
        n_free = 1 << (d - size)
        budget = eps * n_free
        for S in itertools.combinations(range(d), size):
            S = list(S)
            free = [i for i in range(d) if i not in S]
            idx = bits[:, S] @ w[S] + 2 * w[free].sum()
            wrong = (n_free - fx * sums[idx]) // 2
            hit = (result < 0) & (wrong <= budget)
            result[hit] = size
        if np.all(result >= 0):
            break
    return result


def exact_avg_certificate_complexity(t: TruthTable, eps: float) -> float:
    return float(certificate_complexities(t, eps).mean())


class DepthSearch:
    """Least misclassification count of depth-``k`` trees on every subcube.

    ``errors(k)[alpha]`` is filled bottom-up over all ``3**d`` subcubes: a leaf
    costs the minority count, an internal node the best split of the two
    halves at depth ``k - 1``.  One instance per job; not shared across threads.
    """

    def __init__(self, t: TruthTable):
        _cap(t.d, DT_MAX_DIM, "decision-tree complexity search")
        self.t = t
        n = _free_counts(t.d)
        self.leaf = (n - np.abs(subcube_sums(t))) // 2
        self._levels = [self.leaf]

    def errors(self, k: int) -> np.ndarray:
        d = self.t.d
        while len(self._levels) <= k:
            prev = self._levels[-1]
            cur = self.leaf.copy()
            for axis in range(d):
                split = np.take(prev, 0, axis=axis) + np.take(prev, 1, axis=axis)
                index = [slice(None)] * d
                index[axis] = 2
                index = tuple(index)
                cur[index] = np.minimum(cur[index], split)
            self._levels.append(cur)
        return self._levels[k]

    def root_errors(self, k: int) -> int:
        return int(self.errors(k)[(2,) * self.t.d])

    def min_depth(self, eps: float) -> int:
        budget = eps * (1 << self.t.d)
        for k in range(self.t.d + 1):
            if self.root_errors(k) <= budget:
                return k
        raise AssertionError("a depth-d tree always computes f exactly")


def exact_dt_complexity(t: TruthTable, eps: float) -> int:
    if not 0 <= eps < 1:
        raise ValueError(f"eps must lie in [0, 1), got {eps}")
    return DepthSearch(t).min_depth(eps)


def sign_of_mean(mean: float) -> int:
    return 1 if mean >= 0 else -1


def exact_scores(t: TruthTable, alpha: Restriction, p: float) -> dict[int, float]:
    sub = t.restrict(alpha)
    fixed = set(alpha.features)
    return {i: exact_score(sub, i, p) for i in range(t.d) if i not in fixed}


def argmax_lowest(scores: dict[int, float], tol: float = 0.0) -> int:
    best = max(scores.values())
    return min(i for i, s in scores.items() if s >= best - tol)


def exact_greedy_tree_query(t: TruthTable, alpha: Restriction, p: float) -> int:
    """Feature of highest exact score for ``f_alpha``; ties go to the lowest index."""
    alpha.check_dimension(t.d)
    scores = exact_scores(t, alpha, p)
    if not scores:
        raise ValueError("every feature is already restricted")
    return argmax_lowest(scores, TIE_TOL)


@dataclass
class GreedyNode:
    feature: int | None = None
    value: int | None = None
    neg: "GreedyNode | None" = None
    pos: "GreedyNode | None" = None

    def to_dsl(self) -> str:
        if self.feature is None:
            return f"(const {'+1' if self.value > 0 else '-1'})"
        return f"(tree {self.feature} {self.neg.to_dsl()} {self.pos.to_dsl()})"

    def to_dict(self) -> dict:
        if self.feature is None:
            return {"leaf": self.value}
        return {"feature": self.feature, "neg": self.neg.to_dict(), "pos": self.pos.to_dict()}

    def nodes(self, alpha: Restriction = Restriction()):
        """Yield ``(alpha, node)`` pairs in preorder."""
        yield alpha, self
        if self.feature is not None:
            yield from self.neg.nodes(alpha.extend(self.feature, -1))
            yield from self.pos.nodes(alpha.extend(self.feature, 1))


def exact_greedy_tree(t: TruthTable, p: float, depth: int) -> GreedyNode:
    """Materialize the depth-``depth`` greedy noise-stabilizing tree with sign-of-mean leaves."""
    if not 0 <= depth <= t.d:
        raise ValueError(f"depth must lie in [0, {t.d}], got {depth}")

    def build(alpha: Restriction) -> GreedyNode:
        if len(alpha) == depth:
            return GreedyNode(value=sign_of_mean(t.restrict(alpha).mean()))
        i = exact_greedy_tree_query(t, alpha, p)
        return GreedyNode(i, None, build(alpha.extend(i, -1)), build(alpha.extend(i, 1)))

    return build(Restriction())
