import itertools
from functools import lru_cache

import numpy as np
import pytest
from hypothesis import given, strategies as st

from implicert import families
from implicert.model import DimensionError, ExprModel, Restriction, all_instances
from implicert.oracles import (
    DepthSearch, TruthTable, certificate_complexities, exact_avg_certificate_complexity,
    exact_certificate_complexity, exact_dt_complexity, exact_greedy_tree,
    exact_greedy_tree_query, exact_noise_sensitivity, exact_precision_error, exact_score,
    inverse_walsh_hadamard, pair_enumeration_noise_sensitivity, smallest_certificate,
    walsh_hadamard,
)

from conftest import exprs


def table(src):
    return TruthTable.from_model(src)


def tables(max_d=5):
    return st.integers(1, max_d).flatmap(
        lambda d: st.lists(st.sampled_from([-1, 1]), min_size=1 << d, max_size=1 << d).map(
            lambda labels: TruthTable(d, np.array(labels))))


# -- independent brute-force oracles (plain Python over explicit point lists) --

def points(d):
    return [tuple(p) for p in itertools.product((-1, 1), repeat=d)]


def naive_coefficient(t, S):
    return sum(t(x) * np.prod([x[i] for i in S]) for x in points(t.d)) / 2 ** t.d


def naive_precision_error(t, x, C):
    fixed = dict(C)
    pts = [y for y in points(t.d) if all(y[i] == v for i, v in fixed.items())]
    return sum(t(y) != t(x) for y in pts) / len(pts)


def naive_cert_complexity(t, x, eps):
    for size in range(t.d + 1):
        for S in itertools.combinations(range(t.d), size):
            if naive_precision_error(t, x, Restriction.from_instance(x, S)) <= eps:
                return size


def naive_min_depth(t, eps):
    d = t.d
    values = {x: t(x) for x in points(d)}

    @lru_cache(maxsize=None)
    def errors(fixed, k):
        pts = [x for x in values if all(x[i] == v for i, v in fixed)]
        plus = sum(values[x] > 0 for x in pts)
        best = min(plus, len(pts) - plus)
        if k == 0 or best == 0:
            return best
        used = {i for i, _ in fixed}
        for i in range(d):
            if i not in used:
                best = min(best, sum(errors(tuple(sorted(fixed + ((i, b),))), k - 1) for b in (-1, 1)))
        return best

    return next(k for k in range(d + 1) if errors((), k) <= eps * 2 ** d)


# -- spectra --

def test_wht_examples():
    s = walsh_hadamard(table("x1 d=3"))
    assert s.coefficient([1]) == 1.0
    assert np.count_nonzero(s.coefficients) == 1
    s = walsh_hadamard(table("(xor x0 x2) d=3"))
    assert s.coefficient([0, 2]) == 1.0
    assert np.count_nonzero(s.coefficients) == 1
    assert walsh_hadamard(table("(or x0 x1 x2) d=3")).coefficient([]) == 0.75


@given(tables(5))
def test_wht_matches_naive_and_inverts(t):
    s = walsh_hadamard(t)
    for size in range(t.d + 1):
        for S in itertools.combinations(range(t.d), size):
            assert s.coefficient(S) == pytest.approx(naive_coefficient(t, S), abs=1e-12)
    assert np.sum(s.weights()) == pytest.approx(1.0, abs=1e-9)
    assert np.allclose(inverse_walsh_hadamard(s), t.labels)


def test_wht_dimension_cap():
    with pytest.raises(DimensionError):
        TruthTable(21, np.ones(1, dtype=np.int8))


# -- noise sensitivity and scores --

@pytest.mark.parametrize("p", [0.0, 0.1, 0.3, 0.5, 1.0])
def test_ns_hand_formulas(p):
    assert exact_noise_sensitivity(table("(const +1) d=4"), p) == pytest.approx(0.0, abs=1e-15)
    assert exact_noise_sensitivity(table("x2 d=4"), p) == pytest.approx(p / 2, abs=1e-12)
    assert exact_noise_sensitivity(table("(xor x0 x1) d=2"), p) == pytest.approx(
        0.5 - 0.5 * (1 - p) ** 2, abs=1e-12)
    assert pair_enumeration_noise_sensitivity(table("(xor x0 x1) d=2"), p) == pytest.approx(
        0.5 - 0.5 * (1 - p) ** 2, abs=1e-12)


def test_ns_and_score_known_values():
    parity = table("(xor x0 x1) d=2")
    assert exact_noise_sensitivity(parity, 0.1) == pytest.approx(0.095, abs=1e-12)
    assert exact_score(parity, 0, 0.1) == pytest.approx(0.045, abs=1e-12)
    assert exact_score(table("x1 d=3"), 1, 0.2) == pytest.approx(0.1, abs=1e-12)
    assert exact_score(table("(xor x0 x1) d=4"), 3, 0.1) == 0.0


@given(exprs(6), st.sampled_from([0.0, 0.1, 0.5, 1.0]))
def test_spectral_ns_matches_pair_enumeration(expr, p):
    t = TruthTable.from_model(ExprModel(expr))
    assert exact_noise_sensitivity(t, p) == pytest.approx(pair_enumeration_noise_sensitivity(t, p), abs=1e-9)


@given(tables(5), st.data())
def test_parity_score_formula_and_irrelevance(t, data):
    i = data.draw(st.integers(0, t.d - 1))
    lo, hi = t.restrict(Restriction.of({i: -1})), t.restrict(Restriction.of({i: 1}))
    if lo == hi:
        assert exact_score(t, i, 0.2) == 0.0


@pytest.mark.parametrize("j", [1, 2, 3, 4])
def test_parity_junta_scores(j):
    # restricting a relevant variable of a size-j parity leaves a size-(j-1) parity
    p = 0.1
    t = table(families.parity(6, range(j)))
    want = 0.5 * p * (1 - p) ** (j - 1)
    assert exact_score(t, 0, p) == pytest.approx(want, abs=1e-12)
    assert exact_score(t, 5, p) == 0.0


# -- precision and certificates --

def test_precision_examples():
    parity = table("(xor x3 x7) d=10")
    x = np.ones(10, dtype=np.int8)
    assert exact_precision_error(parity, x, Restriction.from_instance(x, [3, 7])) == 0.0
    assert exact_precision_error(parity, x, Restriction.from_instance(x, [3])) == 0.5
    or3 = table("(or x0 x1 x2) d=3")
    assert exact_precision_error(or3, [-1, -1, -1], Restriction.of({0: -1, 1: -1})) == 0.5
    with pytest.raises(ValueError):
        exact_precision_error(or3, [-1, -1, -1], Restriction.of({0: 1}))


def test_certificate_complexity_examples():
    or3 = table("(or x0 x1 x2) d=3")
    assert exact_certificate_complexity(or3, [1, -1, -1], 0) == 1
    assert exact_certificate_complexity(or3, [-1, -1, -1], 0) == 3
    parity = table("(xor x3 x7) d=10")
    rng = np.random.default_rng(0)
    for code in rng.integers(0, 1024, 20):
        x = all_instances(10)[code]
        assert exact_certificate_complexity(parity, x, 0) == 2
        assert smallest_certificate(parity, x, 0) == (3, 7)


def test_avg_certificate_complexity_examples():
    assert exact_avg_certificate_complexity(table("(or x0 x1 x2) d=3"), 0) == 1.25
    assert exact_avg_certificate_complexity(table("(xor x1 x2) d=4"), 0) == 2.0
    assert exact_avg_certificate_complexity(table("(const -1) d=5"), 0) == 0.0


@given(tables(4), st.sampled_from([0.0, 0.1, 0.25, 0.5]))
def test_certificate_complexity_matches_naive(t, eps):
    per_x = certificate_complexities(t, eps)
    for code, x in enumerate(all_instances(t.d)):
        want = naive_cert_complexity(t, x, eps)
        assert exact_certificate_complexity(t, x, eps) == want
        assert per_x[code] == want


def test_certificate_size_cutoff():
    t = table("(or x0 x1 x2) d=3")
    assert smallest_certificate(t, [-1, -1, -1], 0, max_size=2) is None


# -- decision-tree complexity --

def test_dt_complexity_examples():
    assert exact_dt_complexity(table("(const +1) d=4"), 0) == 0
    assert exact_dt_complexity(table("(xor x0 x1) d=2"), 0) == 2
    assert exact_dt_complexity(table("(or x0 x1 x2) d=3"), 0) == 3
    # OR_3 is off only at one corner: a depth-1 tree (x0 ? +1 : +1) errs on 1/8
    assert exact_dt_complexity(table("(or x0 x1 x2) d=3"), 0.125) == 0


@given(tables(4), st.sampled_from([0.0, 0.05, 0.1, 0.25]))
def test_dt_complexity_matches_naive(t, eps):
    assert exact_dt_complexity(t, eps) == naive_min_depth(t, eps)


def test_dt_complexity_cap():
    with pytest.raises(DimensionError):
        DepthSearch(TruthTable(15, np.ones(1 << 15, dtype=np.int8)))


@given(st.integers(1, 4), st.randoms(use_true_random=False))
def test_path_certificate_bound(depth, rnd):
    rng = np.random.default_rng(rnd.randint(0, 2 ** 32))
    t = table(families.random_tree(6, depth, rng))
    assert exact_dt_complexity(t, 0) <= depth
    assert np.all(certificate_complexities(t, 0) <= depth)


@given(tables(5))
def test_monotone_in_eps(t):
    grid = [0, 0.05, 0.1, 0.25]
    depths = [exact_dt_complexity(t, e) for e in grid]
    certs = np.array([certificate_complexities(t, e) for e in grid])
    assert depths == sorted(depths, reverse=True)
    assert np.all(np.diff(certs, axis=0) <= 0)


# -- greedy tree --

def test_greedy_query_examples():
    parity = table("(xor x3 x7) d=10")
    assert exact_greedy_tree_query(parity, Restriction(), 0.1) == 3
    assert exact_greedy_tree_query(parity, Restriction.of({3: 1}), 0.1) == 7
    assert exact_greedy_tree_query(table("(const +1) d=5"), Restriction(), 0.1) == 0


def test_greedy_query_needs_free_feature():
    t = table("(xor x0 x1) d=2")
    with pytest.raises(ValueError):
        exact_greedy_tree_query(t, Restriction.of({0: 1, 1: 1}), 0.1)


def test_full_depth_greedy_tree_computes_f():
    rng = np.random.default_rng(3)
    for _ in range(5):
        t = table(families.random_table(5, rng))
        tree = exact_greedy_tree(t, 0.2, 5)
        assert table(f"{tree.to_dsl()} d=5") == t
