"""Model families used by the benchmarks and tests, all as DSL text."""
from __future__ import annotations

import numpy as np

from .model import table_bits


def constant(d: int, value: int = 1) -> str:
    return f"(const {'+1' if value > 0 else '-1'}) d={d}"


def dictator(d: int, i: int = 0) -> str:
    return f"x{i} d={d}"


def parity(d: int, features) -> str:
    features = list(features)
    if len(features) == 1:
        return dictator(d, features[0])
    return f"(xor {' '.join(f'x{i}' for i in features)}) d={d}"


def last_pair_parity(d: int) -> str:
    """``x_{d-1} xor x_d`` in 1-based terms: the two highest-indexed features."""
    return parity(d, [d - 2, d - 1])


def or_n(d: int, n: int | None = None) -> str:
    n = d if n is None else n
    return f"(or {' '.join(f'x{i}' for i in range(n))}) d={d}"


def and_n(d: int, n: int | None = None) -> str:
    n = d if n is None else n
    return f"(and {' '.join(f'x{i}' for i in range(n))}) d={d}"


def maj3(d: int, features=(0, 1, 2)) -> str:
    a, b, c = features
    return f"(maj x{a} x{b} x{c}) d={d}"


def random_table(d: int, rng: np.random.Generator) -> str:
    labels = 2 * rng.integers(0, 2, size=1 << d) - 1
    digits = max(1, (1 << d) // 4)
    return f"(table {table_bits(labels):0{digits}x}) d={d}"


def random_tree(d: int, depth: int, rng: np.random.Generator) -> str:
    """Complete tree of the given depth; features are distinct along each path."""

    def build(used: frozenset, level: int) -> str:
        if level == depth:
            return f"(const {'+1' if rng.integers(2) else '-1'})"
        free = [i for i in range(d) if i not in used]
        i = int(rng.choice(free))
        return f"(tree {i} {build(used | {i}, level + 1)} {build(used | {i}, level + 1)})"

    return f"{build(frozenset(), 0)} d={d}"


def standard_families(d: int, rng: np.random.Generator, tables: int = 10) -> dict[str, str]:
    """Constants, dictators, parities up to size 4, OR/AND, MAJ_3 and random tables."""
    fams = {
        "const+": constant(d, 1),
        "const-": constant(d, -1),
        "dictator": dictator(d, d - 1),
    }
    for size in range(2, min(4, d) + 1):
        fams[f"parity{size}"] = parity(d, range(d - size, d))
    fams["or"] = or_n(d)
    fams["and"] = and_n(d)
    if d >= 3:
        fams["maj3"] = maj3(d)
    for j in range(tables):
        fams[f"table{j}"] = random_table(d, rng)
    return fams
