"""Greedy precision-gain certificates, the comparison heuristic.

Starting from the empty set, add whichever feature most lowers the (estimated
or exact) conditional error, until the error is at most epsilon.  On
``x_i xor x_j`` every single feature leaves the error at 1/2, so with a fixed
tie rule the heuristic drags in irrelevant features.
"""
from __future__ import annotations

from dataclasses import dataclass

from .estimators import EstimatorConfig, estimate_precision_error, make_rng, node_seed
from .model import BlackboxModel, Restriction, as_instance
from .oracles import TruthTable, exact_precision_error

TIE_STREAM = 0x71E


@dataclass(frozen=True)
class BaselineConfig:
    epsilon: float
    samples: int = 2000
    mode: str = "exact_oracle"  # or "monte_carlo"
    tie_break: str = "lowest"  # or "random"
    seed: int = 0

    def __post_init__(self):
        if not 0 <= self.epsilon < 1:
            raise ValueError(f"epsilon must lie in [0, 1), got {self.epsilon}")
        if self.mode not in ("exact_oracle", "monte_carlo"):
            raise ValueError(f"unknown precision mode {self.mode!r}")
        if self.tie_break not in ("lowest", "random"):
            raise ValueError(f"unknown tie rule {self.tie_break!r}")


@dataclass(frozen=True)
class BaselineCertificate:
    features: Restriction
    error: float
    queries: int

    def __len__(self):
        return len(self.features)

    def as_dict(self) -> dict:
        return {
            "features": [i for i, _ in self.features],
            "values": [v for _, v in self.features],
            "size": len(self),
            "error": self.error,
            "queries": self.queries,
        }


def greedy_precision_certificate(f: BlackboxModel, x, cfg: BaselineConfig,
                                 table: TruthTable | None = None) -> BaselineCertificate:
    x = as_instance(x, f.dimension)
    before = f.queries
    if cfg.mode == "exact_oracle" and table is None:
        table = TruthTable.from_model(f)
    tie_rng = make_rng(cfg.seed, TIE_STREAM)

    def error(C: Restriction) -> float:
        if cfg.mode == "exact_oracle":
            return exact_precision_error(table, x, C)
        # one stream per candidate set keeps estimates independent of evaluation order
        return estimate_precision_error(f, x, C, EstimatorConfig(cfg.samples, node_seed(cfg.seed, C)))

    C = Restriction()
    err = error(C)
    while err > cfg.epsilon and len(C) < f.dimension:
        used = set(C.features)
        candidates = {i: error(C.extend(i, int(x[i]))) for i in range(f.dimension) if i not in used}
        best = min(candidates.values())
        tied = sorted(i for i, e in candidates.items() if e == best)
        i = tied[0] if cfg.tie_break == "lowest" else int(tie_rng.choice(tied))
        C = C.extend(i, int(x[i]))
        err = candidates[i]
    return BaselineCertificate(C, err, f.queries - before)
