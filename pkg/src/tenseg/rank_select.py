"""NORMO rank selection for CP models.

Two components of a CP model are redundant when their factor columns are
strongly correlated in every mode on average. NORMO fits models of increasing
rank and keeps the largest rank that is still free of redundant pairs.
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass, replace
from typing import List, Optional

import numpy as np

from .decompose import AlsConfig, CPModel, cp_als

__all__ = [
    "NormoConfig",
    "NormoStep",
    "NormoResult",
    "component_correlation",
    "max_component_correlation",
    "normo_select",
    "rank_seed",
]


@dataclass(frozen=True)
class NormoConfig:
    """Settings for :func:`normo_select`.

    ``als`` is a template; its ``rank`` is replaced for every candidate and
    its ``seed`` is the base from which per-rank seeds are derived.
    """

    r_max: int
    delta: float = 0.7
    als: AlsConfig = AlsConfig(rank=1)

    def __post_init__(self):
        if self.r_max < 1:
            raise ValueError("r_max must be >= 1")
        if not 0 < self.delta < 1:
            raise ValueError("delta must lie in (0, 1)")


@dataclass(frozen=True)
class NormoStep:
    rank: int
    max_corr: float
    redundant: bool


@dataclass
class NormoResult:
    rank: int
    steps: List[NormoStep]
    model: Optional[CPModel] = None


def _abs_pearson(a: np.ndarray, b: np.ndarray) -> float:
    a = a - a.mean()
    b = b - b.mean()
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        warnings.warn("constant factor column; its correlation is taken as 0",
                      RuntimeWarning, stacklevel=3)
        return 0.0
    return float(min(abs(a @ b) / (na * nb), 1.0))


def component_correlation(model: CPModel, r1: int, r2: int) -> float:
    """Mean over modes of ``|corr(U_k[:, r1], U_k[:, r2])|``.

    A constant column has no defined correlation; it counts as 0 and a
    ``RuntimeWarning`` is issued.
    """
    if r1 == r2:
        raise ValueError("need two distinct components")
    for r in (r1, r2):
        if not 0 <= r < model.rank:
            raise ValueError(f"component {r} out of range for rank {model.rank}")
    lo, hi = min(r1, r2), max(r1, r2)  # fixed order makes the value exactly symmetric
    return float(np.mean([_abs_pearson(f[:, lo], f[:, hi]) for f in model.factors]))


def max_component_correlation(model: CPModel) -> float:
    """Largest ``component_correlation`` over all pairs; 0 for rank 1."""
    pairs = itertools.combinations(range(model.rank), 2)
    return max((component_correlation(model, a, b) for a, b in pairs), default=0.0)


def rank_seed(base: Optional[int], rank: int) -> Optional[int]:
    """Seed of the rank-``rank`` fit, derived from ``(base, rank)``."""
    if base is None:
        return None
    return int(np.random.SeedSequence([int(base), int(rank)]).generate_state(1)[0])


def normo_select(x, cfg: NormoConfig, keep_model: bool = False) -> NormoResult:
    """Ascending NORMO sweep.

    Ranks ``1, 2, ...`` are fitted in turn; the sweep stops at the first rank
    whose model has a pair with correlation above ``cfg.delta`` and returns
    the rank before it (at least 1). Without redundancy ``r_max`` is returned.
    ``steps`` records every fitted rank for auditing.
    """
    steps: List[NormoStep] = []
    chosen, chosen_model = 1, None
    for r in range(1, cfg.r_max + 1):
        model = cp_als(x, replace(cfg.als, rank=r, seed=rank_seed(cfg.als.seed, r)))
        c = max_component_correlation(model)
        redundant = c > cfg.delta
        steps.append(NormoStep(r, c, redundant))
        if redundant:
            break
        chosen, chosen_model = r, model
    return NormoResult(rank=chosen, steps=steps, model=chosen_model if keep_model else None)
