"""End-to-end runs: tensor -> factor series -> change-points -> score.

Monte Carlo replications draw their seeds from ``(master_seed, index)`` only,
so a sweep gives identical records whatever the number of workers and any
replication can be rerun on its own.
"""

from __future__ import annotations

import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from .ccid import CcidConfig, DetectionResult, detect, preaverage_detect, subsample_detect
from .decompose import AlsConfig, cp_als, hosvd, time_series_from_cp, time_series_from_hosvd
from .evaluate import EvalRecord, evaluate
from .rank_select import NormoConfig, normo_select
from .simulate import ScenarioSpec, generate
from .tensor import as_tensor

__all__ = [
    "DecompConfig",
    "normalize_slices",
    "extract_series",
    "detect_series",
    "replication_seeds",
    "run_replication",
    "run_bench",
]


@dataclass(frozen=True)
class DecompConfig:
    """How a tensor is reduced to a multivariate time series.

    ``kind`` is ``"cp"`` or ``"hosvd"``. ``rank=None`` selects the CP rank with
    NORMO up to ``r_max`` (CP only). ``rel_tol`` and ``max_iters`` are passed to
    ALS. ``normalize`` centres each time slice and scales it to unit RMS
    before decomposing.
    """

    kind: str = "cp"
    rank: Optional[int] = 20
    r_max: int = 25
    delta: float = 0.7
    rel_tol: float = 1e-6
    max_iters: int = 100
    normalize: bool = False

    def __post_init__(self):
        if self.kind not in ("cp", "hosvd"):
            raise ValueError(f"unknown decomposition {self.kind!r}")
        if self.rank is None and self.kind != "cp":
            raise ValueError("automatic rank selection is available for CP only")
        if self.rank is not None and self.rank < 1:
            raise ValueError("rank must be >= 1")
        if self.r_max < 1:
            raise ValueError("r_max must be >= 1")


def normalize_slices(x, time_mode: int = -1) -> np.ndarray:
    """Centre every time slice and scale it to unit root-mean-square.

    This removes changes in level and overall scale, so only changes in the
    shape of the dependence remain visible. Constant slices become zero.
    """
    x = np.moveaxis(as_tensor(x), time_mode, -1)
    flat = x.reshape(-1, x.shape[-1])
    flat = flat - flat.mean(axis=0)
    rms = np.sqrt(np.mean(flat ** 2, axis=0))
    flat = np.divide(flat, rms, out=np.zeros_like(flat), where=rms > 0)
    return np.moveaxis(flat.reshape(x.shape), -1, time_mode)


def extract_series(x, cfg: DecompConfig = DecompConfig(), seed: Optional[int] = 0,
                   time_mode: int = -1) -> Tuple[np.ndarray, dict]:
    """Decompose ``x`` and return the ``r x T`` factor series with details.

    The details dict holds the rank used and, for automatic selection, the
    NORMO sweep as ``(rank, max_corr, redundant)`` tuples.
    """
    x = as_tensor(x)
    if x.ndim < 2:
        raise ValueError("need a tensor with at least two modes")
    if cfg.normalize:
        x = normalize_slices(x, time_mode)
    info: dict = {"kind": cfg.kind}
    if cfg.kind == "hosvd":
        axis = time_mode % x.ndim
        ranks = [min(cfg.rank, n) for n in x.shape]
        model = hosvd(x, ranks)
        info["rank"] = ranks[axis]
        return time_series_from_hosvd(model, time_mode), info
    als = AlsConfig(rank=cfg.rank or 1, max_iters=cfg.max_iters, rel_tol=cfg.rel_tol, seed=seed)
    if cfg.rank is None:
        res = normo_select(x, NormoConfig(r_max=cfg.r_max, delta=cfg.delta, als=als),
                           keep_model=True)
        model = res.model
        info["normo"] = [(s.rank, s.max_corr, s.redundant) for s in res.steps]
    else:
        model = cp_als(x, als)
    info["rank"] = model.rank
    return time_series_from_cp(model, time_mode), info


def detect_series(series, cfg: CcidConfig = CcidConfig(), subsample: int = 1,
                  preaverage: int = 1) -> DetectionResult:
    """Run the detector, optionally on a subsampled or pre-averaged series."""
    if subsample > 1 and preaverage > 1:
        raise ValueError("choose either subsampling or pre-averaging, not both")
    if subsample > 1:
        return subsample_detect(series, cfg, step=subsample)
    if preaverage > 1:
        return preaverage_detect(series, cfg, window=preaverage)
    return detect(series, cfg)


def replication_seeds(master_seed: int, index: int) -> Tuple[int, int]:
    """``(data_seed, decomposition_seed)`` of replication ``index``."""
    state = np.random.SeedSequence([int(master_seed), int(index)]).generate_state(2)
    return int(state[0]), int(state[1])


@dataclass(frozen=True)
class _Job:
    spec: ScenarioSpec
    decomp: DecompConfig
    ccid: CcidConfig
    master_seed: int
    subsample: int = 1
    preaverage: int = 1


def run_replication(spec: ScenarioSpec, index: int, master_seed: int = 0,
                    decomp: DecompConfig = DecompConfig(), ccid: CcidConfig = CcidConfig(),
                    subsample: int = 1, preaverage: int = 1) -> EvalRecord:
    """Simulate, decompose, detect and score replication ``index``.

    ``elapsed`` covers decomposition and detection.
    """
    data_seed, als_seed = replication_seeds(master_seed, index)
    x, truth = generate(spec, data_seed)
    t0 = time.perf_counter()
    series, _ = extract_series(x, decomp, seed=als_seed)
    res = detect_series(series, ccid, subsample, preaverage)
    return evaluate(truth, res.change_points, spec.T, elapsed=time.perf_counter() - t0)


def _run_job(args) -> EvalRecord:
    job, index = args
    return run_replication(job.spec, index, job.master_seed, job.decomp, job.ccid,
                           job.subsample, job.preaverage)


def run_bench(spec: ScenarioSpec, reps: int, master_seed: int = 0,
              decomp: DecompConfig = DecompConfig(), ccid: CcidConfig = CcidConfig(),
              workers: int = 1, subsample: int = 1, preaverage: int = 1,
              start: int = 0) -> List[EvalRecord]:
    """Replications ``start, ..., start + reps - 1``, returned in index order."""
    if reps < 1:
        raise ValueError("reps must be >= 1")
    if workers < 1:
        raise ValueError("workers must be >= 1")
    job = _Job(spec, decomp, ccid, int(master_seed), subsample, preaverage)
    tasks = [(job, i) for i in range(start, start + reps)]
    if workers == 1:
        return [_run_job(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=min(workers, os.cpu_count() or 1, reps)) as pool:
        return list(pool.map(_run_job, tasks))
