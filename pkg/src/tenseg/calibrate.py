"""Calibration of the detector constants on simulated data.

Two sets of constants need data to pin down:

* the threshold constants ``C`` (one per norm): the threshold has the shape
  ``C * sqrt(log(T d^{1/4}))`` and ``C`` is set so that on no-change data the
  largest statistic Isolate-Detect ever sees stays below the threshold in a
  chosen share of runs;
* the penalty multiplier ``alpha``: the smallest grid value that keeps false
  detections on no-change data rare while recovering a single change.

The result is stored as JSON next to the package (``calibration.json``) and
copied into the defaults of :mod:`tenseg.ccid`.
"""

from __future__ import annotations

import json
import math
from dataclasses import replace
from pathlib import Path
from typing import Dict, Iterable, List, Sequence

import numpy as np

from .ccid import (CcidConfig, PeriodogramPanel, aggregate, build_panel, cusum_stats,
                   detect)

__all__ = [
    "CALIBRATION_FILE",
    "null_max_statistic",
    "threshold_constant",
    "alpha_scores",
    "select_alpha",
    "load_calibration",
    "save_calibration",
]

CALIBRATION_FILE = Path(__file__).with_name("calibration.json")


def null_max_statistic(panel: PeriodogramPanel, cfg: CcidConfig = CcidConfig()) -> float:
    """Largest aggregated CUSUM over the first sweep of expanding intervals.

    These are the intervals ``R_i`` and ``L_i`` grown from the whole range,
    with the same split trimming as the detector. On data without a change the
    detector stays silent exactly when this value is below the threshold.
    """
    cs = panel.cumsum()
    n = panel.length
    lam, gap = cfg.lambda_t, cfg.min_spacing
    best = 0.0
    for i in range(1, math.ceil(n / lam) + 1):
        for lo, hi in ((1, min(i * lam, n)), (max(1, n - i * lam + 1), n)):
            if hi - lo + 1 < 2 * gap:
                continue
            lo_b = max(lo + gap - 1, gap)
            hi_b = min(hi - gap, n - gap)
            if hi_b < lo_b:
                continue
            agg = aggregate(cusum_stats(cs, lo, hi), cfg.norm)[lo_b - lo:hi_b - lo + 1]
            best = max(best, float(agg.max()))
    return best


def threshold_constant(groups: Iterable[Sequence[np.ndarray]], norm: str,
                       quantile: float = 0.97, cfg: CcidConfig = CcidConfig()) -> float:
    """Largest per-group ``quantile`` of the null maximum over ``sqrt(log(T d^{1/4}))``.

    ``groups`` holds one collection of no-change series per setting (for
    instance per decomposition rank); taking the maximum over groups makes
    the constant safe for all of them.
    """
    cfg = replace(cfg, norm=norm)
    worst = 0.0
    for series in groups:
        ratios = []
        for x in series:
            panel = build_panel(x)
            scale = math.sqrt(math.log(panel.length * panel.d ** 0.25))
            ratios.append(null_max_statistic(panel, cfg) / scale)
        worst = max(worst, float(np.quantile(ratios, quantile)))
    return worst


def alpha_scores(null_groups: Iterable[Sequence[np.ndarray]], single: Sequence[np.ndarray],
                 truth: int, grid: Sequence[float], cfg: CcidConfig = CcidConfig()) -> List[Dict]:
    """False-positive and exact-recovery shares for every ``alpha`` in ``grid``.

    ``fp`` is the worst share of no-change runs with a detection over the
    groups; ``exact`` is the share of ``single`` runs with exactly one
    detection within ``truth +- 5``.
    """
    null_groups = [list(g) for g in null_groups]
    rows = []
    for a in grid:
        c = replace(cfg, ic_alpha=float(a))
        fp = max(np.mean([detect(x, c).n_cpts > 0 for x in g]) for g in null_groups)
        hits = []
        for x in single:
            cps = detect(x, c).change_points
            hits.append(len(cps) == 1 and abs(cps[0] - truth) <= 5)
        rows.append({"alpha": float(a), "fp": float(fp), "exact": float(np.mean(hits))})
    return rows


def select_alpha(rows: Sequence[Dict], fp_max: float = 0.03, exact_min: float = 0.97) -> float:
    """Smallest ``alpha`` meeting both targets; raises if none does."""
    ok = [r["alpha"] for r in rows if r["fp"] <= fp_max and r["exact"] >= exact_min]
    if not ok:
        raise RuntimeError("no alpha on the grid meets the calibration targets")
    return min(ok)


def save_calibration(result: Dict, path: Path = CALIBRATION_FILE) -> None:
    path.write_text(json.dumps(result, indent=2, sort_keys=True) + "\n")


def load_calibration(path: Path = CALIBRATION_FILE) -> Dict:
    return json.loads(Path(path).read_text())
