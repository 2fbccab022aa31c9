"""Scoring of estimated change-points against the truth."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence

import numpy as np

__all__ = ["EvalRecord", "BINS", "hausdorff", "evaluate", "tabulate", "table_row", "write_table"]

BINS = ("<=-3", "-2", "-1", "0", "1", "2", ">=3")


@dataclass(frozen=True)
class EvalRecord:
    true_cps: tuple
    est_cps: tuple
    T: int
    d_h: float
    n_hat_minus_n: int
    elapsed: float = 0.0


def _sorted(points: Sequence[int], name: str) -> List[int]:
    pts = [int(p) for p in points]
    if any(b < a for a, b in zip(pts, pts[1:])):
        raise ValueError(f"{name} must be sorted")
    return pts


def hausdorff(true_cps: Sequence[int], est_cps: Sequence[int], T: int,
              empty: str = "anchor") -> float:
    """Hausdorff distance between the two sets, divided by the longest true segment.

    If exactly one set is empty it is replaced by the boundary set ``{0, T}``
    (``empty="anchor"``) or the distance is reported as NaN
    (``empty="undefined"``). Two empty sets are at distance 0.
    """
    if T < 2:
        raise ValueError("T must be >= 2")
    if empty not in ("anchor", "undefined"):
        raise ValueError(f"unknown empty-set convention {empty!r}")
    truth = _sorted(true_cps, "true change-points")
    est = _sorted(est_cps, "estimated change-points")
    n_s = max(np.diff([0, *truth, T]))
    if not truth and not est:
        return 0.0
    if not truth or not est:
        if empty == "undefined":
            return math.nan
        truth = truth or [0, T]
        est = est or [0, T]
    diff = np.abs(np.subtract.outer(np.asarray(truth), np.asarray(est)))
    return float(max(diff.min(axis=1).max(), diff.min(axis=0).max()) / n_s)


def evaluate(true_cps: Sequence[int], est_cps: Sequence[int], T: int,
             elapsed: float = 0.0) -> EvalRecord:
    return EvalRecord(
        true_cps=tuple(int(c) for c in true_cps),
        est_cps=tuple(sorted(int(c) for c in est_cps)),
        T=int(T),
        d_h=hausdorff(true_cps, sorted(est_cps), T),
        n_hat_minus_n=len(est_cps) - len(true_cps),
        elapsed=float(elapsed),
    )


def _bin(k: int) -> str:
    if k <= -3:
        return "<=-3"
    if k >= 3:
        return ">=3"
    return str(k)


def tabulate(records: Iterable[EvalRecord]) -> Dict:
    """Frequency table of ``N_hat - N`` plus mean distance and mean time.

    Bins that cannot be reached (negative bins when no record has more than
    ``|k| - 1`` true change-points) are reported as ``None``. ``mean_dh`` is
    averaged over records with at least one true change-point and is ``None``
    when there are none.
    """
    records = list(records)
    counts = {b: 0 for b in BINS}
    for r in records:
        counts[_bin(r.n_hat_minus_n)] += 1
    max_n = max((len(r.true_cps) for r in records), default=0)
    for b, k in (("-1", 1), ("-2", 2), ("<=-3", 3)):
        if max_n < k:
            counts[b] = None
    with_truth = [r.d_h for r in records if r.true_cps]
    return {
        "n": len(records),
        "bins": counts,
        "mean_dh": float(np.mean(with_truth)) if with_truth else None,
        "mean_time": float(np.mean([r.elapsed for r in records])) if records else None,
    }


def table_row(table: Dict, method: str = "TenSeg", model: str = "", c_cp="") -> List[str]:
    """One Table-2-style row: method, model, C_CP, seven bins, d_H, time."""
    cells = [method, model, str(c_cp)]
    for b in BINS:
        v = table["bins"][b]
        cells.append("-" if v is None else str(v))
    cells.append("-" if table["mean_dh"] is None else f"{table['mean_dh']:.3f}")
    cells.append("-" if table["mean_time"] is None else f"{table['mean_time']:.3f}")
    return cells


def write_table(rows: Sequence[Sequence[str]], fh: Optional[io.TextIOBase] = None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["method", "model", "C_CP", *BINS, "d_H", "time"])
    w.writerows(rows)
    text = buf.getvalue()
    if fh is not None:
        fh.write(text)
    return text
