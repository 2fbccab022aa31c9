"""Cross-covariance isolate-detect (CCID) on a multivariate series.

The ``p x T`` input series is turned into ``d = p(p+1)/2`` nonnegative
sequences (finest-scale Haar periodograms and cross-periodograms) whose means
are piecewise constant. Changes in those means are located with the
mean-normalized CUSUM statistic inside right- and left-expanding intervals
(Isolate-Detect), aggregated over the ``d`` sequences with an l2 or l-infinity
norm. Detection stops either at a threshold ``C * sqrt(log(T d^{1/4}))`` or,
after a deliberate overestimation, by pruning candidates along a solution
path and minimizing an information criterion.

All time indices in this module are 1-based and a change-point ``b`` marks the
last index of a segment: segments are ``[s, b]`` and ``[b + 1, e]``.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

__all__ = [
    "C_LINF",
    "C_L2",
    "IC_ALPHA",
    "IC_D_POWER",
    "RHO_SUB",
    "CcidConfig",
    "PeriodogramPanel",
    "DetectionResult",
    "build_panel",
    "scaled_cusum",
    "cusum_stats",
    "aggregate",
    "threshold",
    "penalty",
    "isolate_detect",
    "solution_path",
    "information_criterion",
    "model_select",
    "refine_locations",
    "prune",
    "detect",
    "subsample_detect",
    "preaverage_detect",
]

# Threshold and penalty constants calibrated on no-change simulations; the
# procedure lives in tenseg.calibrate and demos/calibrate_constants.py.
C_LINF = 7.16
C_L2 = 2.38
IC_ALPHA = 0.35
IC_D_POWER = 0.8
RHO_SUB = 0.35


@dataclass(frozen=True)
class CcidConfig:
    """Detector settings.

    Parameters
    ----------
    lambda_t : int
        Expansion step of the right/left-expanding intervals.
    norm : {"l2", "linf"}
        Aggregation over the panel rows during Isolate-Detect.
    stop : {"ic", "threshold"}
        Stopping rule. ``"ic"`` overestimates with ``rho_sub * threshold``,
        builds the solution path and minimizes the information criterion.
    const : float, optional
        Threshold constant ``C``; defaults to :data:`C_L2` or :data:`C_LINF`.
    rho_sub : float
        Fraction of the threshold used for the overestimation pass.
    ic_alpha, ic_d_power : float
        Penalty ``ic_alpha * d**ic_d_power * log(T)**2`` per change-point.
    path_norm : {"l2", "linf"}
        Aggregation of the triplet CUSUM that orders the solution path.
    min_seg : int, optional
        Minimum distance between estimates (and from the ends); defaults to
        ``lambda_t``.
    refine : bool
        Relocate candidates and final estimates by the pseudo-likelihood
        between their neighbours (see :func:`refine_locations`).
    prune : bool
        After model selection, drop estimates one at a time while that
        lowers the information criterion (see :func:`prune`).
    """

    lambda_t: int = 3
    norm: str = "l2"
    stop: str = "ic"
    const: Optional[float] = None
    rho_sub: float = RHO_SUB
    ic_alpha: float = IC_ALPHA
    ic_d_power: float = IC_D_POWER
    path_norm: str = "l2"
    min_seg: Optional[int] = None
    refine: bool = True
    prune: bool = True

    def __post_init__(self):
        if self.lambda_t < 1:
            raise ValueError("lambda_t must be >= 1")
        for name in ("norm", "path_norm"):
            if getattr(self, name) not in ("linf", "l2"):
                raise ValueError(f"{name} must be 'l2' or 'linf', got {getattr(self, name)!r}")
        if self.stop not in ("ic", "threshold"):
            raise ValueError(f"stop must be 'ic' or 'threshold', got {self.stop!r}")
        if self.const is not None and not self.const > 0:
            raise ValueError("threshold constant must be positive")
        if not 0 < self.rho_sub < 1:
            raise ValueError("rho_sub must lie in (0, 1)")
        if not self.ic_alpha > 0:
            raise ValueError("ic_alpha must be positive")
        if self.ic_d_power < 0:
            raise ValueError("ic_d_power must be nonnegative")
        if self.min_seg is not None and self.min_seg < 1:
            raise ValueError("min_seg must be >= 1")

    @property
    def threshold_const(self) -> float:
        if self.const is not None:
            return self.const
        return C_LINF if self.norm == "linf" else C_L2

    @property
    def min_spacing(self) -> int:
        return self.lambda_t if self.min_seg is None else self.min_seg


@dataclass
class PeriodogramPanel:
    """``d x n`` nonnegative panel with the source pair of every row."""

    values: np.ndarray
    pairs: List[Tuple[int, int]]

    @property
    def d(self) -> int:
        return self.values.shape[0]

    @property
    def length(self) -> int:
        return self.values.shape[1]

    def cumsum(self) -> np.ndarray:
        cs = np.zeros((self.d, self.length + 1))
        np.cumsum(self.values, axis=1, out=cs[:, 1:])
        return cs


@dataclass
class DetectionResult:
    """Output of the detector.

    ``change_points`` are sorted. ``solution_path`` lists the candidates from
    most to least important with their ``scores`` (empty under the threshold
    rule, where ``scores`` holds the aggregated statistic at detection).
    ``ic`` holds the criterion for models of size 0, 1, ... along the path.
    ``selected`` is the path prefix chosen by the criterion (or the raw
    threshold detections); pruning and relocation turn it into
    ``change_points``.
    """

    change_points: List[int]
    selected: List[int] = field(default_factory=list)
    solution_path: List[int] = field(default_factory=list)
    scores: List[float] = field(default_factory=list)
    candidates: List[int] = field(default_factory=list)
    ic: List[float] = field(default_factory=list)
    chosen: Optional[int] = None
    threshold: float = float("nan")
    T: int = 0
    d: int = 0
    elapsed: float = 0.0

    @property
    def n_cpts(self) -> int:
        return len(self.change_points)


def build_panel(x) -> PeriodogramPanel:
    """Finest-scale Haar periodograms and cross-periodograms of a ``p x T`` series.

    With ``w_t = (x_t - x_{t+1}) / sqrt(2)``, row ``(i, i)`` is ``w_i**2`` and
    row ``(i, j)``, ``i < j``, is ``((w_i + w_j) / sqrt(2))**2``. Diagonal rows
    come first, then the cross pairs in lexicographic order. The panel has
    ``T - 1`` columns.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        x = x[None, :]
    if x.ndim != 2:
        raise ValueError("expected a p x T matrix")
    p, T = x.shape
    if T < 2:
        raise ValueError("need at least two time points")
    if not np.all(np.isfinite(x)):
        raise ValueError("series contains NaN or infinite values")
    w = (x[:, :-1] - x[:, 1:]) / math.sqrt(2.0)
    iu, ju = np.triu_indices(p, k=1)
    cross = 0.5 * (w[iu] + w[ju]) ** 2
    values = np.vstack([w ** 2, cross])
    pairs = [(i, i) for i in range(p)] + list(zip(iu.tolist(), ju.tolist()))
    return PeriodogramPanel(values=values, pairs=pairs)


def scaled_cusum(y, s: int, b: int, e: int) -> float:
    """Mean-normalized CUSUM of ``y`` at split ``b`` of ``[s, e]`` (1-based).

    Returns 0 when the segment mean vanishes.
    """
    y = np.asarray(y, dtype=np.float64)
    if not 1 <= s <= b < e <= y.size:
        raise ValueError(f"need 1 <= s <= b < e <= {y.size}, got s={s}, b={b}, e={e}")
    seg = y[s - 1:e]
    mean = seg.mean()
    if mean == 0:
        return 0.0
    left = y[s - 1:b].mean()
    right = y[b:e].mean()
    factor = math.sqrt((e - b) * (b - s + 1) / (e - s + 1))
    return factor * abs(left - right) / mean


def cusum_stats(cs: np.ndarray, s: int, e: int) -> np.ndarray:
    """Scaled CUSUM of every row for all splits ``b = s, ..., e-1``.

    ``cs`` is the row-wise prefix sum with a leading zero column. Returns a
    ``d x (e - s)`` array.
    """
    b = np.arange(s, e)
    n_left = (b - s + 1).astype(float)
    n_right = (e - b).astype(float)
    base = cs[:, s - 1:s]
    total = cs[:, e:e + 1] - base
    left = (cs[:, b] - base) / n_left
    right = (cs[:, e:e + 1] - cs[:, b]) / n_right
    mean = total / (e - s + 1)
    factor = np.sqrt(n_left * n_right / (e - s + 1))
    with np.errstate(divide="ignore", invalid="ignore"):
        out = factor * np.abs(left - right) / mean
    out[~np.isfinite(out)] = 0.0
    # all-zero segments give 0/0; rounding can leave tiny negative means
    out[np.broadcast_to(mean <= 0, out.shape)] = 0.0
    return out


def aggregate(stats, norm: str = "linf") -> np.ndarray:
    """Combine per-row statistics over axis 0 with a mean-dominant norm.

    ``"l2"`` gives ``sqrt(sum(stats**2) / d)``, ``"linf"`` the maximum.
    """
    stats = np.asarray(stats, dtype=np.float64)
    if norm == "linf":
        return stats.max(axis=0)
    if norm == "l2":
        return np.sqrt(np.mean(stats ** 2, axis=0))
    raise ValueError(f"unknown norm {norm!r}")


def threshold(T: int, d: int, C: float) -> float:
    """``C * sqrt(log(T * d**0.25))``."""
    if T < 2 or d < 1 or not C > 0:
        raise ValueError("need T >= 2, d >= 1 and C > 0")
    return C * math.sqrt(math.log(T * d ** 0.25))


def penalty(T: int, d: int, alpha: float = IC_ALPHA, power: float = IC_D_POWER) -> float:
    """Per-change-point penalty ``alpha * d**power * log(T)**2``."""
    return alpha * d ** power * math.log(T) ** 2


def _isolate_detect(cs: np.ndarray, zeta: float, cfg: CcidConfig):
    """Isolate-Detect recursion over the whole panel; returns (cpts, stats)."""
    n = cs.shape[1] - 1
    lam = cfg.lambda_t
    gap = cfg.min_spacing
    allowed = np.zeros(n + 1, dtype=bool)
    allowed[gap:n - gap + 1] = True
    found: List[Tuple[int, float]] = []

    def scan(s: int, e: int) -> Optional[Tuple[int, float, int, str]]:
        if e - s < 1:
            return None
        n_int = math.ceil((e - s + 1) / lam)
        for i in range(1, n_int + 1):
            for side in ("R", "L"):
                if side == "R":
                    lo, hi = s, min(s - 1 + i * lam, e)
                else:
                    lo, hi = max(s, e - i * lam + 1), e
                if hi - lo < 1:
                    continue
                if hi - lo + 1 < 2 * gap:
                    continue
                # splits leave at least `gap` points on either side
                ok = allowed[lo:hi].copy()
                ok[:gap - 1] = False
                ok[len(ok) - gap + 1:] = False
                if not ok.any():
                    continue
                agg = aggregate(cusum_stats(cs, lo, hi), cfg.norm)
                agg = np.where(ok, agg, -np.inf)
                j = int(np.argmax(agg))  # first maximizer: smallest b on ties
                if agg[j] > zeta:
                    return lo + j, float(agg[j]), (hi if side == "R" else lo), side
        return None

    stack = [(1, n)]
    while stack:
        s, e = stack.pop()
        hit = scan(s, e)
        if hit is None:
            continue
        b, value, edge, side = hit
        found.append((b, value))
        allowed[max(0, b - gap + 1):min(n, b + gap - 1) + 1] = False
        if side == "R":
            stack.append((edge, e))
        else:
            stack.append((s, edge))
    found.sort()
    return [b for b, _ in found], [v for _, v in found]


def _check_length(n: int, cfg: CcidConfig) -> None:
    if n < 2 * cfg.lambda_t:
        raise ValueError(
            f"series too short: panel length {n} < 2 * lambda_t = {2 * cfg.lambda_t}"
        )


def isolate_detect(panel: PeriodogramPanel, cfg: CcidConfig = CcidConfig(),
                   zeta: Optional[float] = None) -> DetectionResult:
    """Threshold-stopped Isolate-Detect on a panel.

    Intervals are visited in the order ``R_1, L_1, R_2, L_2, ...`` with
    ``R_i = [s, s - 1 + i*lambda_t]`` and ``L_i = [e - i*lambda_t + 1, e]``.
    The first interval whose aggregated CUSUM maximum exceeds ``zeta`` yields
    a change-point; the search restarts from the end of that right interval
    (or the start of that left interval).
    """
    n = panel.length
    _check_length(n, cfg)
    if zeta is None:
        zeta = threshold(n, panel.d, cfg.threshold_const)
    cpts, stats = _isolate_detect(panel.cumsum(), zeta, cfg)
    return DetectionResult(change_points=cpts, scores=stats, candidates=list(cpts),
                           threshold=zeta, T=n, d=panel.d)


def _cs_star(cs: np.ndarray, cands: Sequence[int], n: int, norm: str = "linf") -> np.ndarray:
    """Triplet CUSUM of every candidate given its neighbours, aggregated over rows."""
    r = np.asarray(cands)
    bounds = np.concatenate([[0], r, [n]])
    s = bounds[:-2] + 1
    e = bounds[2:]
    b = r
    n_left = (b - s + 1).astype(float)
    n_right = (e - b).astype(float)
    base = cs[:, s - 1]
    left = (cs[:, b] - base) / n_left
    right = (cs[:, e] - cs[:, b]) / n_right
    mean = (cs[:, e] - base) / (e - s + 1)
    factor = np.sqrt(n_left * n_right / (e - s + 1))
    with np.errstate(divide="ignore", invalid="ignore"):
        stat = factor * np.abs(left - right) / mean
    stat[~np.isfinite(stat) | (mean <= 0)] = 0.0
    return aggregate(stat, norm)


def solution_path(panel: PeriodogramPanel, candidates: Sequence[int], norm: str = "linf"):
    """Order candidates by importance through repeated weakest-removal.

    The score CS* of a candidate is its CUSUM on the segment spanned by its
    two neighbours (``0`` and ``n`` at the ends), aggregated over rows with
    ``norm`` (``"linf"``: the maximum). The lowest-scoring candidate is
    removed and the scores recomputed until none is left.

    Returns ``(path, scores)`` where ``path[0]`` is the most important
    estimate and ``scores[i]`` is the CS* value of ``path[i]`` at the moment it
    was removed.
    """
    cands = sorted(int(c) for c in candidates)
    n = panel.length
    if any(not 0 < c < n for c in cands):
        raise ValueError("candidates must lie strictly inside (0, n)")
    if len(set(cands)) != len(cands):
        raise ValueError("duplicate candidates")
    cs = panel.cumsum()
    removed, scores = [], []
    while cands:
        cs_star = _cs_star(cs, cands, n, norm)
        m = int(np.argmin(cs_star))
        removed.append(cands.pop(m))
        scores.append(float(cs_star[m]))
    return removed[::-1], scores[::-1]


def information_criterion(panel: PeriodogramPanel, cpts: Sequence[int],
                          alpha: float = IC_ALPHA, power: float = IC_D_POWER,
                          cs: Optional[np.ndarray] = None) -> float:
    """Penalized Gaussian pseudo-likelihood of a segmentation, summed over panel rows.

    The panel value at a change-point mixes both sides of it, so it is scored
    against the average of the two neighbouring segment means and left out of
    the segment means themselves. This is the model ``refine_locations``
    optimizes, so pruning and refinement agree. A row contributes
    ``n_i (log mean_i + 1)`` per segment plus ``log m + y / m`` per
    change-point, with ``m`` the midpoint mean. Zero means contribute nothing.
    """
    if cs is None:
        cs = panel.cumsum()
    n = panel.length
    b = np.sort(np.asarray(cpts, dtype=int))
    lo = np.concatenate([[0], b])
    hi = np.concatenate([b - 1, [n]])
    lens = (hi - lo).astype(float)
    means = (cs[:, hi] - cs[:, lo]) / np.maximum(lens, 1.0)
    pos = means > 0
    total = np.sum(np.where(pos, lens * (np.log(np.where(pos, means, 1.0)) + 1.0), 0.0))
    if b.size:
        mid = 0.5 * (means[:, :-1] + means[:, 1:])
        ok = mid > 0
        safe = np.where(ok, mid, 1.0)
        total += np.sum(np.where(ok, np.log(safe) + panel.values[:, b - 1] / safe, 0.0))
    return float(total) + len(cpts) * penalty(n, panel.d, alpha, power)


def model_select(panel: PeriodogramPanel, path: Sequence[int],
                 scores: Sequence[float] = (), alpha: float = IC_ALPHA,
                 power: float = IC_D_POWER) -> DetectionResult:
    """Pick the nested model ``{path[0], ..., path[j-1]}`` minimizing the criterion."""
    cs = panel.cumsum()
    ics = [information_criterion(panel, list(path[:j]), alpha, power, cs) for j in range(len(path) + 1)]
    j = int(np.argmin(ics))
    return DetectionResult(
        change_points=sorted(int(c) for c in path[:j]),
        solution_path=list(path),
        scores=list(scores),
        candidates=sorted(path),
        ic=ics,
        chosen=j,
        T=panel.length,
        d=panel.d,
    )


def refine_locations(panel: PeriodogramPanel, cpts: Sequence[int], gap: int = 3) -> List[int]:
    """Move every estimate to the pseudo-likelihood optimum between its neighbours.

    For a split ``b`` of the segment between the left neighbour ``s`` and
    the right neighbour ``e`` the cost per row is ``n_1 log(mean_1) + n_2
    log(mean_2)`` over the values strictly left and right of ``b``, plus
    ``log(m) + y_b / m`` for panel value ``b`` itself with ``m = (mean_1 +
    mean_2) / 2``. Value ``b`` is built from the series at ``b`` and ``b + 1``
    and so straddles a change located at ``b``; its expectation is the
    average of the two regimes. Scoring it, rather than dropping it, keeps the
    same values in play for every candidate. Estimates are processed left to
    right against the already moved left neighbour, and stay at least ``gap``
    apart and from the ends.
    """
    cps = sorted(int(c) for c in cpts)
    n = panel.length
    cs = panel.cumsum()
    out: List[int] = []
    for j, b in enumerate(cps):
        s = out[-1] if out else 0
        e = cps[j + 1] if j + 1 < len(cps) else n
        bs = np.arange(s + max(gap, 2), min(e, n) - gap + 1)
        if bs.size == 0:
            out.append(b)
            continue
        n1 = (bs - 1 - s).astype(float)
        n2 = (e - bs).astype(float)
        m1 = (cs[:, bs - 1] - cs[:, [s]]) / n1
        m2 = (cs[:, [e]] - cs[:, bs]) / n2
        tiny = np.finfo(float).tiny
        m1, m2 = np.maximum(m1, tiny), np.maximum(m2, tiny)
        mid = 0.5 * (m1 + m2)
        cost = (n1 * np.log(m1) + n2 * np.log(m2) + np.log(mid)
                + panel.values[:, bs - 1] / mid).sum(axis=0)
        out.append(int(bs[np.argmin(cost)]))
    return out


def prune(panel: PeriodogramPanel, cpts: Sequence[int], cfg: CcidConfig = CcidConfig(),
          cs: Optional[np.ndarray] = None) -> List[int]:
    """Backward elimination on the information criterion.

    Repeatedly removes the estimate whose removal raises the unpenalized
    criterion least, as long as that rise is below one penalty. With
    ``cfg.refine`` the estimates are relocated first and again after every
    removal.
    """
    if cs is None:
        cs = panel.cumsum()
    pen = penalty(panel.length, panel.d, cfg.ic_alpha, cfg.ic_d_power)
    est = sorted(int(c) for c in cpts)
    if cfg.refine and est:
        est = refine_locations(panel, est, cfg.min_spacing)
    while est:
        base = information_criterion(panel, est, cfg.ic_alpha, cfg.ic_d_power, cs)
        rise = [information_criterion(panel, est[:i] + est[i + 1:], cfg.ic_alpha,
                                      cfg.ic_d_power, cs) - base + pen
                for i in range(len(est))]
        i = int(np.argmin(rise))
        if rise[i] >= pen:
            break
        del est[i]
        if cfg.refine and est:
            est = refine_locations(panel, est, cfg.min_spacing)
    return est


def detect(x, cfg: CcidConfig = CcidConfig()) -> DetectionResult:
    """Full detector on a ``p x T`` series.

    With ``stop="ic"``: Isolate-Detect at ``rho_sub * threshold`` gives the
    candidates, which are relocated (``refine``), ordered into a solution
    path and cut by the information criterion; the chosen model is then
    pruned (``prune``) and relocated once more.

    Panel index ``t`` is reported as series index ``t``, i.e. a change-point
    ``b`` means the new regime starts at ``b + 1``.
    """
    t0 = time.perf_counter()
    panel = build_panel(x)
    n = panel.length
    _check_length(n, cfg)
    zeta = threshold(n, panel.d, cfg.threshold_const)
    if cfg.stop == "threshold":
        res = isolate_detect(panel, cfg, zeta)
        res.selected = list(res.change_points)
    else:
        over = isolate_detect(panel, cfg, cfg.rho_sub * zeta)
        cands = over.change_points
        if cfg.refine and cands:
            cands = sorted(set(refine_locations(panel, cands, cfg.min_spacing)))
        path, scores = solution_path(panel, cands, cfg.path_norm)
        res = model_select(panel, path, scores, cfg.ic_alpha, cfg.ic_d_power)
        res.threshold = cfg.rho_sub * zeta
        res.selected = list(res.change_points)
        if cfg.prune and res.change_points:
            res.change_points = prune(panel, res.change_points, cfg)
    if cfg.refine and res.change_points:
        res.change_points = refine_locations(panel, res.change_points, cfg.min_spacing)
    res.T = n + 1
    res.elapsed = time.perf_counter() - t0
    return res


def _vote(estimates: Sequence[Sequence[int]], radius: int, quorum: int) -> List[int]:
    """Merge estimates from several runs; keep clusters backed by >= quorum runs."""
    pooled = sorted((c, run) for run, cps in enumerate(estimates) for c in cps)
    clusters: List[List[Tuple[int, int]]] = []
    for c, run in pooled:
        if clusters and c - clusters[-1][-1][0] <= radius:
            clusters[-1].append((c, run))
        else:
            clusters.append([(c, run)])
    kept = []
    for cl in clusters:
        if len({run for _, run in cl}) >= quorum:
            kept.append(int(np.median([c for c, _ in cl])))
    return kept


def subsample_detect(x, cfg: CcidConfig = CcidConfig(), step: int = 2,
                     quorum: Optional[int] = None) -> DetectionResult:
    """Detect on ``step`` interleaved subsequences and keep majority estimates.

    Subsequence ``i`` holds time points ``i+1, i+1+step, ...``. Estimates are
    mapped back to the original axis, merged when closer than
    ``lambda_t * step`` and retained if found in at least ``quorum``
    subsequences (default: a strict majority).
    """
    t0 = time.perf_counter()
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    T = x.shape[1]
    if step < 2:
        raise ValueError("subsampling step must be >= 2")
    if quorum is None:
        quorum = step // 2 + 1
    if not 1 <= quorum <= step:
        raise ValueError(f"quorum must lie in [1, {step}]")
    if T // step < 2 * cfg.lambda_t:
        raise ValueError("series too short for this subsampling step")
    runs = []
    for i in range(step):
        res = detect(x[:, i::step], cfg)
        # last original index of the first segment, nudged to the gap midpoint
        runs.append([i + (b - 1) * step + 1 + (step - 1) // 2 for b in res.change_points])
    cpts = _vote(runs, cfg.lambda_t * step, quorum)
    return DetectionResult(change_points=cpts, candidates=sorted(c for r in runs for c in r),
                           T=T, elapsed=time.perf_counter() - t0)


def preaverage_detect(x, cfg: CcidConfig = CcidConfig(), window: int = 2) -> DetectionResult:
    """Detect on non-overlapping window means; estimates map to window midpoints.

    A trailing partial window is averaged over the points it has.
    """
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    if window < 1:
        raise ValueError("window must be >= 1")
    if window == 1:
        return detect(x, cfg)
    t0 = time.perf_counter()
    T = x.shape[1]
    n_win = math.ceil(T / window)
    if n_win < 2 * cfg.lambda_t:
        raise ValueError("series too short for this window")
    idx = np.arange(0, T, window)
    sums = np.add.reduceat(x, idx, axis=1)
    counts = np.diff(np.append(idx, T))
    res = detect(sums / counts, cfg)

    def back(points):
        return [(b - 1) * window + (window + 1) // 2 for b in points]

    res.change_points = back(res.change_points)
    res.selected = back(res.selected)
    res.solution_path = back(res.solution_path)
    res.candidates = back(res.candidates)
    res.T = T
    res.elapsed = time.perf_counter() - t0
    return res
