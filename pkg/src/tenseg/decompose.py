"""CP decomposition by alternating least squares, and truncated HOSVD.

Both decompositions feed the change-point detector through their time-mode
factor: :func:`time_series_from_cp` and :func:`time_series_from_hosvd` turn a
fitted model into an ``r x T`` multivariate series.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np
import scipy.linalg

from .tensor import as_tensor, frobenius_norm, multi_mode_product, rank1_outer, unfold

__all__ = [
    "AlsConfig",
    "CPModel",
    "HOSVDModel",
    "cp_als",
    "hosvd",
    "time_series_from_cp",
    "time_series_from_hosvd",
]



@dataclass(frozen=True)
class AlsConfig:
    """Controls for :func:`cp_als`.

    ``rel_tol`` bounds the change of the relative residual
    ``||X - X_hat|| / ||X||`` between two sweeps.
    """

    rank: int
    max_iters: int = 100
    rel_tol: float = 1e-6
    seed: Optional[int] = 0
    restarts: int = 1

    def __post_init__(self):
        if self.rank < 1:
            raise ValueError("rank must be >= 1")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if not self.rel_tol > 0:
            raise ValueError("rel_tol must be positive")
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")


@dataclass
class CPModel:
    """Weights and unit-norm factor matrices of a CP decomposition.

    Attributes
    ----------
    weights : ndarray, shape (r,)
        Component weights, sorted by decreasing magnitude. Signs are carried
        here so that the largest-magnitude entry of every factor column is
        nonnegative.
    factors : list of ndarray
        One ``n_k x r`` matrix per mode with unit-norm columns.
    errors : list of float
        Residual norm ``||X - X_hat||_F`` after every ALS sweep of the
        returned restart.
    """

    weights: np.ndarray
    factors: List[np.ndarray]
    errors: List[float] = field(default_factory=list)

    @property
    def rank(self) -> int:
        return int(self.weights.shape[0])

    @property
    def shape(self) -> tuple:
        return tuple(f.shape[0] for f in self.factors)

    @property
    def n_iter(self) -> int:
        return len(self.errors)

    def full(self) -> np.ndarray:
        """Reconstruct the dense tensor ``sum_l w_l u_1l o ... o u_Kl``."""
        out = np.zeros(self.shape)
        for l in range(self.rank):
            out += self.weights[l] * rank1_outer([f[:, l] for f in self.factors])
        return out


@dataclass
class HOSVDModel:
    """Core tensor and orthonormal mode matrices of a truncated HOSVD."""

    core: np.ndarray
    factors: List[np.ndarray]

    @property
    def ranks(self) -> tuple:
        return self.core.shape

    @property
    def shape(self) -> tuple:
        return tuple(f.shape[0] for f in self.factors)

    def full(self) -> np.ndarray:
        return multi_mode_product(self.core, self.factors)


def _mttkrp(x: np.ndarray, factors: Sequence[np.ndarray], mode: int) -> np.ndarray:
    """Matricized tensor times Khatri-Rao product, without forming the KR matrix.

    The largest non-target mode is contracted first with a single GEMM so the
    intermediate stays small; the remaining modes are contracted per column.
    """
    others = [k for k in range(x.ndim) if k != mode]
    first = max(others, key=lambda k: x.shape[k])
    out = np.tensordot(x, factors[first], axes=(first, 0))  # (..., r)
    axes = [k for k in range(x.ndim) if k != first]
    for k in sorted(others, key=lambda k: -x.shape[k]):
        if k == first:
            continue
        pos = axes.index(k)
        out = np.einsum("...ir,ir->...r", np.moveaxis(out, pos, -2), factors[k])
        axes.pop(pos)
    return out  # (n_mode, r)


def _solve_spd(gram: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Solve ``A @ gram = rhs`` for A; pseudo-inverse when gram is singular."""
    try:
        c, low = scipy.linalg.cho_factor(gram, check_finite=False)
        sol = scipy.linalg.cho_solve((c, low), rhs.T, check_finite=False).T
        if np.all(np.isfinite(sol)):
            return sol
    except np.linalg.LinAlgError:
        pass
    return rhs @ np.linalg.pinv(gram, hermitian=True)


def _normalize_columns(mat: np.ndarray, fallback: np.ndarray):
    norms = np.linalg.norm(mat, axis=0)
    zero = norms <= np.finfo(float).tiny
    safe = np.where(zero, 1.0, norms)
    out = mat / safe
    if zero.any():
        # a vanished column keeps its previous direction so it stays unit-norm
        out[:, zero] = fallback[:, zero]
        norms = np.where(zero, 0.0, norms)
    return out, norms


def _fix_signs(weights: np.ndarray, factors: List[np.ndarray]):
    weights = weights.copy()
    factors = [f.copy() for f in factors]
    for f in factors:
        idx = np.argmax(np.abs(f), axis=0)
        signs = np.sign(f[idx, np.arange(f.shape[1])])
        signs[signs == 0] = 1.0
        f *= signs
        weights *= signs
    return weights, factors


def _als_single(x, cfg: AlsConfig, rng: np.random.Generator, norm_x: float):
    r = cfg.rank
    factors = []
    for n in x.shape:
        a = rng.standard_normal((n, r))
        factors.append(a / np.linalg.norm(a, axis=0))
    weights = np.ones(r)
    grams = [f.T @ f for f in factors]
    errors: List[float] = []
    if norm_x == 0.0:
        return np.zeros(r), factors, [0.0]

    prev_fit = None
    last = x.ndim - 1
    for _ in range(cfg.max_iters):
        for k in range(x.ndim):
            v = np.ones((r, r))
            for j in range(x.ndim):
                if j != k:
                    v *= grams[j]
            m = _mttkrp(x, factors, k)
            a = _solve_spd(v, m)
            factors[k], weights = _normalize_columns(a, factors[k])
            grams[k] = factors[k].T @ factors[k]
        # ||X - X_hat||^2 = ||X||^2 - 2<X, X_hat> + ||X_hat||^2, using the last mttkrp
        inner = float(np.sum(weights * np.sum(factors[last] * m, axis=0)))
        v_all = v * grams[last]
        model_sq = float(weights @ v_all @ weights)
        err = float(np.sqrt(max(norm_x ** 2 - 2.0 * inner + model_sq, 0.0)))
        errors.append(err)
        fit = err / norm_x
        if prev_fit is not None and abs(prev_fit - fit) < cfg.rel_tol:
            break
        prev_fit = fit
    return weights, factors, errors


def cp_als(x, cfg: AlsConfig) -> CPModel:
    """Fit a rank-``cfg.rank`` CP model by alternating least squares.

    Factor matrices start from seeded standard-normal draws with unit-norm
    columns. Each sweep solves one least-squares problem per mode; the fit
    stops after ``max_iters`` sweeps or once the relative residual changes by
    less than ``rel_tol``. With ``restarts > 1`` the best fit is kept.

    Parameters
    ----------
    x : array_like
        Tensor with at least two modes.
    cfg : AlsConfig

    Returns
    -------
    CPModel
        Weights sorted by decreasing magnitude, unit-norm factor columns.
    """
    x = as_tensor(x)
    if x.ndim < 2:
        raise ValueError("CP-ALS needs a tensor with at least two modes")
    if not np.all(np.isfinite(x)):
        raise ValueError("tensor contains NaN or infinite values")
    norm_x = frobenius_norm(x)
    rng = np.random.default_rng(cfg.seed)

    best = None
    for _ in range(cfg.restarts):
        weights, factors, errors = _als_single(x, cfg, rng, norm_x)
        if best is None or errors[-1] < best[2][-1]:
            best = (weights, factors, errors)
    weights, factors, errors = best
    if not (np.all(np.isfinite(weights)) and all(np.all(np.isfinite(f)) for f in factors)):
        raise FloatingPointError("CP-ALS produced non-finite factors")
    weights, factors = _fix_signs(weights, factors)
    order = np.argsort(-np.abs(weights), kind="stable")
    return CPModel(
        weights=weights[order],
        factors=[f[:, order] for f in factors],
        errors=list(errors),
    )


def _leading_left_singular(mat: np.ndarray, k: int) -> np.ndarray:
    u, _, _ = np.linalg.svd(mat, full_matrices=False)
    u = u[:, :k]
    idx = np.argmax(np.abs(u), axis=0)
    signs = np.sign(u[idx, np.arange(k)])
    signs[signs == 0] = 1.0
    return u * signs


def hosvd(x, ranks: Sequence[int]) -> HOSVDModel:
    """Truncated higher-order SVD.

    ``U_k`` holds the leading ``ranks[k]`` left singular vectors of the mode-k
    unfolding and the core is ``x x_1 U_1^T ... x_K U_K^T``.
    """
    x = as_tensor(x)
    ranks = [int(r) for r in ranks]
    if len(ranks) != x.ndim:
        raise ValueError(f"need {x.ndim} ranks, got {len(ranks)}")
    for k, (r, n) in enumerate(zip(ranks, x.shape)):
        if not 1 <= r <= n:
            raise ValueError(f"rank {r} for mode {k} must lie in [1, {n}]")
    factors = [_leading_left_singular(unfold(x, k), r) for k, r in enumerate(ranks)]
    core = multi_mode_product(x, factors, transpose=True)
    return HOSVDModel(core=core, factors=factors)


def time_series_from_cp(model: CPModel, time_mode: int = -1) -> np.ndarray:
    """``r x T`` series whose row ``l`` is ``weights[l] * U_time[:, l]``."""
    u = model.factors[time_mode]
    return (u * model.weights).T.copy()


def time_series_from_hosvd(model: HOSVDModel, time_mode: int = -1) -> np.ndarray:
    """``R_time x T`` series: time-mode singular vectors scaled by core-slice norms."""
    u = model.factors[time_mode]
    axis = time_mode % model.core.ndim
    g = np.moveaxis(model.core, axis, 0).reshape(model.core.shape[axis], -1)
    scale = np.linalg.norm(g, axis=1)
    return (u * scale).T.copy()
