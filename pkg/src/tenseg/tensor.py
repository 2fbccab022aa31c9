"""Dense tensor algebra on plain :class:`numpy.ndarray` objects.

Tensors are ordinary float64 arrays. The vectorization convention is the
column-major one (mode 0 varies fastest), so ``vec(x)`` is
``x.ravel(order="F")`` and the Kronecker-sum identity

    (P_K (+) ... (+) P_1) vec(X) = vec(sum_k X x_k P_k)

holds without any index permutation. Modes are zero-based, like numpy axes.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

__all__ = [
    "as_tensor",
    "vec",
    "unvec",
    "unfold",
    "fold",
    "mode_product",
    "multi_mode_product",
    "frobenius_norm",
    "rank1_outer",
    "khatri_rao",
]


def as_tensor(data, copy: bool = False) -> np.ndarray:
    """Coerce ``data`` to a float64 array with at least one mode."""
    arr = np.array(data, dtype=np.float64, copy=copy) if copy else np.asarray(data, dtype=np.float64)
    if arr.ndim == 0:
        raise ValueError("a tensor needs at least one mode")
    if any(n < 1 for n in arr.shape):
        raise ValueError(f"every mode extent must be positive, got shape {arr.shape}")
    return arr


def _check_mode(ndim: int, mode: int) -> int:
    if not 0 <= mode < ndim:
        raise ValueError(f"mode {mode} out of range for a {ndim}-mode tensor")
    return mode


def vec(x) -> np.ndarray:
    """Column-major vectorization: entry ``i0 + n0*(i1 + n1*(i2 + ...))``."""
    return as_tensor(x).ravel(order="F")


def unvec(v, shape: Sequence[int]) -> np.ndarray:
    """Inverse of :func:`vec`."""
    v = np.asarray(v, dtype=np.float64)
    if v.size != int(np.prod(shape)):
        raise ValueError(f"cannot reshape {v.size} values into shape {tuple(shape)}")
    return v.reshape(tuple(shape), order="F")


def unfold(x, mode: int) -> np.ndarray:
    """Mode-``mode`` matricization.

    Returns an ``n_mode x (m / n_mode)`` matrix. Columns enumerate the
    remaining multi-index with the lowest remaining mode varying fastest.
    """
    x = as_tensor(x)
    _check_mode(x.ndim, mode)
    return np.moveaxis(x, mode, 0).reshape(x.shape[mode], -1, order="F")


def fold(mat, mode: int, shape: Sequence[int]) -> np.ndarray:
    """Inverse of :func:`unfold` for a tensor of the given ``shape``."""
    mat = np.asarray(mat, dtype=np.float64)
    shape = tuple(int(n) for n in shape)
    _check_mode(len(shape), mode)
    m = int(np.prod(shape))
    if mat.ndim != 2 or mat.shape[0] != shape[mode] or mat.shape[0] * mat.shape[1] != m:
        raise ValueError(
            f"matrix of shape {mat.shape} does not fold into mode {mode} of {shape}"
        )
    moved = (shape[mode],) + shape[:mode] + shape[mode + 1:]
    return np.moveaxis(mat.reshape(moved, order="F"), 0, mode)


def mode_product(x, mat, mode: int) -> np.ndarray:
    """Mode-``mode`` product ``x x_mode mat``.

    The result replaces extent ``n_mode`` by ``mat.shape[0]`` and satisfies
    ``unfold(result, mode) == mat @ unfold(x, mode)``.
    """
    x = as_tensor(x)
    mat = np.asarray(mat, dtype=np.float64)
    _check_mode(x.ndim, mode)
    if mat.ndim != 2 or mat.shape[1] != x.shape[mode]:
        raise ValueError(
            f"matrix with {mat.shape[-1]} columns cannot multiply mode {mode} "
            f"of extent {x.shape[mode]}"
        )
    out = np.tensordot(mat, x, axes=(1, mode))
    return np.moveaxis(out, 0, mode)


def multi_mode_product(x, mats: Sequence, modes: Sequence[int] | None = None,
                       transpose: bool = False) -> np.ndarray:
    """Apply several mode products in turn; ``None`` entries are skipped."""
    if modes is None:
        modes = range(len(mats))
    out = as_tensor(x)
    for mat, mode in zip(mats, modes):
        if mat is None:
            continue
        mat = np.asarray(mat)
        out = mode_product(out, mat.T if transpose else mat, mode)
    return out


def frobenius_norm(x) -> float:
    return float(np.linalg.norm(as_tensor(x).ravel()))


def rank1_outer(vectors: Sequence) -> np.ndarray:
    """Outer product ``v_0 o v_1 o ... o v_{K-1}``."""
    if len(vectors) == 0:
        raise ValueError("need at least one vector")
    vs = [np.asarray(v, dtype=np.float64) for v in vectors]
    if any(v.ndim != 1 or v.size == 0 for v in vs):
        raise ValueError("every factor must be a non-empty 1-D vector")
    out = vs[0]
    for v in vs[1:]:
        out = np.multiply.outer(out, v)
    return out


def khatri_rao(mats: Sequence) -> np.ndarray:
    """Column-wise Kronecker product ``mats[0] (.) mats[1] (.) ...``.

    The row index of the last matrix varies fastest.
    """
    mats = [np.asarray(a, dtype=np.float64) for a in mats]
    r = mats[0].shape[1]
    if any(a.shape[1] != r for a in mats):
        raise ValueError("all matrices need the same number of columns")
    out = mats[0]
    for a in mats[1:]:
        out = (out[:, None, :] * a[None, :, :]).reshape(-1, r)
    return out
