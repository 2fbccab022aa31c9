"""Tensor time series with planted changes in their network structure.

Every time slice ``X_t`` of a ``(20, 20, 20, T)`` tensor solves the Sylvester
tensor equation

    X_t x_1 P + X_t x_2 P + X_t x_3 P = E_t,

where ``P`` is a sparse precision matrix (AR1, star-block or Erdos-Renyi)
that switches between two parameter sets A and B at the change-points, and
``E_t`` is standard normal noise (optionally AR(1) along time).

``time_term="identity"`` adds ``+ X_t`` to the left side, i.e. an identity
precision on the time mode, which makes each segment one 4-mode system with
``P_4 = I``. That extra term dominates the small eigenvalues of the spatial
operator and washes out most of the difference between A and B, so it is
off by default.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .tensor import as_tensor, mode_product

__all__ = [
    "PrecisionSpec",
    "ScenarioSpec",
    "SCENARIOS",
    "ar1_precision",
    "star_block_precision",
    "er_precision",
    "build_precision",
    "sylvester_solve",
    "kronecker_sum",
    "scenario_spec",
    "generate",
]

STRUCTURES = ("ar", "sb", "er")

# scenario name -> (T, change-points)
SCENARIOS = {
    "CP0": (200, ()),
    "CP1": (200, (100,)),
    "CP4": (300, (100, 150, 200, 250)),
    "CP10": (660, tuple(range(60, 601, 60))),
}


@dataclass(frozen=True)
class PrecisionSpec:
    """Parameters of one spatial precision matrix.

    ``kind`` is ``"ar"``, ``"sb"`` or ``"er"``. AR1 uses ``rho``; star-block
    uses ``rho`` and ``blocks``; Erdos-Renyi uses ``edges`` and the weight
    interval ``(a1, a2)``.
    """

    kind: str
    n: int = 20
    rho: float = 0.2
    blocks: int = 4
    edges: int = 20
    a1: float = 0.7
    a2: float = 0.9

    def __post_init__(self):
        if self.kind not in STRUCTURES:
            raise ValueError(f"unknown precision structure {self.kind!r}")
        if self.n < 1:
            raise ValueError("n must be positive")
        if self.kind == "ar" and not 0 <= self.rho < 1:
            raise ValueError("AR1 needs 0 <= rho < 1")
        if self.kind == "sb" and not 0 < self.rho < 1:
            raise ValueError("star-block needs 0 < rho < 1")
        if self.kind == "er" and not 0 <= self.a1 < self.a2:
            raise ValueError("Erdos-Renyi needs 0 <= a1 < a2")


@dataclass(frozen=True)
class ScenarioSpec:
    """A simulation design: length, change-points and per-segment structure.

    ``segments`` holds one :class:`PrecisionSpec` per segment
    (``len(change_points) + 1`` of them). ``noise`` is ``"iid"`` or
    ``"ar1"`` with coefficient ``alpha``. ``time_term`` is ``"none"`` (each
    slice solves the spatial system alone) or ``"identity"`` (an identity
    precision on the time mode). ``time_precision``, when given, is a
    ``T x T`` precision for the time mode that overrides ``time_term``; each
    segment uses its diagonal block.
    """

    T: int
    change_points: Tuple[int, ...]
    segments: Tuple[PrecisionSpec, ...]
    spatial: Tuple[int, ...] = (20, 20, 20)
    noise: str = "iid"
    alpha: float = 0.7
    name: str = "custom"
    time_term: str = "none"
    time_precision: Optional[np.ndarray] = field(default=None, compare=False)

    def __post_init__(self):
        cps = tuple(int(c) for c in self.change_points)
        object.__setattr__(self, "change_points", cps)
        if any(b <= a for a, b in zip(cps, cps[1:])):
            raise ValueError("change-points must be strictly increasing")
        if cps and not (0 < cps[0] and cps[-1] < self.T):
            raise ValueError("change-points must lie strictly inside (0, T)")
        if len(self.segments) != len(cps) + 1:
            raise ValueError("need one precision spec per segment")
        if self.noise not in ("iid", "ar1"):
            raise ValueError(f"unknown noise model {self.noise!r}")
        if self.noise == "ar1" and not -1 < self.alpha < 1:
            raise ValueError("AR(1) noise needs |alpha| < 1")
        if self.time_term not in ("none", "identity"):
            raise ValueError(f"unknown time term {self.time_term!r}")
        if self.time_precision is not None and np.shape(self.time_precision) != (self.T, self.T):
            raise ValueError("time precision must be T x T")
        if any(s.n != n for s in self.segments for n in self.spatial):
            raise ValueError("precision size must match every spatial extent")


def ar1_precision(n: int, rho: float) -> np.ndarray:
    """Inverse of the AR(1) correlation matrix ``(rho^|i-j|)``.

    The inverse is tridiagonal: ``1/(1-rho^2)`` times
    ``diag(1, 1+rho^2, ..., 1+rho^2, 1)`` with ``-rho`` off the diagonal.
    """
    if not 0 <= rho < 1:
        raise ValueError("AR1 precision needs 0 <= rho < 1")
    if n == 1:
        return np.ones((1, 1))
    diag = np.full(n, 1.0 + rho ** 2)
    diag[0] = diag[-1] = 1.0
    psi = np.diag(diag) - rho * (np.eye(n, k=1) + np.eye(n, k=-1))
    return psi / (1.0 - rho ** 2)


def star_block_covariance(n: int, rho: float, blocks: int) -> np.ndarray:
    if blocks < 1 or blocks > n:
        raise ValueError("number of blocks must lie in [1, n]")
    size = n // blocks
    starts = [i * size for i in range(blocks)] + [n]
    cov = np.eye(n)
    for lo, hi in zip(starts[:-1], starts[1:]):
        m = hi - lo
        blk = np.full((m, m), rho ** 2)
        blk[0, :] = blk[:, 0] = rho  # first node is the hub
        np.fill_diagonal(blk, 1.0)
        cov[lo:hi, lo:hi] = blk
    return cov


def star_block_precision(n: int, rho: float, blocks: int) -> np.ndarray:
    """Precision of a block-diagonal covariance with star-shaped blocks.

    Inside a block the first node is the hub: hub-leaf covariances are
    ``rho``, leaf-leaf covariances ``rho**2``. When ``blocks`` does not divide
    ``n`` the remainder joins the last block.
    """
    if not 0 < rho < 1:
        raise ValueError("star-block precision needs 0 < rho < 1")
    psi = np.linalg.inv(star_block_covariance(n, rho, blocks))
    psi = 0.5 * (psi + psi.T)
    _check_spd(psi)
    return psi


def er_precision(n: int, edges: int, a1: float, a2: float, rng=None) -> np.ndarray:
    """Erdos-Renyi precision: ``0.25 I`` plus ``edges`` random weighted links.

    Each sampled pair ``(i, j)`` gets ``gamma ~ U[a1, a2]``, subtracted from
    the off-diagonal pair and added to both diagonal entries, which keeps the
    matrix diagonally dominant.
    """
    if not 0 <= a1 < a2:
        raise ValueError("need 0 <= a1 < a2")
    n_pairs = n * (n - 1) // 2
    if not 0 <= edges <= n_pairs:
        raise ValueError(f"edges must lie in [0, {n_pairs}]")
    rng = np.random.default_rng(rng)
    psi = 0.25 * np.eye(n)
    if edges == 0:
        return psi
    iu, ju = np.triu_indices(n, k=1)
    chosen = rng.choice(n_pairs, size=edges, replace=False)
    gammas = rng.uniform(a1, a2, size=edges)
    for p, g in zip(chosen, gammas):
        i, j = iu[p], ju[p]
        psi[i, j] -= g
        psi[j, i] -= g
        psi[i, i] += g
        psi[j, j] += g
    return psi


def _check_spd(psi: np.ndarray) -> None:
    if not np.allclose(psi, psi.T, rtol=0, atol=1e-12 * max(1.0, np.abs(psi).max())):
        raise ValueError("precision matrix is not symmetric")
    if np.linalg.eigvalsh(psi).min() <= 0:
        raise ValueError("precision matrix is not positive definite")


def build_precision(spec: PrecisionSpec, rng=None) -> np.ndarray:
    if spec.kind == "ar":
        psi = ar1_precision(spec.n, spec.rho)
    elif spec.kind == "sb":
        psi = star_block_precision(spec.n, spec.rho, spec.blocks)
    else:
        psi = er_precision(spec.n, spec.edges, spec.a1, spec.a2, rng)
    _check_spd(psi)
    return psi


def kronecker_sum(mats: Sequence[np.ndarray]) -> np.ndarray:
    """Dense ``P_K (+) ... (+) P_1`` acting on column-major ``vec``."""
    mats = [np.asarray(a, dtype=np.float64) for a in mats]
    sizes = [a.shape[0] for a in mats]
    m = int(np.prod(sizes))
    out = np.zeros((m, m))
    for k, a in enumerate(mats):
        left = int(np.prod(sizes[k + 1:]))
        right = int(np.prod(sizes[:k]))
        out += np.kron(np.eye(left), np.kron(a, np.eye(right)))
    return out


def sylvester_solve(psis: Sequence[np.ndarray], rhs) -> np.ndarray:
    """Solve ``sum_k X x_k psis[k] = rhs`` for symmetric positive definite psis.

    Each ``psis[k]`` is diagonalized as ``Q_k L_k Q_k^T``; in the rotated
    basis the Kronecker-sum operator is diagonal with entries
    ``sum_k L_k[i_k]``.
    """
    rhs = as_tensor(rhs)
    if len(psis) != rhs.ndim:
        raise ValueError(f"need {rhs.ndim} precision matrices, got {len(psis)}")
    evals, evecs = [], []
    for k, psi in enumerate(psis):
        psi = np.asarray(psi, dtype=np.float64)
        if psi.shape != (rhs.shape[k], rhs.shape[k]):
            raise ValueError(f"precision {k} has shape {psi.shape}, mode extent is {rhs.shape[k]}")
        if np.count_nonzero(psi - np.diag(np.diag(psi))) == 0:
            lam, q = np.diag(psi).copy(), None  # already diagonal, skip the rotation
        else:
            lam, q = np.linalg.eigh(psi)
        evals.append(lam)
        evecs.append(q)
    denom = np.zeros(rhs.shape)
    for k, lam in enumerate(evals):
        shape = [1] * rhs.ndim
        shape[k] = lam.size
        denom = denom + lam.reshape(shape)
    if np.min(np.abs(denom)) <= 1e-12:
        raise ValueError("Kronecker-sum operator is numerically singular")
    z = rhs
    for k, q in enumerate(evecs):
        if q is not None:
            z = mode_product(z, q.T, k)
    z = z / denom
    for k, q in enumerate(evecs):
        if q is not None:
            z = mode_product(z, q, k)
    return z


def _alternating(specs: Tuple[PrecisionSpec, PrecisionSpec], n_seg: int):
    return tuple(specs[i % 2] for i in range(n_seg))


def scenario_spec(scenario: str = "CP4", structure: str = "ar", magnitude: str = "standard",
                  noise: str = "iid", alpha: float = 0.7, n: int = 20,
                  time_term: str = "none") -> ScenarioSpec:
    """Build one of the named designs CP0, CP1, CP4, CP10.

    Segment parameters alternate A, B, A, ... . ``magnitude="small"`` is
    defined for the AR1 structure only (rho alternating 0.4 / 0.6).
    """
    key = scenario.upper()
    if key not in SCENARIOS:
        raise ValueError(f"unknown scenario {scenario!r}; choose from {sorted(SCENARIOS)}")
    structure = structure.lower()
    if structure not in STRUCTURES:
        raise ValueError(f"unknown structure {structure!r}")
    if magnitude not in ("standard", "small"):
        raise ValueError(f"unknown magnitude profile {magnitude!r}")
    if magnitude == "small" and structure != "ar":
        raise ValueError("the small-magnitude profile is defined for the AR structure only")
    T, cps = SCENARIOS[key]

    if structure == "ar":
        rho_a, rho_b = (0.4, 0.6) if magnitude == "small" else (0.2, 0.8)
        pair = (PrecisionSpec("ar", n, rho=rho_a), PrecisionSpec("ar", n, rho=rho_b))
    elif structure == "sb":
        if key == "CP0":
            pair = (PrecisionSpec("sb", n, rho=0.2, blocks=4),) * 2
        else:
            pair = (PrecisionSpec("sb", n, rho=0.8, blocks=4), PrecisionSpec("sb", n, rho=0.2, blocks=2))
    else:
        if key in ("CP0", "CP1"):
            pair = (PrecisionSpec("er", n, edges=20, a1=0.7, a2=0.9),
                    PrecisionSpec("er", n, edges=20, a1=0.1, a2=0.2))
        else:
            pair = (PrecisionSpec("er", n, edges=20, a1=0.8, a2=0.9),
                    PrecisionSpec("er", n, edges=20, a1=0.05, a2=0.1))
    return ScenarioSpec(
        T=T,
        change_points=cps,
        segments=_alternating(pair, len(cps) + 1),
        spatial=(n, n, n),
        noise=noise,
        alpha=alpha,
        time_term=time_term,
        name=f"{key}/{structure.upper()}" + ("/small" if magnitude == "small" else ""),
    )


def _ar1_noise(innov: np.ndarray, alpha: float) -> np.ndarray:
    """Unit-variance stationary AR(1) along the last axis."""
    out = np.empty_like(innov)
    scale = np.sqrt(1.0 - alpha ** 2)
    out[..., 0] = innov[..., 0]
    for t in range(1, innov.shape[-1]):
        out[..., t] = alpha * out[..., t - 1] + scale * innov[..., t]
    return out


def generate(spec: ScenarioSpec, seed=None) -> Tuple[np.ndarray, List[int]]:
    """Draw one tensor of shape ``spec.spatial + (T,)`` and its change-points.

    Random streams are split from ``seed`` deterministically: one child
    stream builds the random precision matrices, and segment ``i`` draws its
    noise from child ``i + 1``.
    """
    root = np.random.SeedSequence(seed)
    children = root.spawn(len(spec.segments) + 1)
    struct_rng = np.random.default_rng(children[0])

    # identical segment specs share one matrix (the A / B pattern)
    cache = {}
    psis = []
    for s in spec.segments:
        if s not in cache:
            cache[s] = build_precision(s, struct_rng)
        psis.append(cache[s])

    bounds = [0, *spec.change_points, spec.T]
    innov = np.empty(tuple(spec.spatial) + (spec.T,))
    for i, (lo, hi) in enumerate(zip(bounds[:-1], bounds[1:])):
        rng = np.random.default_rng(children[i + 1])
        innov[..., lo:hi] = rng.standard_normal(tuple(spec.spatial) + (hi - lo,))
    noise = _ar1_noise(innov, spec.alpha) if spec.noise == "ar1" else innov

    out = np.empty_like(noise)
    k = len(spec.spatial)
    for i, (lo, hi) in enumerate(zip(bounds[:-1], bounds[1:])):
        if spec.time_precision is None:
            psi_time = np.eye(hi - lo) if spec.time_term == "identity" else np.zeros((hi - lo, hi - lo))
        else:
            psi_time = np.asarray(spec.time_precision)[lo:hi, lo:hi]
        out[..., lo:hi] = sylvester_solve([psis[i]] * k + [psi_time], noise[..., lo:hi])
    return out, list(spec.change_points)
