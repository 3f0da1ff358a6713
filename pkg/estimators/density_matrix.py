"""
Density-matrix kernel density estimation (DMKDE).

Training embeds every sample with a random Fourier feature map and averages the
pure states: rho = (1/n) sum_i phi(x_i) phi(x_i)^T. Prediction applies the Born
rule, f(x) = phi(x)^T rho phi(x) / Z with Z = (pi / (2 gamma))^(d/2), at a cost
that depends on D only.

The low-rank predictor (DMKDE-LR) keeps the top-r eigenpairs rho ~ V^T diag(lambda) V
and evaluates ||diag(lambda)^(1/2) V phi(x)||^2 / Z in O(D r).
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Literal, Sequence

import numpy as np
import scipy.linalg
from numpy.typing import ArrayLike, NDArray

from config import CHUNK_SIZE, DEFAULT_RANK_MASS
from estimators.errors import DomainError, ShapeError, StateError
from estimators.kernels import Bandwidth, dm_normalizer
from estimators.points import as_point, as_point_set
from estimators.rff import RffMap, transform
from logger import get_logger

logger = get_logger("DMKDE")


@dataclass(frozen=True)
class DensityMatrixModel:
    rff_map: RffMap
    bw: Bandwidth
    n_train: int
    rho: NDArray[np.float64] | None = None
    eigvecs: NDArray[np.float64] | None = None
    """V, shape (r, D); rows are orthonormal eigenvectors."""
    eigvals: NDArray[np.float64] | None = None
    """lambda, shape (r,), non-negative and sorted descending."""

    @property
    def n_features(self) -> int:
        return self.rff_map.n_features

    @property
    def rank(self) -> int | None:
        return None if self.eigvals is None else int(self.eigvals.shape[0])

    @property
    def normalizer(self) -> float:
        return dm_normalizer(self.bw)


def fit_dmkde(
    X: ArrayLike,
    rff_map: RffMap,
    chunk_size: int = CHUNK_SIZE,
    workers: int = 1,
) -> DensityMatrixModel:
    """
    Accumulate rho over the data in one streaming pass.

    Each chunk of rows contributes Z^T Z for its (chunk, D) feature block; the
    full (n, D) feature matrix is never held in memory. Chunks are fixed by
    chunk_size and summed in order, so threads do not change the result.
    """
    bw = Bandwidth(gamma=rff_map.gamma, dim=rff_map.dim)
    points = as_point_set(X, dim=rff_map.dim)
    n = points.shape[0]
    if chunk_size < 1:
        raise DomainError(f"chunk_size must be >= 1, got {chunk_size}")

    def partial(start: int) -> NDArray[np.float64]:
        Z = transform(rff_map, points[start:start + chunk_size])
        return Z.T @ Z

    starts = range(0, n, chunk_size)
    if workers > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            partials = list(pool.map(partial, starts))
    else:
        partials = [partial(start) for start in starts]

    acc = partials[0]
    for block in partials[1:]:
        acc += block
    rho = acc / n
    rho = 0.5 * (rho + rho.T)

    logger.info(
        "Fitted DMKDE (n=%d, d=%d, D=%d, gamma=%g, trace=%.4f)",
        n, bw.dim, rff_map.n_features, bw.gamma, float(np.trace(rho)),
    )
    return DensityMatrixModel(rff_map=rff_map, bw=bw, n_train=n, rho=rho)


def merge_density_models(models: Sequence[DensityMatrixModel]) -> DensityMatrixModel:
    """Mixed state of several fits sharing one feature map: rho = sum_i (n_i / n) rho_i."""
    if not models:
        raise DomainError("nothing to merge")
    first = models[0]
    for other in models[1:]:
        if not (
            np.array_equal(other.rff_map.W, first.rff_map.W)
            and np.array_equal(other.rff_map.b, first.rff_map.b)
        ):
            raise ShapeError("density matrices built on different feature maps cannot be merged")
        if other.rho is None:
            raise StateError("merge needs the full density matrix of every model")
    if first.rho is None:
        raise StateError("merge needs the full density matrix of every model")

    n = sum(m.n_train for m in models)
    rho = sum((m.n_train / n) * m.rho for m in models)
    return DensityMatrixModel(rff_map=first.rff_map, bw=first.bw, n_train=n, rho=rho)


def _require_rho(model: DensityMatrixModel) -> NDArray[np.float64]:
    if model.rho is None:
        raise StateError("model holds no full density matrix")
    return model.rho


def estimate_dm(model: DensityMatrixModel, x: ArrayLike) -> float:
    """Born rule phi(x)^T rho phi(x) / Z at one point."""
    rho = _require_rho(model)
    phi = transform(model.rff_map, as_point(x, model.bw.dim))
    value = float(phi @ rho @ phi) / model.normalizer
    return max(value, 0.0)


def estimate_dm_batch(model: DensityMatrixModel, Q: ArrayLike) -> NDArray[np.float64]:
    rho = _require_rho(model)
    phi = transform(model.rff_map, as_point_set(Q, dim=model.bw.dim, allow_empty=True))
    values = np.einsum("ij,ij->i", phi @ rho, phi) / model.normalizer
    return np.maximum(values, 0.0)


def select_rank(eigvals: NDArray[np.float64], mass: float = DEFAULT_RANK_MASS) -> int:
    """Smallest r whose leading eigenvalues hold at least `mass` of the trace."""
    if not 0.0 < mass <= 1.0:
        raise DomainError(f"rank mass must lie in (0, 1], got {mass}")
    cumulative = np.cumsum(eigvals)
    r = int(np.searchsorted(cumulative, mass * eigvals.sum(), side="left")) + 1
    return min(max(r, 1), eigvals.shape[0])


def factorize(
    model: DensityMatrixModel,
    rank: int | Literal["auto"] = "auto",
    mass: float = DEFAULT_RANK_MASS,
    keep_rho: bool = True,
) -> DensityMatrixModel:
    """
    Spectral factorization rho ~ V^T diag(lambda) V keeping the top-r eigenpairs.

    Args:
        model: A fitted model holding rho.
        rank: Number of eigenpairs to keep, or "auto" for the trace-mass rule.
        mass: Trace fraction used by the "auto" rule.
        keep_rho: Retain the full matrix alongside the factors.
    """
    rho = _require_rho(model)
    D = rho.shape[0]
    if rank != "auto" and not (isinstance(rank, (int, np.integer)) and 1 <= rank <= D):
        raise DomainError(f"rank must be 'auto' or an integer in [1, {D}], got {rank!r}")

    # LAPACK syevd: Householder tridiagonalization + divide and conquer
    w, v = scipy.linalg.eigh(rho)
    w = w[::-1]
    V = v[:, ::-1].T

    if w[-1] < -1e-10:
        logger.warning("Clamping eigenvalues down to %.3e to zero", w[-1])
    w = np.maximum(w, 0.0)

    r = select_rank(w, mass) if rank == "auto" else int(rank)
    logger.info("Factorized density matrix (D=%d, r=%d, captured mass=%.6f)", D, r, w[:r].sum() / max(w.sum(), 1e-300))
    return replace(
        model,
        rho=rho if keep_rho else None,
        eigvecs=np.ascontiguousarray(V[:r]),
        eigvals=np.ascontiguousarray(w[:r]),
    )


def _require_factors(model: DensityMatrixModel) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    if model.eigvecs is None or model.eigvals is None:
        raise StateError("model has not been factorized")
    return model.eigvecs, model.eigvals


def estimate_dm_lowrank(model: DensityMatrixModel, x: ArrayLike) -> float:
    """||diag(lambda)^(1/2) V phi(x)||^2 / Z at one point."""
    V, lam = _require_factors(model)
    projected = V @ transform(model.rff_map, as_point(x, model.bw.dim))
    return float(np.dot(lam, projected * projected)) / model.normalizer


def estimate_dm_lowrank_batch(model: DensityMatrixModel, Q: ArrayLike) -> NDArray[np.float64]:
    V, lam = _require_factors(model)
    phi = transform(model.rff_map, as_point_set(Q, dim=model.bw.dim, allow_empty=True))
    projected = phi @ V.T
    return (projected * projected) @ lam / model.normalizer
