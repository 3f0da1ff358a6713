"""
Random Fourier features for the Gaussian kernel.

By Bochner's theorem, with W rows drawn from N(0, 2 gamma I_d) and b uniform on
[0, 2 pi), phi(x) = sqrt(2 / D) cos(W x + b) satisfies
E[phi(x) . phi(y)] = exp(-gamma ||x - y||^2).

Sampling uses numpy's PCG64 bit generator; normals come from its ziggurat
method, so a (dim, D, gamma, seed) tuple always yields the same map.
"""

from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

from estimators.errors import DomainError
from estimators.points import as_point_set
from logger import get_logger

logger = get_logger("RFF")


@dataclass(frozen=True)
class RffMap:
    """A frozen random feature map."""

    W: NDArray[np.float64]
    """Frequencies, shape (D, d)."""

    b: NDArray[np.float64]
    """Phases in [0, 2 pi), shape (D,)."""

    gamma: float
    seed: int

    def __post_init__(self) -> None:
        self.W.setflags(write=False)
        self.b.setflags(write=False)

    @property
    def n_features(self) -> int:
        return self.W.shape[0]

    @property
    def dim(self) -> int:
        return self.W.shape[1]

    @property
    def scale(self) -> float:
        return float(np.sqrt(2.0 / self.n_features))


def sample_rff_map(dim: int, n_features: int, gamma: float, seed: int) -> RffMap:
    """
    Draw a feature map for the Gaussian kernel exp(-gamma ||x - y||^2).

    Args:
        dim: Data dimension d.
        n_features: Number of random features D.
        gamma: Kernel inverse-scale parameter.
        seed: Seed for a private numpy Generator.

    Returns:
        The sampled RffMap.
    """
    if dim < 1:
        raise DomainError(f"dim must be >= 1, got {dim}")
    if n_features < 1:
        raise DomainError(f"number of features must be >= 1, got {n_features}")
    if not np.isfinite(gamma) or gamma <= 0:
        raise DomainError(f"gamma must be a positive finite number, got {gamma}")

    rng = np.random.default_rng(seed)
    W = rng.standard_normal((n_features, dim)) * np.sqrt(2.0 * gamma)
    b = rng.uniform(0.0, 2.0 * np.pi, size=n_features)
    logger.debug("Sampled RFF map (d=%d, D=%d, gamma=%g, seed=%d)", dim, n_features, gamma, seed)
    return RffMap(W=W, b=b, gamma=float(gamma), seed=int(seed))


def transform(rff_map: RffMap, X: ArrayLike) -> NDArray[np.float64]:
    """
    Embed points with phi(x) = sqrt(2 / D) cos(W x + b).

    Args:
        rff_map: The feature map.
        X: A single point of shape (d,) or a batch of shape (m, d).

    Returns:
        Shape (D,) for a single point, (m, D) for a batch.
    """
    single = np.ndim(X) == 1
    points = as_point_set(X, dim=rff_map.dim, allow_empty=True)
    features = rff_map.scale * np.cos(points @ rff_map.W.T + rff_map.b)
    return features[0] if single else features
