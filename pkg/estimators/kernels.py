"""
Bandwidth arithmetic, the Gaussian kernel and the normalizing constants shared by every estimator.

Convention: gamma = 1 / (2 sigma^2). The exact estimator uses the unit-mass
form exp(-gamma ||x - y||^2) / (pi / gamma)^(d/2); gaussian_kernel keeps the
(2 pi)^(-d/2) prefactor of the textbook kernel.
"""

from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike

from estimators.errors import DomainError
from estimators.points import as_point


@dataclass(frozen=True)
class Bandwidth:
    """Isotropic Gaussian bandwidth: inverse-scale gamma (1/length^2) in dimension dim."""

    gamma: float
    dim: int

    def __post_init__(self) -> None:
        if not np.isfinite(self.gamma) or self.gamma <= 0:
            raise DomainError(f"gamma must be a positive finite number, got {self.gamma}")
        if self.dim < 1:
            raise DomainError(f"dim must be >= 1, got {self.dim}")

    @classmethod
    def from_sigma(cls, sigma: float, dim: int) -> "Bandwidth":
        return cls(gamma=gamma_from_sigma(sigma), dim=dim)

    @property
    def sigma(self) -> float:
        return float(np.sqrt(1.0 / (2.0 * self.gamma)))


def gamma_from_sigma(sigma: float) -> float:
    """Return 1 / (2 sigma^2)."""
    if not np.isfinite(sigma) or sigma <= 0:
        raise DomainError(f"sigma must be a positive finite number, got {sigma}")
    return 1.0 / (2.0 * sigma * sigma)


def gaussian_kernel(x: ArrayLike, y: ArrayLike, bw: Bandwidth) -> float:
    """(2 pi)^(-d/2) * exp(-gamma ||x - y||^2); symmetric and maximal at x == y."""
    xv = as_point(x, bw.dim)
    yv = as_point(y, bw.dim)
    diff = xv - yv
    sq_dist = float(np.dot(diff, diff))
    return float((2.0 * np.pi) ** (-bw.dim / 2.0) * np.exp(-bw.gamma * sq_dist))


def kde_normalizer(bw: Bandwidth) -> float:
    """(pi / gamma)^(d/2): the integral of exp(-gamma ||x - u||^2) over u."""
    return float((np.pi / bw.gamma) ** (bw.dim / 2.0))


def dm_normalizer(bw: Bandwidth) -> float:
    """(pi / (2 gamma))^(d/2): the Born-rule normalizer of a density-matrix model."""
    return float((np.pi / (2.0 * bw.gamma)) ** (bw.dim / 2.0))
