import math

import numpy as np
import pytest

from estimators.errors import DomainError, ShapeError
from estimators.kernels import Bandwidth, dm_normalizer, gamma_from_sigma, gaussian_kernel, kde_normalizer


@pytest.mark.parametrize("sigma, gamma", [(1.0, 0.5), (0.5, 2.0), (2.0, 0.125)])
def test_gamma_from_sigma(sigma, gamma):
    assert gamma_from_sigma(sigma) == pytest.approx(gamma, rel=1e-15)
    assert Bandwidth.from_sigma(sigma, dim=2).gamma == pytest.approx(gamma, rel=1e-15)
    assert Bandwidth(gamma=gamma, dim=2).sigma == pytest.approx(sigma, rel=1e-12)


@pytest.mark.parametrize("sigma", [0.0, -1.0, math.inf, math.nan])
def test_gamma_from_sigma_rejects_invalid(sigma):
    with pytest.raises(DomainError):
        gamma_from_sigma(sigma)


@pytest.mark.parametrize("gamma, dim", [(0.0, 2), (-0.5, 2), (math.nan, 1), (0.5, 0)])
def test_bandwidth_rejects_invalid(gamma, dim):
    with pytest.raises(DomainError):
        Bandwidth(gamma=gamma, dim=dim)


@pytest.mark.parametrize(
    "x, y, gamma, expected",
    [
        ((0.3, -1.2), (0.3, -1.2), 3.7, 1.0 / (2.0 * math.pi)),
        ((0.0, 0.0), (1.0, 0.0), 0.5, math.exp(-0.5) / (2.0 * math.pi)),
        ((0.0,), (0.0,), 1.0, 1.0 / math.sqrt(2.0 * math.pi)),
    ],
)
def test_gaussian_kernel_values(x, y, gamma, expected):
    bw = Bandwidth(gamma=gamma, dim=len(x))
    assert gaussian_kernel(x, y, bw) == pytest.approx(expected, rel=1e-12)


def test_gaussian_kernel_symmetric_and_bounded(rng):
    bw = Bandwidth(gamma=0.8, dim=3)
    peak = (2.0 * math.pi) ** -1.5
    for _ in range(50):
        x, y = rng.normal(size=3), rng.normal(size=3)
        k = gaussian_kernel(x, y, bw)
        assert k == gaussian_kernel(y, x, bw)
        assert 0.0 < k <= peak


def test_gaussian_kernel_dimension_mismatch():
    with pytest.raises(ShapeError):
        gaussian_kernel((0.0, 0.0), (0.0, 0.0, 0.0), Bandwidth(gamma=1.0, dim=2))


@pytest.mark.parametrize(
    "gamma, dim, expected",
    [(0.5, 2, 2.0 * math.pi), (math.pi, 2, 1.0), (1.0, 4, math.pi**2)],
)
def test_kde_normalizer(gamma, dim, expected):
    assert kde_normalizer(Bandwidth(gamma=gamma, dim=dim)) == pytest.approx(expected, rel=1e-12)


@pytest.mark.parametrize(
    "gamma, dim, expected",
    [(0.5, 2, math.pi), (math.pi / 2.0, 2, 1.0), (0.5, 1, math.sqrt(math.pi))],
)
def test_dm_normalizer(gamma, dim, expected):
    assert dm_normalizer(Bandwidth(gamma=gamma, dim=dim)) == pytest.approx(expected, rel=1e-12)


@pytest.mark.parametrize("gamma", [0.25, 2.0])
def test_kde_normalizer_matches_quadrature(gamma):
    # Integral of exp(-gamma ||x - u||^2) over a 2D grid centred off the origin
    bw = Bandwidth(gamma=gamma, dim=2)
    h = 0.02
    half_width = 8.0 * bw.sigma
    axis = np.arange(-half_width, half_width, h) + 0.5 * h
    u1, u2 = np.meshgrid(axis + 0.7, axis - 1.3, indexing="ij")
    integrand = np.exp(-gamma * ((u1 - 0.7) ** 2 + (u2 + 1.3) ** 2))
    integral = integrand.sum() * h * h
    assert integral == pytest.approx(kde_normalizer(bw), rel=1e-3)
