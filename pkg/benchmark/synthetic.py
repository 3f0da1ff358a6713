"""
Synthetic benchmark data sets with exact density oracles.

- arc: x2 ~ N(0, 4), x1 | x2 ~ N(0.25 x2^2, 1)  (second argument is a variance)
- potential1..4: densities exp(-U(x)) / Z on the box [-4, 4]^2, U an energy
- mixture2d: equal mixture of N([1, -1], diag(1, 2)) and N([-2, 2], diag(2, 1))
- mixture10d: equal mixture of four diagonal Gaussians in 10 dimensions with
  means uniform in [-0.5, 0.5] and standard deviations uniform in [0.01, 0.5]

Potentials are sampled by rejection from a uniform proposal on the box with
envelope M = 1.1 x the largest density on a 400 x 400 grid.
"""

import functools
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.special import expit, logsumexp
from scipy.stats import norm

from estimators.errors import DomainError, EnvelopeError
from estimators.points import as_point, as_point_set
from logger import get_logger

logger = get_logger("Synthetic")

POTENTIAL_BOX = (-4.0, 4.0)
ENVELOPE_GRID = 400
ENVELOPE_MARGIN = 1.1
QUADRATURE_GRID = 2000

# Rows drawn per independently seeded sampling chunk
SAMPLE_CHUNK = 65536


class DatasetName(str, Enum):
    ARC = "arc"
    POTENTIAL1 = "potential1"
    POTENTIAL2 = "potential2"
    POTENTIAL3 = "potential3"
    POTENTIAL4 = "potential4"
    MIXTURE2D = "mixture2d"
    MIXTURE10D = "mixture10d"

    @property
    def is_potential(self) -> bool:
        return self.value.startswith("potential")


@dataclass(frozen=True)
class SyntheticSpec:
    name: DatasetName
    dim: int
    lo: NDArray[np.float64]
    hi: NDArray[np.float64]
    """Support box; density is zero outside it for potentials, negligible for the rest."""
    normalizer: float
    params: dict = field(default_factory=dict)

    @property
    def volume(self) -> float:
        return float(np.prod(self.hi - self.lo))


# --- Densities ---


def _w1(x1: NDArray[np.float64]) -> NDArray[np.float64]:
    return np.sin(2.0 * np.pi * x1 / 4.0)


def potential_energy(name: DatasetName, X: NDArray[np.float64]) -> NDArray[np.float64]:
    """U(x) for the four potentials; X has shape (m, 2)."""
    x1, x2 = X[:, 0], X[:, 1]
    if name is DatasetName.POTENTIAL1:
        radius = np.hypot(x1, x2)
        ring = 0.5 * ((radius - 2.0) / 0.4) ** 2
        lobes = logsumexp([-0.5 * ((x1 - 2.0) / 0.6) ** 2, -0.5 * ((x1 + 2.0) / 0.6) ** 2], axis=0)
        return ring - lobes
    if name is DatasetName.POTENTIAL2:
        return 0.5 * ((x2 - _w1(x1)) / 0.4) ** 2
    if name is DatasetName.POTENTIAL3:
        w2 = 3.0 * np.exp(-0.5 * ((x1 - 1.0) / 0.6) ** 2)
        return -logsumexp(
            [-0.5 * ((x2 - _w1(x1)) / 0.35) ** 2, -0.5 * ((x2 - _w1(x1) + w2) / 0.35) ** 2], axis=0
        )
    if name is DatasetName.POTENTIAL4:
        w3 = 3.0 * expit(((x1 - 1.0) / 0.3) ** 2)
        return -logsumexp(
            [-0.5 * ((x2 - _w1(x1)) / 0.4) ** 2, -0.5 * ((x2 - _w1(x1) + w3) / 0.35) ** 2], axis=0
        )
    raise DomainError(f"{name.value} is not a potential")


def _diagonal_mixture_density(params: dict, X: NDArray[np.float64]) -> NDArray[np.float64]:
    means, sds, weights = params["means"], params["sds"], params["weights"]
    # (components, m) log densities of each diagonal Gaussian
    log_comp = np.stack(
        [norm.logpdf(X, loc=mu, scale=sd).sum(axis=1) for mu, sd in zip(means, sds)]
    )
    return np.exp(logsumexp(log_comp, axis=0, b=weights[:, np.newaxis]))


def _inside(spec: SyntheticSpec, X: NDArray[np.float64]) -> NDArray[np.bool_]:
    return np.all((X >= spec.lo) & (X <= spec.hi), axis=1)


def true_density_batch(spec: SyntheticSpec, X: ArrayLike) -> NDArray[np.float64]:
    """Exact density at each row of X."""
    points = as_point_set(X, dim=spec.dim, allow_empty=True)
    if spec.name is DatasetName.ARC:
        x1, x2 = points[:, 0], points[:, 1]
        return norm.pdf(x2, loc=0.0, scale=2.0) * norm.pdf(x1, loc=0.25 * x2**2, scale=1.0)
    if spec.name.is_potential:
        inside = _inside(spec, points)
        values = np.exp(-potential_energy(spec.name, points)) / spec.normalizer
        return np.where(inside, values, 0.0)
    return _diagonal_mixture_density(spec.params, points)


def true_density(spec: SyntheticSpec, x: ArrayLike) -> float:
    """Exact density at one point."""
    return float(true_density_batch(spec, as_point(x, spec.dim)[np.newaxis, :])[0])


# --- Normalizing Constants ---


@functools.lru_cache(maxsize=None)
def reference_normalizer(name: DatasetName, grid: int = QUADRATURE_GRID) -> float:
    """Midpoint-rule integral of exp(-U) over the potential box."""
    lo, hi = POTENTIAL_BOX
    h = (hi - lo) / grid
    centers = lo + (np.arange(grid) + 0.5) * h
    total = 0.0
    for x1 in np.array_split(centers, 20):
        mesh = np.stack(np.meshgrid(x1, centers, indexing="ij"), axis=-1).reshape(-1, 2)
        total += float(np.exp(-potential_energy(name, mesh)).sum())
    return total * h * h


def estimate_normalizer(spec: SyntheticSpec, n_mc: int, seed: int) -> tuple[float, float]:
    """
    Monte-Carlo estimate of Z = integral of exp(-U) over the support box.

    Returns:
        (Z, standard error) from n_mc uniform draws.
    """
    if not spec.name.is_potential:
        raise DomainError(f"{spec.name.value} has a closed-form normalizer")
    if n_mc < 10_000:
        raise DomainError(f"n_mc must be >= 10000, got {n_mc}")
    rng = np.random.default_rng(seed)
    draws = rng.uniform(spec.lo, spec.hi, size=(n_mc, spec.dim))
    values = np.exp(-potential_energy(spec.name, draws))
    z = spec.volume * float(values.mean())
    stderr = spec.volume * float(values.std(ddof=1)) / np.sqrt(n_mc)
    logger.info("Monte-Carlo normalizer for %s: %.4f +/- %.4f (n_mc=%d)", spec.name.value, z, stderr, n_mc)
    return z, stderr


# --- Specs ---


def _mixture_params(means: NDArray[np.float64], sds: NDArray[np.float64]) -> dict:
    k = means.shape[0]
    return {"means": means, "sds": sds, "weights": np.full(k, 1.0 / k)}


def make_mixture10d_spec(seed: int) -> SyntheticSpec:
    """Draw the four 10D components; the drawn parameters make the density exact."""
    rng = np.random.default_rng(seed)
    means = rng.uniform(-0.5, 0.5, size=(4, 10))
    sds = rng.uniform(0.01, 0.5, size=(4, 10))
    return SyntheticSpec(
        name=DatasetName.MIXTURE10D,
        dim=10,
        lo=np.full(10, -3.0),
        hi=np.full(10, 3.0),
        normalizer=1.0,
        params=_mixture_params(means, sds),
    )


def load_spec(name: str | DatasetName, seed: int = 0) -> SyntheticSpec:
    """Spec for any data set name; `seed` only affects mixture10d."""
    try:
        name = DatasetName(name)
    except ValueError as e:
        raise DomainError(f"unknown dataset {name!r}; expected one of {[d.value for d in DatasetName]}") from e

    if name is DatasetName.MIXTURE10D:
        return make_mixture10d_spec(seed)
    if name is DatasetName.ARC:
        return SyntheticSpec(name=name, dim=2, lo=np.array([-5.0, -10.0]), hi=np.array([30.0, 10.0]), normalizer=1.0)
    if name is DatasetName.MIXTURE2D:
        params = _mixture_params(
            means=np.array([[1.0, -1.0], [-2.0, 2.0]]),
            sds=np.sqrt(np.array([[1.0, 2.0], [2.0, 1.0]])),
        )
        return SyntheticSpec(name=name, dim=2, lo=np.full(2, -11.0), hi=np.full(2, 8.0), normalizer=1.0, params=params)

    lo, hi = POTENTIAL_BOX
    return SyntheticSpec(
        name=name, dim=2, lo=np.full(2, lo), hi=np.full(2, hi), normalizer=reference_normalizer(name)
    )


# --- Sampling ---


def _envelope(spec: SyntheticSpec) -> float:
    axes = [np.linspace(spec.lo[j], spec.hi[j], ENVELOPE_GRID) for j in range(spec.dim)]
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, spec.dim)
    return ENVELOPE_MARGIN * float(true_density_batch(spec, mesh).max())


def _rejection_chunk(spec: SyntheticSpec, n: int, envelope: float, rng: np.random.Generator) -> NDArray[np.float64]:
    accepted: list[NDArray[np.float64]] = []
    remaining = n
    # Expected acceptance rate is 1 / (envelope * volume)
    rate = 1.0 / (envelope * spec.volume)
    while remaining > 0:
        batch = int(np.ceil(1.2 * remaining / rate)) + 64
        proposals = rng.uniform(spec.lo, spec.hi, size=(batch, spec.dim))
        density = true_density_batch(spec, proposals)
        if np.any(density > envelope):
            raise EnvelopeError(
                f"{spec.name.value}: density {density.max():.4g} exceeds envelope {envelope:.4g}"
            )
        keep = proposals[rng.uniform(0.0, envelope, size=batch) < density]
        accepted.append(keep[:remaining])
        remaining -= accepted[-1].shape[0]
    return np.concatenate(accepted)


def _sample_chunk(spec: SyntheticSpec, n: int, rng: np.random.Generator, envelope: float | None) -> NDArray[np.float64]:
    if spec.name is DatasetName.ARC:
        x2 = rng.normal(0.0, 2.0, size=n)
        x1 = rng.normal(0.25 * x2**2, 1.0)
        return np.column_stack([x1, x2])
    if spec.name.is_potential:
        return _rejection_chunk(spec, n, envelope, rng)
    means, sds, weights = spec.params["means"], spec.params["sds"], spec.params["weights"]
    component = rng.choice(len(weights), size=n, p=weights)
    return means[component] + sds[component] * rng.standard_normal((n, spec.dim))


def sample_dataset(spec: SyntheticSpec, n: int, seed: int) -> NDArray[np.float64]:
    """
    Draw n i.i.d. points from the spec's density.

    Rows are produced in chunks of SAMPLE_CHUNK, chunk k seeded by (seed, k), so
    the output depends on (spec, n, seed) only.
    """
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    envelope = _envelope(spec) if spec.name.is_potential else None
    chunks = [
        _sample_chunk(spec, min(SAMPLE_CHUNK, n - start), np.random.default_rng([seed, k]), envelope)
        for k, start in enumerate(range(0, n, SAMPLE_CHUNK))
    ]
    X = np.concatenate(chunks)
    logger.debug("Sampled %d points from %s (seed=%d)", n, spec.name.value, seed)
    return X
