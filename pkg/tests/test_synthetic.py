import math

import numpy as np
import pytest
from scipy.stats import multivariate_normal

from benchmark.synthetic import (
    POTENTIAL_BOX,
    DatasetName,
    _rejection_chunk,
    estimate_normalizer,
    load_spec,
    make_mixture10d_spec,
    reference_normalizer,
    sample_dataset,
    true_density,
    true_density_batch,
)
from estimators.errors import DomainError, EnvelopeError, ShapeError

POTENTIALS = ["potential1", "potential2", "potential3", "potential4"]


def _grid_integral(spec, h):
    axes = [np.arange(spec.lo[j], spec.hi[j], h) + 0.5 * h for j in range(2)]
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, 2)
    return true_density_batch(spec, mesh).sum() * h * h


class TestDensities:
    def test_mixture2d_at_first_mean(self, mixture2d_spec):
        expected = 0.5 / (2 * math.pi * math.sqrt(2)) * (1.0 + math.exp(-6.75))
        assert true_density(mixture2d_spec, (1.0, -1.0)) == pytest.approx(expected, rel=1e-12)
        assert expected == pytest.approx(0.056338, abs=2e-5)

    def test_arc_at_origin(self, arc_spec):
        expected = 1.0 / (2.0 * math.sqrt(2 * math.pi)) / math.sqrt(2 * math.pi)
        assert true_density(arc_spec, (0.0, 0.0)) == pytest.approx(expected, rel=1e-12)
        assert expected == pytest.approx(0.07958, abs=1e-5)

    def test_potential2_on_its_ridge(self):
        spec = load_spec("potential2")
        assert true_density(spec, (0.0, 0.0)) == pytest.approx(1.0 / spec.normalizer, rel=1e-12)
        assert true_density(spec, (0.0, 0.0)) == pytest.approx(0.125, rel=0.05)

    def test_potentials_vanish_outside_box(self):
        for name in POTENTIALS:
            spec = load_spec(name)
            assert true_density(spec, (4.5, 0.0)) == 0.0
            assert true_density(spec, (0.0, -4.01)) == 0.0

    @pytest.mark.parametrize("name", ["arc", "mixture2d", *POTENTIALS])
    def test_densities_integrate_to_one(self, name):
        spec = load_spec(name)
        assert _grid_integral(spec, 0.02 if spec.name.is_potential else 0.05) == pytest.approx(1.0, abs=1e-2)

    @pytest.mark.parametrize("name", [d.value for d in DatasetName])
    def test_densities_nonnegative(self, name, rng):
        spec = load_spec(name)
        X = rng.uniform(spec.lo, spec.hi, size=(1000, spec.dim))
        assert np.all(true_density_batch(spec, X) >= 0.0)

    def test_dimension_mismatch(self, arc_spec):
        with pytest.raises(ShapeError):
            true_density(arc_spec, (0.0, 0.0, 0.0))


class TestNormalizers:
    @pytest.mark.parametrize(
        "name, expected, rel",
        [
            ("potential1", 6.52, 0.05),
            ("potential2", 8.0, 0.05),
            ("potential3", 13.9, 0.05),
            ("potential4", 13.9, 0.05),
        ],
    )
    def test_monte_carlo_normalizer(self, name, expected, rel):
        z, stderr = estimate_normalizer(load_spec(name), 1_000_000, seed=0)
        assert z == pytest.approx(expected, rel=rel)
        assert 0.0 < stderr < 0.01 * z

    @pytest.mark.parametrize("name", POTENTIALS)
    def test_quadrature_agrees_with_monte_carlo(self, name):
        spec = load_spec(name)
        z, stderr = estimate_normalizer(spec, 400_000, seed=1)
        assert abs(reference_normalizer(spec.name) - z) <= 5.0 * stderr
        assert spec.normalizer == reference_normalizer(spec.name)

    def test_stderr_shrinks_with_sample_count(self):
        spec = load_spec("potential1")
        _, small = estimate_normalizer(spec, 100_000, seed=2)
        _, large = estimate_normalizer(spec, 200_000, seed=3)
        assert large / small == pytest.approx(1.0 / math.sqrt(2.0), rel=0.2)

    def test_closed_form_specs_rejected(self, arc_spec):
        with pytest.raises(DomainError):
            estimate_normalizer(arc_spec, 100_000, seed=0)

    def test_too_few_draws_rejected(self):
        with pytest.raises(DomainError):
            estimate_normalizer(load_spec("potential1"), 100, seed=0)


class TestMixture10d:
    def test_parameter_ranges(self):
        for seed in range(5):
            spec = make_mixture10d_spec(seed)
            assert spec.params["means"].shape == (4, 10)
            assert np.all(np.abs(spec.params["means"]) <= 0.5)
            assert np.all((spec.params["sds"] >= 0.01) & (spec.params["sds"] <= 0.5))

    def test_same_seed_same_spec(self):
        a, b = make_mixture10d_spec(3), make_mixture10d_spec(3)
        np.testing.assert_array_equal(a.params["means"], b.params["means"])
        np.testing.assert_array_equal(a.params["sds"], b.params["sds"])
        assert not np.array_equal(a.params["means"], make_mixture10d_spec(4).params["means"])

    def test_density_is_equal_mixture_of_diagonal_gaussians(self, rng):
        spec = make_mixture10d_spec(8)
        means, sds = spec.params["means"], spec.params["sds"]
        component = rng.integers(4, size=50)
        X = means[component] + 0.5 * sds[component] * rng.standard_normal((50, 10))
        expected = sum(
            0.25 * multivariate_normal(mean=mu, cov=np.diag(sd**2)).pdf(X)
            for mu, sd in zip(means, sds)
        )
        np.testing.assert_allclose(true_density_batch(spec, X), expected, rtol=1e-10)


class TestSampling:
    def test_same_seed_same_sample(self, arc_spec):
        np.testing.assert_array_equal(sample_dataset(arc_spec, 500, 7), sample_dataset(arc_spec, 500, 7))
        assert not np.array_equal(sample_dataset(arc_spec, 500, 7), sample_dataset(arc_spec, 500, 8))

    @pytest.mark.parametrize("name", [d.value for d in DatasetName])
    def test_shape(self, name):
        spec = load_spec(name)
        X = sample_dataset(spec, 321, seed=0)
        assert X.shape == (321, spec.dim)
        assert np.all(np.isfinite(X))

    def test_mixture2d_mean(self, mixture2d_spec):
        X = sample_dataset(mixture2d_spec, 100_000, seed=11)
        np.testing.assert_allclose(X.mean(axis=0), [-0.5, 0.5], atol=0.05)

    def test_arc_second_coordinate_variance(self, arc_spec):
        X = sample_dataset(arc_spec, 100_000, seed=12)
        assert X[:, 1].var() == pytest.approx(4.0, rel=0.05)

    @pytest.mark.parametrize("name", POTENTIALS)
    def test_potential_samples_stay_in_box(self, name):
        X = sample_dataset(load_spec(name), 5000, seed=13)
        lo, hi = POTENTIAL_BOX
        assert np.all((X >= lo) & (X <= hi))

    def test_potential1_histogram_tracks_density(self):
        spec = load_spec("potential1")
        n = 100_000
        X = sample_dataset(spec, n, seed=14)
        edges = np.linspace(-4.0, 4.0, 51)
        counts, _, _ = np.histogram2d(X[:, 0], X[:, 1], bins=[edges, edges])
        width = edges[1] - edges[0]
        centers = 0.5 * (edges[:-1] + edges[1:])
        mesh = np.stack(np.meshgrid(centers, centers, indexing="ij"), axis=-1).reshape(-1, 2)
        density = true_density_batch(spec, mesh).reshape(50, 50)
        empirical = counts / (n * width * width)
        assert np.corrcoef(empirical.ravel(), density.ravel())[0, 1] > 0.95

    def test_sample_spanning_chunks_is_deterministic(self, mixture2d_spec, monkeypatch):
        import benchmark.synthetic as synthetic

        monkeypatch.setattr(synthetic, "SAMPLE_CHUNK", 100)
        X = sample_dataset(mixture2d_spec, 250, seed=5)
        np.testing.assert_array_equal(X, sample_dataset(mixture2d_spec, 250, seed=5))
        np.testing.assert_array_equal(X[:100], sample_dataset(mixture2d_spec, 100, seed=5))

    def test_envelope_violation_aborts(self):
        spec = load_spec("potential1")
        with pytest.raises(EnvelopeError):
            _rejection_chunk(spec, 10, envelope=1e-6, rng=np.random.default_rng(0))

    def test_invalid_size(self, arc_spec):
        with pytest.raises(DomainError):
            sample_dataset(arc_spec, 0, seed=0)


def test_unknown_dataset():
    with pytest.raises(DomainError):
        load_spec("nope")
