"""Shared fixtures for the estimator and benchmark tests."""

import numpy as np
import pytest

from benchmark.synthetic import load_spec, sample_dataset


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def mixture2d_spec():
    return load_spec("mixture2d")


@pytest.fixture(scope="session")
def arc_spec():
    return load_spec("arc")


@pytest.fixture(scope="session")
def mixture2d_train(mixture2d_spec):
    return sample_dataset(mixture2d_spec, 1000, seed=1)


@pytest.fixture(scope="session")
def mixture2d_queries(mixture2d_spec):
    return sample_dataset(mixture2d_spec, 200, seed=2)


@pytest.fixture(scope="session")
def arc_train(arc_spec):
    return sample_dataset(arc_spec, 1000, seed=3)


@pytest.fixture(scope="session")
def arc_queries(arc_spec):
    return sample_dataset(arc_spec, 100, seed=4)
