"""
Uniform fit/predict surface over every estimator kind.
"""

import numpy as np
from numpy.typing import ArrayLike, NDArray

from estimators.density_matrix import (
    DensityMatrixModel,
    estimate_dm_batch,
    estimate_dm_lowrank_batch,
    factorize,
    fit_dmkde,
)
from estimators.exact import ExactKdeModel, estimate_exact_batch, estimate_exact_naive, fit_exact
from estimators.kernels import Bandwidth
from estimators.models import EstimatorKind, EstimatorSettings
from estimators.points import as_point_set
from estimators.rff import sample_rff_map
from estimators.tree import SpatialTree, SplitRule, build_ball_tree, build_kd_tree, estimate_tree_batch

Model = ExactKdeModel | SpatialTree | DensityMatrixModel


class FittedEstimator:
    """A fitted model together with the settings that produced it."""

    def __init__(self, settings: EstimatorSettings, model: Model, workers: int = 1) -> None:
        self.settings = settings
        self.model = model
        self.workers = workers

    @property
    def kind(self) -> EstimatorKind:
        return self.settings.kind

    @property
    def dim(self) -> int:
        return self.model.bw.dim

    @property
    def n_train(self) -> int:
        return self.model.n_train

    @property
    def rank(self) -> int | None:
        return self.model.rank if isinstance(self.model, DensityMatrixModel) else None

    def predict(self, Q: ArrayLike) -> NDArray[np.float64]:
        """Densities for a batch of queries of shape (m, d)."""
        queries = as_point_set(Q, dim=self.dim, allow_empty=True)
        kind = self.kind
        if kind is EstimatorKind.RAW:
            return estimate_exact_batch(self.model, queries, workers=self.workers)
        if kind is EstimatorKind.NAIVE:
            return estimate_exact_naive(self.model, queries)
        if kind.uses_tree:
            return estimate_tree_batch(
                self.model, queries, atol=self.settings.atol, rtol=self.settings.rtol, workers=self.workers
            )
        if kind is EstimatorKind.DMKDE:
            return estimate_dm_batch(self.model, queries)
        return estimate_dm_lowrank_batch(self.model, queries)


def fit_estimator(settings: EstimatorSettings, X: ArrayLike, workers: int = 1) -> FittedEstimator:
    """Fit the estimator described by `settings` on training points X."""
    points = as_point_set(X)
    bw = Bandwidth(gamma=settings.gamma, dim=points.shape[1])
    kind = settings.kind

    if kind in (EstimatorKind.RAW, EstimatorKind.NAIVE):
        model: Model = fit_exact(points, bw)
    elif kind is EstimatorKind.TREE:
        model = build_kd_tree(points, settings.leaf_size, bw, split_rule=SplitRule.SLIDING_MIDPOINT)
    elif kind is EstimatorKind.TREE_KD:
        model = build_kd_tree(points, settings.leaf_size, bw)
    elif kind is EstimatorKind.TREE_BALL:
        model = build_ball_tree(points, settings.leaf_size, bw)
    else:
        rff_map = sample_rff_map(bw.dim, settings.n_features, settings.gamma, settings.seed)
        model = fit_dmkde(points, rff_map, workers=workers)
        if kind is EstimatorKind.DMKDE_LR:
            model = factorize(model, settings.rank, mass=settings.rank_mass, keep_rho=False)

    return FittedEstimator(settings, model, workers=workers)
