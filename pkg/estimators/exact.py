"""
Memory-based exact KDE: direct summation of

    f(x) = 1 / (n (pi / gamma)^(d/2)) * sum_i exp(-gamma ||x - x_i||^2)

Two execution strategies share the same semantics: a blocked vectorized pass
(the `raw` estimator) and a per-query loop (the `naive` estimator).
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.spatial.distance import cdist

from estimators.kernels import Bandwidth, kde_normalizer
from estimators.points import as_point, as_point_set
from logger import get_logger

logger = get_logger("Exact")

# Upper bound on the number of kernel entries materialized per block
_BLOCK_ELEMENTS = 1 << 22


@dataclass(frozen=True)
class ExactKdeModel:
    """Training points plus bandwidth; immutable after fit."""

    train: NDArray[np.float64]
    bw: Bandwidth

    @property
    def n_train(self) -> int:
        return self.train.shape[0]


def fit_exact(X: ArrayLike, bw: Bandwidth) -> ExactKdeModel:
    """Store a validated copy of the training points."""
    train = as_point_set(X, dim=bw.dim).copy()
    train.setflags(write=False)
    logger.info("Fitted exact KDE (n=%d, d=%d, gamma=%g)", train.shape[0], bw.dim, bw.gamma)
    return ExactKdeModel(train=train, bw=bw)


def _kernel_sums(train: NDArray[np.float64], queries: NDArray[np.float64], gamma: float) -> NDArray[np.float64]:
    """Row sums of exp(-gamma ||q - x_i||^2); numpy reduces each row pairwise."""
    sq_dist = cdist(queries, train, metric="sqeuclidean")
    return np.exp(-gamma * sq_dist).sum(axis=1)


def estimate_exact(model: ExactKdeModel, x: ArrayLike) -> float:
    """Density at a single query point."""
    query = as_point(x, model.bw.dim)[np.newaxis, :]
    total = _kernel_sums(model.train, query, model.bw.gamma)[0]
    return float(total / (model.n_train * kde_normalizer(model.bw)))


def estimate_exact_batch(model: ExactKdeModel, Q: ArrayLike, workers: int = 1) -> NDArray[np.float64]:
    """
    Densities for a batch of queries, evaluated in blocks.

    Args:
        model: Fitted exact model.
        Q: Queries of shape (m, d); m may be zero.
        workers: Threads used to evaluate query blocks. Blocks are fixed by m and n,
            so the result does not depend on this value.

    Returns:
        Vector of m densities.
    """
    queries = as_point_set(Q, dim=model.bw.dim, allow_empty=True)
    m = queries.shape[0]
    if m == 0:
        return np.zeros(0)

    block = max(1, _BLOCK_ELEMENTS // model.n_train)
    starts = range(0, m, block)

    def run(start: int) -> NDArray[np.float64]:
        return _kernel_sums(model.train, queries[start:start + block], model.bw.gamma)

    if workers > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            sums = list(pool.map(run, starts))
    else:
        sums = [run(start) for start in starts]

    return np.concatenate(sums) / (model.n_train * kde_normalizer(model.bw))


def estimate_exact_naive(model: ExactKdeModel, Q: ArrayLike) -> NDArray[np.float64]:
    """Per-query loop over the same sum; the slow reference strategy."""
    queries = as_point_set(Q, dim=model.bw.dim, allow_empty=True)
    out = np.empty(queries.shape[0])
    for i, query in enumerate(queries):
        diff = model.train - query
        out[i] = np.exp(-model.bw.gamma * np.einsum("ij,ij->i", diff, diff)).sum()
    return out / (model.n_train * kde_normalizer(model.bw))
