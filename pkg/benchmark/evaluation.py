"""
Evaluation protocol: MAE against the true density, k-fold cross-validation of
the bandwidth (and random feature count), and prediction timing.
"""

import math
import time
from typing import Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.spatial.distance import cdist

from benchmark.models import CvCriterion, CvResult, CvScore, TimingStats
from estimators.errors import DomainError, ShapeError
from estimators.kernels import Bandwidth, kde_normalizer
from estimators.models import EstimatorKind, EstimatorSettings
from estimators.points import as_point_set
from estimators.registry import FittedEstimator, fit_estimator
from logger import get_logger

logger = get_logger("Evaluation")

LOG_DENSITY_FLOOR = math.log(1e-300)

# Kernel entries materialized per held-out block during exact-KDE scoring
_BLOCK_ELEMENTS = 1 << 22

# The Born rule at gamma converges to the Gaussian kernel at this multiple of gamma
BORN_RULE_GAMMA_FACTOR = 2.0

# Uniform draws estimating the squared-density integral in least-squares CV
LSCV_DRAWS = 2048
LSCV_PAD_WIDTHS = 3.0


def mean_absolute_error(pred: ArrayLike, truth: ArrayLike) -> float:
    """(1/m) sum |pred - truth|."""
    p = np.asarray(pred, dtype=np.float64).reshape(-1)
    t = np.asarray(truth, dtype=np.float64).reshape(-1)
    if p.shape != t.shape:
        raise ShapeError(f"prediction length {p.shape[0]} != truth length {t.shape[0]}")
    if p.shape[0] == 0:
        raise DomainError("MAE of empty vectors is undefined")
    return float(np.mean(np.abs(p - t)))


def fold_indices(n: int, folds: int, seed: int) -> list[NDArray[np.intp]]:
    """Split a seeded permutation of range(n) into `folds` nearly equal parts."""
    if folds < 2:
        raise DomainError(f"folds must be >= 2, got {folds}")
    if n < folds:
        raise DomainError(f"need at least {folds} points for {folds}-fold CV, got {n}")
    perm = np.random.default_rng(seed).permutation(n)
    return np.array_split(perm, folds)


def _floored_log(density: NDArray[np.float64]) -> NDArray[np.float64]:
    return np.log(np.maximum(density, 1e-300))


def _exact_fold_scores(
    train: NDArray[np.float64], held_out: NDArray[np.float64], gammas: Sequence[float]
) -> list[float]:
    """Mean held-out log-density for every gamma, reusing one distance pass."""
    dim = train.shape[1]
    n_train = train.shape[0]
    totals = np.zeros(len(gammas))
    block = max(1, _BLOCK_ELEMENTS // n_train)
    for start in range(0, held_out.shape[0], block):
        sq_dist = cdist(held_out[start:start + block], train, metric="sqeuclidean")
        for g, gamma in enumerate(gammas):
            norm = n_train * kde_normalizer(Bandwidth(gamma=gamma, dim=dim))
            totals[g] += _floored_log(np.exp(-gamma * sq_dist).sum(axis=1) / norm).sum()
    return list(totals / held_out.shape[0])


def cross_validate(
    X: ArrayLike,
    estimator_kind: EstimatorKind,
    gamma_grid: Sequence[float],
    d_grid: Sequence[int] | None = None,
    folds: int = 5,
    seed: int = 0,
    rff_seed: int = 0,
    workers: int = 1,
) -> CvResult:
    """
    Choose gamma (and D for the DMKDE kinds) by k-fold cross-validation.

    Kernel-sum estimators (raw, naive, trees) are scored by mean held-out
    log-density of the exact estimator, which the trees reproduce within their
    tolerance.

    The Born-rule estimate carries a floor of about 1/(D*Z) away from the data,
    and held-out likelihood rewards that floor. The DMKDE kinds take gamma from
    the exact-KDE likelihood at 2*gamma, the kernel the Born rule converges to,
    then pick D by least-squares CV over the padded data box.

    Args:
        X: Training points.
        estimator_kind: Estimator whose hyperparameters are being chosen.
        gamma_grid: Candidate gammas, in the units of `estimator_kind`.
        d_grid: Candidate random feature counts (DMKDE kinds only).
        folds: Number of folds k.
        seed: Seed of the fold permutation and of the integration draws.
        rff_seed: Seed of the random feature maps.
        workers: Thread count passed to fitting.

    Returns:
        CvResult with the best configuration and the full score table.
    """
    points = as_point_set(X)
    if not gamma_grid:
        raise DomainError("gamma grid is empty")
    if estimator_kind.uses_rff and not d_grid:
        raise DomainError("random feature grid is empty")

    parts = fold_indices(points.shape[0], folds, seed)
    splits = [
        (np.concatenate([p for j, p in enumerate(parts) if j != k]), parts[k]) for k in range(folds)
    ]

    scale = BORN_RULE_GAMMA_FACTOR if estimator_kind.uses_rff else 1.0
    per_fold = [_exact_fold_scores(points[tr], points[te], [scale * g for g in gamma_grid]) for tr, te in splits]
    table: list[CvScore] = []
    for g, gamma in enumerate(gamma_grid):
        fold_scores = [scores[g] for scores in per_fold]
        table.append(CvScore(gamma=gamma, score=float(np.mean(fold_scores)), fold_scores=fold_scores))
        logger.debug("CV gamma=%g score=%.4f", gamma, table[-1].score)

    best = max(table, key=lambda row: row.score)
    if best.score <= LOG_DENSITY_FLOOR:
        logger.warning("Every CV grid point hit the log-density floor; keeping the first")

    best_n_features = None
    if estimator_kind.uses_rff:
        feature_rows = _least_squares_feature_scores(
            points, splits, best.gamma, d_grid, seed, rff_seed, workers
        )
        table.extend(feature_rows)
        best_n_features = max(feature_rows, key=lambda row: row.score).n_features

    logger.info(
        "CV (%s, n=%d, %d folds): best gamma=%g%s score=%.4f",
        estimator_kind.value,
        points.shape[0],
        folds,
        best.gamma,
        "" if best_n_features is None else f" D={best_n_features}",
        best.score,
    )
    return CvResult(best_gamma=best.gamma, best_n_features=best_n_features, table=table)


def _least_squares_feature_scores(
    points: NDArray[np.float64],
    splits: list[tuple[NDArray[np.intp], NDArray[np.intp]]],
    gamma: float,
    d_grid: Sequence[int],
    seed: int,
    rff_seed: int,
    workers: int,
) -> list[CvScore]:
    """
    Score each D by 2*mean f(held-out) minus the integral of f^2 over the padded data box.

    Both DMKDE kinds are scored with the full density matrix.
    """
    # Width of exp(-2 gamma |x - y|^2), the kernel of the Born rule
    pad = LSCV_PAD_WIDTHS / (2.0 * math.sqrt(gamma))
    lo, hi = points.min(axis=0) - pad, points.max(axis=0) + pad
    volume = float(np.prod(hi - lo))
    # One draw set for every D and fold so score differences are not draw noise
    draws = np.random.default_rng([seed, 1]).uniform(lo, hi, size=(LSCV_DRAWS, points.shape[1]))

    rows: list[CvScore] = []
    for n_features in d_grid:
        settings = EstimatorSettings(kind=EstimatorKind.DMKDE, gamma=gamma, n_features=n_features, seed=rff_seed)
        fold_scores = []
        for train_idx, test_idx in splits:
            model = fit_estimator(settings, points[train_idx], workers=workers)
            held_out = model.predict(points[test_idx])
            square_integral = volume * float(np.mean(model.predict(draws) ** 2))
            fold_scores.append(2.0 * float(held_out.mean()) - square_integral)
        rows.append(
            CvScore(
                gamma=gamma,
                n_features=n_features,
                criterion=CvCriterion.LEAST_SQUARES,
                score=float(np.mean(fold_scores)),
                fold_scores=fold_scores,
            )
        )
        logger.debug("CV gamma=%g D=%d least-squares score=%.6f", gamma, n_features, rows[-1].score)
    return rows


def benchmark_predict(
    estimator: FittedEstimator, Q: ArrayLike, repeats: int = 3
) -> tuple[TimingStats, NDArray[np.float64]]:
    """
    Time full-batch prediction: one warm-up run, then `repeats` (at least 3) timed runs.

    Returns:
        Timing statistics and the predictions of the warm-up run.

    Raises:
        DomainError: Fewer than three timed runs requested.
        RuntimeError: A timed run produced different outputs.
    """
    if repeats < 3:
        raise DomainError(f"repeats must be >= 3, got {repeats}")
    queries = as_point_set(Q, dim=estimator.dim, allow_empty=True)
    reference = estimator.predict(queries)

    times_ms: list[float] = []
    for _ in range(repeats):
        start = time.perf_counter()
        out = estimator.predict(queries)
        times_ms.append((time.perf_counter() - start) * 1000.0)
        if not np.array_equal(out, reference):
            raise RuntimeError(f"{estimator.kind.value} predictions changed between timed runs")

    stats = TimingStats(
        times_ms=times_ms,
        median_ms=float(np.median(times_ms)),
        std_ms=float(np.std(times_ms, ddof=1)),
    )
    logger.info(
        "Timed %s (n=%d, m=%d): median %.3f ms over %d runs",
        estimator.kind.value, estimator.n_train, queries.shape[0], stats.median_ms, repeats,
    )
    return stats, reference
