"""
Pydantic models for the benchmark run configuration and its reports.
"""

from enum import Enum
from typing import Literal

from pydantic import BaseModel, Field, field_validator

from benchmark.synthetic import DatasetName
from config import DEFAULT_ATOL, DEFAULT_LEAF_SIZE, DEFAULT_RANK_MASS, DEFAULT_RTOL, OUTPUT_DIR
from estimators.models import EstimatorKind


def power_of_two_grid(low: int, high: int) -> list[float]:
    """[2^low, ..., 2^high]."""
    return [2.0**k for k in range(low, high + 1)]


# --- Run Configuration ---


class RunConfig(BaseModel):
    """Everything a benchmark grid run depends on besides wall-clock noise."""

    datasets: list[DatasetName] = Field(..., min_length=1)
    estimators: list[EstimatorKind] = Field(..., min_length=1)
    sizes: list[int] = Field(..., min_length=1, description="Training sizes n")
    test_size: int = Field(default=1000, ge=1, description="Test points m per cell")
    folds: int = Field(default=5, ge=2)
    gamma_grid: list[float] = Field(default_factory=lambda: power_of_two_grid(-10, 10), min_length=1)
    rff_grid: list[int] = Field(default_factory=lambda: [50, 100, 500, 1000], min_length=1)
    gamma: float | None = Field(default=None, gt=0, description="Fixed gamma; skips cross-validation")
    n_features: int | None = Field(default=None, ge=1, description="Fixed D for the DMKDE kinds")
    atol: float = Field(default=DEFAULT_ATOL, ge=0)
    rtol: float = Field(default=DEFAULT_RTOL, ge=0)
    leaf_size: int = Field(default=DEFAULT_LEAF_SIZE, ge=1)
    rank: int | Literal["auto"] = "auto"
    rank_mass: float = Field(default=DEFAULT_RANK_MASS, gt=0, le=1)
    cv_max_n: int | None = Field(
        default=None, ge=2, description="Cross-validate on at most this many training points"
    )
    seed: int = Field(default=0, ge=0, description="Master seed")
    n_seeds: int = Field(default=1, ge=1, description="Independent repetitions per cell")
    repeats: int = Field(default=3, ge=3, description="Timed prediction runs per cell")
    output_dir: str = OUTPUT_DIR

    @field_validator("sizes")
    @classmethod
    def _positive_sizes(cls, sizes: list[int]) -> list[int]:
        if any(n < 1 for n in sizes):
            raise ValueError(f"training sizes must be positive, got {sizes}")
        return sizes

    @field_validator("gamma_grid")
    @classmethod
    def _positive_gammas(cls, grid: list[float]) -> list[float]:
        if any(g <= 0 for g in grid):
            raise ValueError("gamma grid values must be positive")
        return grid

    @field_validator("rff_grid")
    @classmethod
    def _positive_features(cls, grid: list[int]) -> list[int]:
        if any(d < 1 for d in grid):
            raise ValueError("random feature counts must be positive")
        return grid


# --- Cross-Validation ---


class CvCriterion(str, Enum):
    LOG_LIKELIHOOD = "log-likelihood"
    LEAST_SQUARES = "least-squares"


class CvScore(BaseModel):
    """
    Score of one grid point, higher is better.

    log-likelihood rows hold the mean held-out log-density; least-squares rows
    hold 2 * mean held-out density minus the integral of the squared density.
    """

    gamma: float
    n_features: int | None = None
    criterion: CvCriterion = CvCriterion.LOG_LIKELIHOOD
    score: float
    fold_scores: list[float]


class CvResult(BaseModel):
    best_gamma: float
    best_n_features: int | None = None
    table: list[CvScore]


# --- Timing ---


class TimingStats(BaseModel):
    times_ms: list[float] = Field(..., description="Wall-clock milliseconds of each timed run")
    median_ms: float
    std_ms: float

    @property
    def repeats(self) -> int:
        return len(self.times_ms)


# --- Reports ---


class EvalReport(BaseModel):
    """One (dataset, estimator, n_train, seed) cell. Field order is the CSV column order."""

    dataset: str
    estimator: str
    n_train: int
    n_test: int
    seed: int
    gamma: float | None = None
    n_features: int | None = None
    rank: int | None = None
    mae: float | None = Field(default=None, ge=0, description="Mean absolute error against the true density")
    mae_std: float | None = Field(default=None, ge=0, description="Standard error of the MAE over test points")
    predict_time_ms: float | None = Field(default=None, ge=0, description="Median batch prediction time")
    time_std: float | None = Field(default=None, ge=0)
    repeats: int | None = Field(default=None, ge=1)
    fit_time_ms: float | None = None
    error: str | None = None


class AggregateRow(BaseModel):
    """Plot-ready summary over seeds: one point of an MAE or time curve."""

    dataset: str
    estimator: str
    n: int
    mae_median: float | None
    time_median: float | None
