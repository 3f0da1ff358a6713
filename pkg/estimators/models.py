"""
Pydantic models for estimator settings and the persisted model file.
"""

from enum import Enum
from typing import Literal

from pydantic import BaseModel, Field, model_validator

from config import DEFAULT_ATOL, DEFAULT_LEAF_SIZE, DEFAULT_RANK_MASS, DEFAULT_RTOL

MODEL_FORMAT_VERSION = 1


class EstimatorKind(str, Enum):
    RAW = "raw"
    NAIVE = "naive"
    TREE = "tree"
    TREE_KD = "tree-kd"
    TREE_BALL = "tree-ball"
    DMKDE = "dmkde"
    DMKDE_LR = "dmkde-lr"

    @property
    def uses_rff(self) -> bool:
        return self in (EstimatorKind.DMKDE, EstimatorKind.DMKDE_LR)

    @property
    def uses_tree(self) -> bool:
        return self in (EstimatorKind.TREE, EstimatorKind.TREE_KD, EstimatorKind.TREE_BALL)


# --- Estimator Settings ---


class EstimatorSettings(BaseModel):
    """Hyperparameters of one estimator configuration."""

    kind: EstimatorKind
    gamma: float = Field(..., gt=0, description="Kernel inverse-scale parameter 1/(2 sigma^2)")
    n_features: int = Field(default=1000, ge=1, description="Random Fourier feature count D")
    rank: int | Literal["auto"] = Field(default="auto", description="Low-rank r, or 'auto' for the trace-mass rule")
    rank_mass: float = Field(default=DEFAULT_RANK_MASS, gt=0, le=1)
    atol: float = Field(default=DEFAULT_ATOL, ge=0)
    rtol: float = Field(default=DEFAULT_RTOL, ge=0)
    leaf_size: int = Field(default=DEFAULT_LEAF_SIZE, ge=1)
    seed: int = Field(default=0, description="Seed of the random feature map")


# --- Model File ---


class RffRecord(BaseModel):
    """Frozen random feature map."""

    gamma: float
    seed: int
    W: list[list[float]] = Field(..., description="Frequencies, D rows of d entries")
    b: list[float] = Field(..., description="Phases in [0, 2 pi)")


class ModelFile(BaseModel):
    """Self-describing JSON container for any fitted estimator."""

    format_version: int = MODEL_FORMAT_VERSION
    settings: EstimatorSettings
    dim: int = Field(..., ge=1)
    n_train: int = Field(..., ge=1)
    train: list[list[float]] | None = Field(
        default=None, description="Training points (memory-based estimators only)"
    )
    rff: RffRecord | None = None
    rho: list[list[float]] | None = Field(default=None, description="Full D x D density matrix")
    eigvals: list[float] | None = Field(default=None, description="Top-r eigenvalues, descending")
    eigvecs: list[list[float]] | None = Field(default=None, description="V, r rows of D entries")

    @model_validator(mode="after")
    def _check_payload(self) -> "ModelFile":
        kind = self.settings.kind
        if kind.uses_rff:
            if self.rff is None:
                raise ValueError(f"{kind.value} model file needs an rff record")
            if kind is EstimatorKind.DMKDE and self.rho is None:
                raise ValueError("dmkde model file needs rho")
            if kind is EstimatorKind.DMKDE_LR and (self.eigvals is None or self.eigvecs is None):
                raise ValueError("dmkde-lr model file needs eigvals and eigvecs")
        elif self.train is None:
            raise ValueError(f"{kind.value} model file needs the training points")
        return self
