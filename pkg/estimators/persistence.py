"""
Save and load fitted estimators as JSON model files.

Floats are written in shortest round-trip form, so a reloaded model predicts
bit-for-bit what the in-memory model predicted. Trees are stored as their
training points and settings and rebuilt deterministically on load.
"""

from pathlib import Path

import numpy as np
from pydantic import ValidationError

from estimators.density_matrix import DensityMatrixModel
from estimators.errors import DataError
from estimators.exact import fit_exact
from estimators.kernels import Bandwidth
from estimators.models import MODEL_FORMAT_VERSION, EstimatorKind, ModelFile, RffRecord
from estimators.registry import FittedEstimator, fit_estimator
from estimators.rff import RffMap
from logger import get_logger

logger = get_logger("Persistence")


def to_model_file(estimator: FittedEstimator) -> ModelFile:
    """Describe a fitted estimator as a ModelFile record."""
    model = estimator.model
    payload: dict = {
        "settings": estimator.settings,
        "dim": estimator.dim,
        "n_train": estimator.n_train,
    }
    if isinstance(model, DensityMatrixModel):
        payload["rff"] = RffRecord(
            gamma=model.rff_map.gamma,
            seed=model.rff_map.seed,
            W=model.rff_map.W.tolist(),
            b=model.rff_map.b.tolist(),
        )
        if estimator.kind is EstimatorKind.DMKDE:
            payload["rho"] = model.rho.tolist()
        else:
            payload["eigvals"] = model.eigvals.tolist()
            payload["eigvecs"] = model.eigvecs.tolist()
    else:
        payload["train"] = model.train.tolist()
    return ModelFile(**payload)


def from_model_file(record: ModelFile, workers: int = 1) -> FittedEstimator:
    """Rebuild a FittedEstimator from a ModelFile record."""
    if record.format_version != MODEL_FORMAT_VERSION:
        raise DataError(f"unsupported model format version {record.format_version}")
    settings = record.settings
    bw = Bandwidth(gamma=settings.gamma, dim=record.dim)

    if settings.kind.uses_rff:
        rff_map = RffMap(
            W=np.asarray(record.rff.W, dtype=np.float64).reshape(-1, record.dim),
            b=np.asarray(record.rff.b, dtype=np.float64),
            gamma=record.rff.gamma,
            seed=record.rff.seed,
        )
        model = DensityMatrixModel(
            rff_map=rff_map,
            bw=bw,
            n_train=record.n_train,
            rho=None if record.rho is None else np.asarray(record.rho, dtype=np.float64),
            eigvecs=None if record.eigvecs is None else np.asarray(record.eigvecs, dtype=np.float64),
            eigvals=None if record.eigvals is None else np.asarray(record.eigvals, dtype=np.float64),
        )
        return FittedEstimator(settings, model, workers=workers)

    train = np.asarray(record.train, dtype=np.float64)
    if settings.kind.uses_tree:
        return fit_estimator(settings, train, workers=workers)
    return FittedEstimator(settings, fit_exact(train, bw), workers=workers)


def save_model(estimator: FittedEstimator, path: str | Path) -> Path:
    """Write the model file; returns the path written."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(to_model_file(estimator).model_dump_json(), encoding="utf-8")
    logger.info("Saved %s model to %s", estimator.kind.value, path)
    return path


def load_model(path: str | Path, workers: int = 1) -> FittedEstimator:
    """Read a model file written by save_model."""
    text = Path(path).read_text(encoding="utf-8")
    try:
        record = ModelFile.model_validate_json(text)
    except ValidationError as e:
        raise DataError(f"invalid model file {path}: {e}") from e
    estimator = from_model_file(record, workers=workers)
    logger.info("Loaded %s model from %s (n_train=%d, d=%d)", estimator.kind.value, path, record.n_train, record.dim)
    return estimator
