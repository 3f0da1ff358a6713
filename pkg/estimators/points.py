"""
PointSet validation helpers.
A PointSet is an (n, d) float64 numpy array; every estimator routes its inputs through here.
"""

import numpy as np
from numpy.typing import ArrayLike, NDArray

from estimators.errors import DataError, DomainError, ShapeError


def as_point_set(X: ArrayLike, dim: int | None = None, allow_empty: bool = False) -> NDArray[np.float64]:
    """
    Coerce training or query data to a finite (n, d) float64 array.

    Args:
        X: Array-like of shape (n, d), or (d,) for a single point.
        dim: Expected dimension, checked when given.
        allow_empty: Accept n == 0 (query batches may be empty).

    Returns:
        A C-contiguous float64 array of shape (n, d).

    Raises:
        DataError: Ragged rows or non-finite entries.
        DomainError: Empty input when allow_empty is False.
        ShapeError: Dimension differs from dim.
    """
    try:
        arr = np.asarray(X, dtype=np.float64)
    except ValueError as e:
        raise DataError(f"point set is not a rectangular numeric array: {e}") from e

    if arr.ndim == 1:
        arr = arr[np.newaxis, :]
    if arr.ndim != 2:
        raise DataError(f"point set must be 2-dimensional, got shape {arr.shape}")
    if arr.shape[0] == 0 and not allow_empty:
        raise DomainError("point set is empty")
    if dim is not None and arr.shape[1] != dim:
        raise ShapeError(f"expected points of dimension {dim}, got {arr.shape[1]}")
    if not np.all(np.isfinite(arr)):
        raise DataError("point set contains NaN or Inf entries")
    return np.ascontiguousarray(arr)


def as_point(x: ArrayLike, dim: int) -> NDArray[np.float64]:
    """Coerce a single query point to a finite (d,) float64 vector."""
    arr = np.asarray(x, dtype=np.float64).reshape(-1)
    if arr.shape[0] != dim:
        raise ShapeError(f"expected a point of dimension {dim}, got {arr.shape[0]}")
    if not np.all(np.isfinite(arr)):
        raise DataError("query point contains NaN or Inf entries")
    return arr
