"""
CSV input/output for point sets and prediction columns.
Floats are written with repr(), the shortest decimal string that round-trips.
"""

import csv
from pathlib import Path

import numpy as np
from numpy.typing import ArrayLike, NDArray

from estimators.errors import DataError
from logger import get_logger

logger = get_logger("DataIO")


def point_header(dim: int) -> list[str]:
    return [f"x{j + 1}" for j in range(dim)]


def write_points_csv(path: str | Path, X: ArrayLike, header: bool = True) -> Path:
    """Write one row per point with columns x1..xd."""
    points = np.asarray(X, dtype=np.float64)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        if header:
            writer.writerow(point_header(points.shape[1]))
        writer.writerows([repr(float(v)) for v in row] for row in points)
    logger.info("Wrote %d points to %s", points.shape[0], path)
    return path


def _is_numeric(row: list[str]) -> bool:
    try:
        [float(v) for v in row]
    except ValueError:
        return False
    return True


def read_points_csv(path: str | Path) -> NDArray[np.float64]:
    """
    Read a point CSV with an optional header row.

    Returns:
        Array of shape (n, d). A header-only file yields shape (0, d).

    Raises:
        DataError: Ragged rows, non-numeric cells or non-finite values.
    """
    with Path(path).open(newline="", encoding="utf-8") as f:
        rows = [row for row in csv.reader(f) if row]

    if not rows:
        raise DataError(f"{path} is empty")

    dim = len(rows[0])
    first_line = 1
    if not _is_numeric(rows[0]):
        rows = rows[1:]
        first_line = 2

    values: list[list[float]] = []
    for lineno, row in enumerate(rows, start=first_line):
        if len(row) != dim:
            raise DataError(f"{path}: row {lineno} has {len(row)} columns, expected {dim}")
        try:
            values.append([float(v) for v in row])
        except ValueError as e:
            raise DataError(f"{path}: row {lineno} is not numeric: {e}") from e

    X = np.asarray(values, dtype=np.float64).reshape(len(values), dim)
    if not np.all(np.isfinite(X)):
        raise DataError(f"{path} contains NaN or Inf entries")
    return X


def write_column_csv(path: str | Path, name: str, values: ArrayLike) -> Path:
    """Write a single named column, one value per row."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow([name])
        writer.writerows([repr(float(v))] for v in np.asarray(values, dtype=np.float64))
    return path
