"""
Centralized configuration loader.
Loads settings from .env file and exposes them as module-level constants.
"""

import os
from typing import Callable, TypeVar

from dotenv import load_dotenv

from estimators.errors import ConfigError

# Load .env file from project root
load_dotenv()

_T = TypeVar("_T", int, float)

# Variables that failed to parse; reported by validate_config()
_malformed: list[str] = []


def _env_number(name: str, default: _T, cast: Callable[[str], _T]) -> _T:
    raw = os.getenv(name, "").strip()
    if not raw:
        return default
    try:
        return cast(raw)
    except ValueError:
        _malformed.append(f"{name} must be {'an integer' if cast is int else 'a number'}, got {raw!r}")
        return default


# --- Logging Configuration ---
LOG_LEVEL: str = os.getenv("LOG_LEVEL", "INFO").upper()
LOG_FILE: str = os.getenv("LOG_FILE", "")

# --- Worker Pool ---
KDEBENCH_THREADS: int = _env_number("KDEBENCH_THREADS", os.cpu_count() or 1, int)

# --- Estimator Defaults ---
DEFAULT_LEAF_SIZE: int = _env_number("KDEBENCH_LEAF_SIZE", 40, int)
DEFAULT_RTOL: float = _env_number("KDEBENCH_RTOL", 1e-8, float)
DEFAULT_ATOL: float = _env_number("KDEBENCH_ATOL", 0.0, float)
DEFAULT_RANK_MASS: float = _env_number("KDEBENCH_RANK_MASS", 0.999, float)

# Rows per streaming chunk for batch kernels and density-matrix accumulation
CHUNK_SIZE: int = _env_number("KDEBENCH_CHUNK_SIZE", 4096, int)

# --- Output Directory ---
OUTPUT_DIR: str = os.getenv(
    "KDEBENCH_OUTPUT_DIR",
    os.path.join(os.path.dirname(os.path.abspath(__file__)), "results"),
)


def validate_config() -> None:
    """Validate that configuration values parse and are in range."""
    if _malformed:
        raise ConfigError("; ".join(_malformed))
    if KDEBENCH_THREADS < 1:
        raise ConfigError(f"KDEBENCH_THREADS must be >= 1, got {KDEBENCH_THREADS}")
    if DEFAULT_LEAF_SIZE < 1:
        raise ConfigError(f"KDEBENCH_LEAF_SIZE must be >= 1, got {DEFAULT_LEAF_SIZE}")
    if DEFAULT_RTOL < 0 or DEFAULT_ATOL < 0:
        raise ConfigError("KDEBENCH_RTOL and KDEBENCH_ATOL must be non-negative")
    if not 0.0 < DEFAULT_RANK_MASS <= 1.0:
        raise ConfigError(f"KDEBENCH_RANK_MASS must lie in (0, 1], got {DEFAULT_RANK_MASS}")
    if CHUNK_SIZE < 1:
        raise ConfigError(f"KDEBENCH_CHUNK_SIZE must be >= 1, got {CHUNK_SIZE}")
