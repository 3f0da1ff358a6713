"""
Built-in run presets and the flags > config file > preset precedence.
"""

import json
from pathlib import Path

from pydantic import ValidationError

from benchmark.models import RunConfig, power_of_two_grid
from benchmark.synthetic import DatasetName
from estimators.errors import ConfigError

ALL_DATASETS = [d.value for d in DatasetName]

PRESETS: dict[str, dict] = {
    # Minutes on a laptop: sizes 10^1..10^4, 10^3 test points
    "desk": {
        "datasets": ALL_DATASETS,
        "estimators": ["raw", "tree", "tree-kd", "tree-ball", "dmkde", "dmkde-lr"],
        "sizes": [10, 100, 1_000, 10_000],
        "test_size": 1_000,
        "gamma_grid": power_of_two_grid(-10, 10),
        "rff_grid": [50, 100, 500, 1000],
        "n_seeds": 1,
        "repeats": 3,
    },
    # Full protocol: sizes 10^1..10^5, 10^4 test points, gamma in 2^-20..2^20.
    # Runs for many hours.
    "full": {
        "datasets": ALL_DATASETS,
        "estimators": ["raw", "naive", "tree", "tree-kd", "tree-ball", "dmkde", "dmkde-lr"],
        "sizes": [10, 100, 1_000, 10_000, 100_000],
        "test_size": 10_000,
        "gamma_grid": power_of_two_grid(-20, 20),
        "rff_grid": [50, 100, 500, 1000],
        "n_seeds": 3,
        "repeats": 5,
    },
}
PRESETS["paper"] = PRESETS["full"]


def build_run_config(
    preset: str | None = None,
    config_file: str | Path | None = None,
    overrides: dict | None = None,
) -> RunConfig:
    """
    Merge a preset, a JSON config file and explicit overrides, later sources winning.

    Raises:
        ConfigError: Unknown preset, unreadable JSON or an invalid merged config.
    """
    merged: dict = {}
    if preset is not None:
        if preset not in PRESETS:
            raise ConfigError(f"unknown preset {preset!r}; expected one of {sorted(PRESETS)}")
        merged.update(PRESETS[preset])
    if config_file is not None:
        try:
            merged.update(json.loads(Path(config_file).read_text(encoding="utf-8")))
        except json.JSONDecodeError as e:
            raise ConfigError(f"config file {config_file} is not valid JSON: {e}") from e
    merged.update({k: v for k, v in (overrides or {}).items() if v is not None})

    try:
        return RunConfig(**merged)
    except ValidationError as e:
        raise ConfigError(f"invalid run configuration: {e}") from e
