import csv
import json

import numpy as np
import pytest

from benchmark.evaluation import mean_absolute_error
from benchmark.grid import derive_seed, run_experiment_grid
from benchmark.models import EvalReport, RunConfig, power_of_two_grid
from benchmark.presets import PRESETS, build_run_config
from benchmark.reports import AGGREGATE_COLUMNS, REPORT_COLUMNS, aggregate, write_reports
from benchmark.synthetic import load_spec, sample_dataset, true_density_batch
from estimators.errors import ConfigError
from estimators.models import EstimatorSettings
from estimators.registry import fit_estimator


def _config(tmp_path, **overrides):
    fields = {
        "datasets": ["mixture2d"],
        "estimators": ["raw"],
        "sizes": [200],
        "test_size": 100,
        "gamma": 0.5,
        "n_features": 50,
        "output_dir": str(tmp_path),
    }
    fields.update(overrides)
    return RunConfig(**fields)


def test_derive_seed_is_stable_and_distinct():
    assert derive_seed(0, "arc", 100, 0) == derive_seed(0, "arc", 100, 0)
    assert derive_seed(0, "arc", 100, 0) != derive_seed(0, "arc", 100, 1)
    assert derive_seed(0, "arc", 100, 0) != derive_seed(1, "arc", 100, 0)
    assert 0 <= derive_seed(7, "x") < 2**63


class TestRunExperimentGrid:
    def test_single_cell_grid(self, tmp_path):
        reports = run_experiment_grid(_config(tmp_path))
        assert len(reports) == 1
        report = reports[0]
        assert report.error is None
        assert (report.dataset, report.estimator, report.n_train, report.n_test) == ("mixture2d", "raw", 200, 100)
        assert np.isfinite(report.mae) and report.mae > 0
        assert report.repeats == 3
        assert report.gamma == 0.5

    def test_one_row_per_seed(self, tmp_path):
        reports = run_experiment_grid(_config(tmp_path, n_seeds=3))
        assert len(reports) == 3
        assert len({r.seed for r in reports}) == 3

    def test_deterministic_up_to_timing(self, tmp_path):
        config = _config(tmp_path, estimators=["raw", "tree-kd", "dmkde", "dmkde-lr"])
        timing = {"predict_time_ms", "time_std", "fit_time_ms"}
        first = [r.model_dump(exclude=timing) for r in run_experiment_grid(config)]
        second = [r.model_dump(exclude=timing) for r in run_experiment_grid(config)]
        assert first == second

    def test_mae_matches_manual_computation(self, tmp_path):
        config = _config(tmp_path)
        (report,) = run_experiment_grid(config)

        spec = load_spec("mixture2d", seed=derive_seed(0, "mixture2d", "spec"))
        X = sample_dataset(spec, 200, derive_seed(0, "mixture2d", 200, 0))
        Q = sample_dataset(spec, 100, derive_seed(0, "mixture2d", 200, 0, "test"))
        estimator = fit_estimator(EstimatorSettings(kind="raw", gamma=0.5), X)
        expected = mean_absolute_error(estimator.predict(Q), true_density_batch(spec, Q))
        assert report.mae == pytest.approx(expected, rel=1e-12)

    def test_cross_validation_fills_hyperparameters(self, tmp_path):
        config = _config(
            tmp_path,
            estimators=["raw", "dmkde-lr"],
            gamma=None,
            n_features=None,
            gamma_grid=[0.25, 1.0],
            rff_grid=[20, 40],
        )
        raw, low_rank = run_experiment_grid(config)
        assert raw.gamma in (0.25, 1.0) and raw.n_features is None
        assert low_rank.gamma in (0.25, 1.0) and low_rank.n_features in (20, 40)
        assert low_rank.rank is not None and 1 <= low_rank.rank <= low_rank.n_features

    def test_density_matrix_accuracy_tracks_exact_at_thousand_points(self, tmp_path):
        config = _config(
            tmp_path,
            estimators=["raw", "dmkde"],
            sizes=[1000],
            test_size=500,
            gamma=None,
            n_features=None,
            gamma_grid=power_of_two_grid(-4, 10),
            rff_grid=[100, 500],
        )
        raw, density_matrix = run_experiment_grid(config)
        assert density_matrix.gamma == raw.gamma / 2
        assert density_matrix.mae <= 10.0 * raw.mae

    def test_failing_cell_is_recorded(self, tmp_path):
        # Three training points cannot be split into five folds
        config = _config(tmp_path, sizes=[3, 50], gamma=None, gamma_grid=[1.0])
        failed, ok = run_experiment_grid(config)
        assert failed.error is not None and "DomainError" in failed.error
        assert failed.mae is None
        assert ok.error is None

    def test_every_estimator_kind_runs(self, tmp_path):
        kinds = ["raw", "naive", "tree", "tree-kd", "tree-ball", "dmkde", "dmkde-lr"]
        reports = run_experiment_grid(_config(tmp_path, estimators=kinds, datasets=["arc", "mixture10d"]))
        assert len(reports) == 14
        assert all(r.error is None and np.isfinite(r.mae) for r in reports)
        by_kind = {(r.dataset, r.estimator): r.mae for r in reports}
        for dataset in ("arc", "mixture10d"):
            for kind in ("naive", "tree", "tree-kd", "tree-ball"):
                assert by_kind[(dataset, kind)] == pytest.approx(by_kind[(dataset, "raw")], rel=1e-5)


class TestReports:
    def test_written_files(self, tmp_path):
        reports = run_experiment_grid(_config(tmp_path, estimators=["raw", "dmkde"], n_seeds=2))
        paths = write_reports(reports, tmp_path / "out")

        with paths["csv"].open() as f:
            rows = list(csv.reader(f))
        assert rows[0] == REPORT_COLUMNS
        assert len(rows) == 5
        assert rows[0][:5] == ["dataset", "estimator", "n_train", "n_test", "seed"]

        lines = paths["jsonl"].read_text().splitlines()
        assert [EvalReport(**json.loads(line)) for line in lines] == reports

        with paths["aggregate"].open() as f:
            agg = list(csv.DictReader(f))
        assert list(agg[0]) == AGGREGATE_COLUMNS
        assert len(agg) == 2

    def test_aggregate_medians_skip_failures(self):
        base = {"dataset": "arc", "estimator": "raw", "n_train": 10, "n_test": 5, "seed": 0}
        reports = [
            EvalReport(**base, mae=0.1, predict_time_ms=1.0),
            EvalReport(**base, mae=0.3, predict_time_ms=3.0),
            EvalReport(**base, mae=0.2, predict_time_ms=2.0),
            EvalReport(**base, error="DomainError: boom"),
        ]
        (row,) = aggregate(reports)
        assert (row.n, row.mae_median, row.time_median) == (10, 0.2, 2.0)

    def test_all_failed_group(self):
        base = {"dataset": "arc", "estimator": "raw", "n_train": 10, "n_test": 5, "seed": 0}
        (row,) = aggregate([EvalReport(**base, error="x")])
        assert row.mae_median is None and row.time_median is None


class TestPresets:
    def test_desk_preset_covers_grid(self):
        config = build_run_config("desk")
        assert len(config.datasets) == 7
        assert len(config.estimators) == 6
        assert config.sizes == [10, 100, 1000, 10_000]
        assert config.gamma_grid[0] == 2.0**-10 and config.gamma_grid[-1] == 2.0**10

    def test_full_preset_reaches_largest_size(self):
        config = build_run_config("full")
        assert max(config.sizes) == 100_000
        assert config.test_size == 10_000
        assert len(config.gamma_grid) == 41
        assert build_run_config("paper") == config

    def test_precedence(self, tmp_path):
        config_file = tmp_path / "run.json"
        config_file.write_text(json.dumps({"test_size": 77, "folds": 3}))
        config = build_run_config("desk", config_file, {"folds": 4, "seed": None})
        assert config.test_size == 77
        assert config.folds == 4
        assert config.seed == 0
        assert config.sizes == PRESETS["desk"]["sizes"]

    def test_unknown_preset(self):
        with pytest.raises(ConfigError):
            build_run_config("huge")

    def test_bad_json(self, tmp_path):
        config_file = tmp_path / "run.json"
        config_file.write_text("{")
        with pytest.raises(ConfigError):
            build_run_config(None, config_file)

    @pytest.mark.parametrize(
        "overrides",
        [
            {"sizes": [0]},
            {"sizes": []},
            {"gamma_grid": [-1.0]},
            {"repeats": 2},
            {"datasets": ["nope"]},
        ],
    )
    def test_invalid_values(self, overrides):
        with pytest.raises(ConfigError):
            build_run_config("desk", None, overrides)

    def test_missing_required_fields(self):
        with pytest.raises(ConfigError):
            build_run_config(None, None, {"sizes": [10]})


@pytest.mark.slow
def test_desk_scale_accuracy(tmp_path):
    config = RunConfig(
        datasets=["arc", "mixture2d"],
        estimators=["raw", "tree-kd", "dmkde"],
        sizes=[10_000],
        test_size=1000,
        rff_grid=[100, 500, 1000],
        cv_max_n=2000,
        output_dir=str(tmp_path),
    )
    reports = run_experiment_grid(config)
    mae = {(r.dataset, r.estimator): r.mae for r in reports}
    for dataset in ("arc", "mixture2d"):
        assert mae[(dataset, "raw")] <= 0.005
        assert mae[(dataset, "tree-kd")] <= 0.005
        assert mae[(dataset, "dmkde")] <= 10.0 * mae[(dataset, "raw")]


@pytest.mark.slow
def test_exact_error_shrinks_with_more_data(tmp_path):
    config = RunConfig(
        datasets=["mixture2d"],
        estimators=["raw"],
        sizes=[100, 10_000],
        test_size=1000,
        n_seeds=5,
        output_dir=str(tmp_path),
    )
    rows = {row.n: row.mae_median for row in aggregate(run_experiment_grid(config))}
    assert rows[10_000] <= rows[100]
