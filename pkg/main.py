"""
CLI entry point for the KDE benchmark.

Subcommands generate synthetic data, fit and persist estimators, estimate
densities from a saved model, cross-validate the bandwidth, estimate potential
normalizers and run the benchmark grid.

Exit codes: 0 success, 2 usage or validation error, 3 IO error, 4 internal error.
"""

import argparse
import sys

import numpy as np

from benchmark.dataio import read_points_csv, write_column_csv, write_points_csv
from benchmark.evaluation import cross_validate
from benchmark.grid import run_experiment_grid
from benchmark.models import power_of_two_grid
from benchmark.presets import PRESETS, build_run_config
from benchmark.reports import write_cv_table, write_reports
from benchmark.synthetic import estimate_normalizer, load_spec, reference_normalizer, sample_dataset
from config import KDEBENCH_THREADS, validate_config
from estimators.errors import DomainError
from estimators.kernels import gamma_from_sigma
from estimators.models import EstimatorKind, EstimatorSettings
from estimators.persistence import load_model, save_model
from estimators.registry import fit_estimator
from logger import get_logger, set_verbose, timed

logger = get_logger("CLI")

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_INTERNAL = 4

ESTIMATOR_CHOICES = [k.value for k in EstimatorKind]
DEFAULT_GAMMA_GRID = power_of_two_grid(-10, 10)
DEFAULT_RFF_GRID = [50, 100, 500, 1000]


def _rank(value: str) -> int | str:
    if value == "auto":
        return value
    try:
        return int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"rank must be 'auto' or an integer, got {value!r}")


def _add_estimator_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--estimator", choices=ESTIMATOR_CHOICES, default="raw", help="Estimator kind.")
    parser.add_argument("--gamma", type=float, help="Kernel inverse-scale 1/(2 sigma^2).")
    parser.add_argument("--sigma", type=float, help="Kernel bandwidth; converted to gamma.")
    parser.add_argument("--rff-d", type=int, dest="rff_d", help="Random Fourier feature count D.")
    parser.add_argument("--rank", type=_rank, default="auto", help="Low-rank r for dmkde-lr, or 'auto'.")
    parser.add_argument("--atol", type=float, help="Absolute tolerance of the tree estimators.")
    parser.add_argument("--rtol", type=float, help="Relative tolerance of the tree estimators.")
    parser.add_argument("--leaf-size", type=int, dest="leaf_size", help="Tree leaf size.")
    parser.add_argument("--folds", type=int, default=5, help="Cross-validation folds.")
    parser.add_argument("--seed", type=int, default=0, help="Seed for random features and folds.")


def parse_args(argv: list[str] | None = None) -> argparse.Namespace:
    """Parse command-line arguments."""
    parser = argparse.ArgumentParser(description="Kernel density estimation benchmark")
    parser.add_argument("--verbose", "-v", action="store_true", help="Enable verbose (DEBUG) logging output.")
    parser.add_argument("--threads", type=int, help="Worker pool size (default: KDEBENCH_THREADS or CPU count).")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="Sample a synthetic data set to CSV.")
    gen.add_argument("--dataset", required=True)
    gen.add_argument("--n", type=int, required=True)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", required=True)

    fit = sub.add_parser("fit", help="Fit an estimator on a CSV and save the model.")
    fit.add_argument("--data", required=True, help="Training points CSV.")
    fit.add_argument("--out", required=True, help="Model file to write.")
    _add_estimator_flags(fit)

    est = sub.add_parser("estimate", help="Estimate densities for query points with a saved model.")
    est.add_argument("--model", required=True)
    est.add_argument("--queries", required=True)
    est.add_argument("--out", required=True)

    cv = sub.add_parser("crossval", help="Cross-validate gamma (and D) on a CSV.")
    cv.add_argument("--data", required=True)
    cv.add_argument("--out", help="Optional CSV for the score table.")
    _add_estimator_flags(cv)

    nz = sub.add_parser("normalizer", help="Monte-Carlo normalizing constant of a potential.")
    nz.add_argument("--dataset", required=True)
    nz.add_argument("--n-mc", type=int, dest="n_mc", default=1_000_000)
    nz.add_argument("--seed", type=int, default=0)

    bench = sub.add_parser("benchmark", help="Run the MAE/timing experiment grid.")
    bench.add_argument("--preset", choices=sorted(PRESETS))
    bench.add_argument("--config", help="JSON run configuration file.")
    bench.add_argument("--dataset", nargs="+", dest="datasets")
    bench.add_argument("--estimator", nargs="+", dest="estimators", choices=ESTIMATOR_CHOICES)
    bench.add_argument("--n", nargs="+", type=int, dest="sizes")
    bench.add_argument("--test-n", type=int, dest="test_size")
    bench.add_argument("--gamma", type=float)
    bench.add_argument("--sigma", type=float)
    bench.add_argument("--rff-d", type=int, dest="n_features")
    bench.add_argument("--rank", type=_rank)
    bench.add_argument("--atol", type=float)
    bench.add_argument("--rtol", type=float)
    bench.add_argument("--leaf-size", type=int, dest="leaf_size")
    bench.add_argument("--folds", type=int)
    bench.add_argument("--seed", type=int)
    bench.add_argument("--repeats", type=int)
    bench.add_argument("--n-seeds", type=int, dest="n_seeds")
    bench.add_argument("--out", dest="output_dir", help="Output directory for report files.")

    return parser.parse_args(argv)


def _gamma_from_flags(args: argparse.Namespace) -> float | None:
    if args.gamma is not None:
        return args.gamma
    if args.sigma is not None:
        return gamma_from_sigma(args.sigma)
    return None


def _settings_from_flags(args: argparse.Namespace, gamma: float, n_features: int | None) -> EstimatorSettings:
    fields = {
        "kind": args.estimator,
        "gamma": gamma,
        "rank": args.rank,
        "seed": args.seed,
        "n_features": n_features,
        "atol": args.atol,
        "rtol": args.rtol,
        "leaf_size": args.leaf_size,
    }
    return EstimatorSettings(**{k: v for k, v in fields.items() if v is not None})


def _cross_validate_flags(args: argparse.Namespace, X: np.ndarray, workers: int):
    kind = EstimatorKind(args.estimator)
    gamma = _gamma_from_flags(args)
    return cross_validate(
        X,
        kind,
        [gamma] if gamma is not None else DEFAULT_GAMMA_GRID,
        ([args.rff_d] if args.rff_d else DEFAULT_RFF_GRID) if kind.uses_rff else None,
        folds=args.folds,
        seed=args.seed,
        rff_seed=args.seed,
        workers=workers,
    )


def cmd_generate(args: argparse.Namespace, workers: int) -> int:
    spec = load_spec(args.dataset, seed=args.seed)
    X = sample_dataset(spec, args.n, args.seed)
    write_points_csv(args.out, X)
    print(f"Wrote {X.shape[0]} {spec.name.value} points to {args.out}")
    return EXIT_OK


def cmd_fit(args: argparse.Namespace, workers: int) -> int:
    X = read_points_csv(args.data)
    if X.shape[0] == 0:
        raise DomainError(f"{args.data} holds no data rows")

    gamma = _gamma_from_flags(args)
    n_features = args.rff_d
    if gamma is None:
        logger.info("No bandwidth given; selecting gamma by %d-fold cross-validation", args.folds)
        result = _cross_validate_flags(args, X, workers)
        gamma = result.best_gamma
        n_features = n_features or result.best_n_features

    settings = _settings_from_flags(args, gamma, n_features)
    with timed(logger, f"fit {settings.kind.value}") as elapsed:
        estimator = fit_estimator(settings, X, workers=workers)
    save_model(estimator, args.out)
    print(f"Fitted {settings.kind.value} (n={X.shape[0]}, gamma={gamma:g}) in {elapsed['ms']:.1f} ms -> {args.out}")
    return EXIT_OK


def cmd_estimate(args: argparse.Namespace, workers: int) -> int:
    estimator = load_model(args.model, workers=workers)
    Q = read_points_csv(args.queries)
    densities = estimator.predict(Q) if Q.shape[0] else np.zeros(0)
    write_column_csv(args.out, "density", densities)
    print(f"Wrote {densities.shape[0]} densities to {args.out}")
    return EXIT_OK


def cmd_crossval(args: argparse.Namespace, workers: int) -> int:
    X = read_points_csv(args.data)
    result = _cross_validate_flags(args, X, workers)
    if args.out:
        write_cv_table(result, args.out)
    best_d = "" if result.best_n_features is None else f" D={result.best_n_features}"
    print(f"Best gamma={result.best_gamma:g}{best_d}")
    return EXIT_OK


def cmd_normalizer(args: argparse.Namespace, workers: int) -> int:
    spec = load_spec(args.dataset)
    z, stderr = estimate_normalizer(spec, args.n_mc, args.seed)
    print(f"{spec.name.value}: Z = {z:.4f} +/- {stderr:.4f} (grid quadrature {reference_normalizer(spec.name):.4f})")
    return EXIT_OK


def cmd_benchmark(args: argparse.Namespace, workers: int) -> int:
    overrides = {
        key: getattr(args, key)
        for key in (
            "datasets", "estimators", "sizes", "test_size", "gamma", "n_features", "rank",
            "atol", "rtol", "leaf_size", "folds", "seed", "repeats", "n_seeds", "output_dir",
        )
    }
    if args.sigma is not None and args.gamma is None:
        overrides["gamma"] = gamma_from_sigma(args.sigma)
    config = build_run_config(args.preset, args.config, overrides)

    reports = run_experiment_grid(config, workers=workers)
    paths = write_reports(reports, config.output_dir)
    failed = sum(r.error is not None for r in reports)
    print(f"{len(reports)} cell(s), {failed} failed; reports in {paths['csv'].parent}")
    return EXIT_INTERNAL if reports and failed == len(reports) else EXIT_OK


COMMANDS = {
    "generate": cmd_generate,
    "fit": cmd_fit,
    "estimate": cmd_estimate,
    "crossval": cmd_crossval,
    "normalizer": cmd_normalizer,
    "benchmark": cmd_benchmark,
}


def main(argv: list[str] | None = None) -> int:
    """Parse flags, dispatch the subcommand and map failures to exit codes."""
    try:
        args = parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_USAGE

    if args.verbose:
        set_verbose()

    try:
        validate_config()
        workers = args.threads if args.threads is not None else KDEBENCH_THREADS
        if workers < 1:
            raise DomainError(f"--threads must be >= 1, got {workers}")
        return COMMANDS[args.command](args, workers)
    except ValueError as e:
        # Domain, shape, data, config and pydantic validation errors
        logger.error("%s", e)
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as e:
        logger.error("IO failure: %s", e)
        print(f"IO error: {e}", file=sys.stderr)
        return EXIT_IO
    except Exception as e:
        logger.exception("Unexpected failure in %s", args.command)
        print(f"Internal error: {e}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
