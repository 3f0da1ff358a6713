"""
Report writers: per-cell CSV and JSON lines, plus the plot-ready aggregate
(dataset, estimator, n, mae_median, time_median).
"""

import csv
from collections import defaultdict
from pathlib import Path

import numpy as np

from benchmark.models import AggregateRow, CvResult, EvalReport
from logger import get_logger

logger = get_logger("Reports")

REPORT_COLUMNS = list(EvalReport.model_fields)
AGGREGATE_COLUMNS = list(AggregateRow.model_fields)


def _csv_cell(value: object) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_rows(path: Path, columns: list[str], rows: list[dict]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(columns)
        writer.writerows([_csv_cell(row[c]) for c in columns] for row in rows)


def aggregate(reports: list[EvalReport]) -> list[AggregateRow]:
    """Median MAE and median prediction time over the successful repetitions of each cell."""
    groups: dict[tuple[str, str, int], list[EvalReport]] = defaultdict(list)
    for report in reports:
        groups[(report.dataset, report.estimator, report.n_train)].append(report)

    rows = []
    for (dataset, estimator, n), group in groups.items():
        ok = [r for r in group if r.error is None]
        rows.append(
            AggregateRow(
                dataset=dataset,
                estimator=estimator,
                n=n,
                mae_median=float(np.median([r.mae for r in ok])) if ok else None,
                time_median=float(np.median([r.predict_time_ms for r in ok])) if ok else None,
            )
        )
    return rows


def write_reports(reports: list[EvalReport], output_dir: str | Path) -> dict[str, Path]:
    """Write reports.csv, reports.jsonl and aggregate.csv into output_dir."""
    out = Path(output_dir)
    paths = {
        "csv": out / "reports.csv",
        "jsonl": out / "reports.jsonl",
        "aggregate": out / "aggregate.csv",
    }
    _write_rows(paths["csv"], REPORT_COLUMNS, [r.model_dump() for r in reports])
    with paths["jsonl"].open("w", encoding="utf-8") as f:
        for report in reports:
            f.write(report.model_dump_json() + "\n")
    _write_rows(paths["aggregate"], AGGREGATE_COLUMNS, [row.model_dump() for row in aggregate(reports)])
    logger.info("Wrote %d report row(s) to %s", len(reports), out)
    return paths


def write_cv_table(result: CvResult, path: str | Path) -> Path:
    """CSV of the cross-validation grid: gamma, n_features, criterion, score."""
    path = Path(path)
    rows = [
        {"gamma": s.gamma, "n_features": s.n_features, "criterion": s.criterion.value, "score": s.score}
        for s in result.table
    ]
    _write_rows(path, ["gamma", "n_features", "criterion", "score"], rows)
    return path
