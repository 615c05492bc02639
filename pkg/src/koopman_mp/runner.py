"""Module with functions to run experiments and write their results."""
from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from joblib import Parallel, delayed

from koopman_mp import Experiment, PointResult, Summary
from koopman_mp.config import ExperimentConfig

_logger = logging.getLogger(__name__)

SUMMARY_FILE = "summary.json"


@dataclass(frozen=True)
class RunReport:
    """The outcome of an experiment run.

    Attributes:
        experiment (str): The experiment name.
        output (Path): The directory the results were written to.
        summary (Summary): The aggregated results and checks.
        files (list[Path]): All files written, summary included.
    """

    experiment: str
    output: Path
    summary: Summary
    files: list[Path]

    @property
    def passed(self) -> bool:
        """Whether all acceptance checks passed."""
        return self.summary.passed


def _format(value: Any) -> Any:  # noqa: ANN401
    if isinstance(value, bool):
        return int(value)
    if isinstance(value, float):
        return repr(value)
    return value


def write_table(rows: list[dict[str, Any]], path: Path) -> None:
    """Write rows as CSV, with columns in the order of the first row.

    Floats are written in round-trip precision.
    """
    columns = list(rows[0]) if rows else []
    with path.open("w", newline="") as handle:
        writer = csv.DictWriter(handle, fieldnames=columns, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({key: _format(value) for key, value in row.items()})


def _collect_tables(
    results: list[PointResult],
    summary: Summary,
) -> dict[str, list[dict[str, Any]]]:
    tables: dict[str, list[dict[str, Any]]] = {}
    for result in results:
        for name, rows in result.tables.items():
            tables.setdefault(name, []).extend(rows)
    for name, rows in summary.tables.items():
        tables.setdefault(name, []).extend(rows)
    return tables


def _run_point(experiment: Experiment, point: dict[str, Any]) -> PointResult:
    _logger.info("Running sweep point {point}", extra={"point": point})
    return experiment.run_point(point)


def run_experiment(config: ExperimentConfig) -> RunReport:
    """Run an experiment and write its tables and summary.

    Sweep points are computed by up to ``config.workers`` processes. The results
    are collected in sweep order, so the output files depend only on the
    configuration.

    Args:
        config (ExperimentConfig): The validated configuration.

    Raises:
        UnsupportedExperimentError: If the experiment doesn't exist.
        NumericalError: If a numerical step fails.

    Returns:
        RunReport: The summary and the list of written files.
    """
    experiment = Experiment.create(config)
    output = Path(config.output)
    output.mkdir(parents=True, exist_ok=True)

    _logger.info(
        "Preparing experiment {experiment}",
        extra={"experiment": config.experiment},
    )
    experiment.prepare()
    points = experiment.sweep_points()
    _logger.info(
        "Running {count} sweep points with {workers} workers",
        extra={"count": len(points), "workers": config.workers},
    )
    results = Parallel(n_jobs=config.workers)(
        delayed(_run_point)(experiment, point) for point in points
    )
    summary = experiment.summarize(results)

    files = []
    for name, rows in sorted(_collect_tables(results, summary).items()):
        path = output / f"{name}.csv"
        write_table(rows, path)
        files.append(path)

    document = {
        "experiment": config.experiment,
        "config": config.to_dict(),
        "metrics": summary.metrics,
        "checks": {name: check.to_dict() for name, check in summary.checks.items()},
        "passed": summary.passed,
    }
    summary_path = output / SUMMARY_FILE
    summary_path.write_text(json.dumps(document, indent=2, sort_keys=True) + "\n")
    files.append(summary_path)

    _logger.info(
        "Experiment {experiment} finished, checks passed: {passed}",
        extra={"experiment": config.experiment, "passed": summary.passed},
    )
    return RunReport(
        experiment=config.experiment,
        output=output,
        summary=summary,
        files=files,
    )
