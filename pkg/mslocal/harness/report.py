import json
from pathlib import Path
from typing import Tuple, Union

import logging
import pandas as pd

from mslocal.harness.schemas import ExperimentReport, PercolationReport

logger = logging.getLogger(__name__)

HEADER_PREFIX = "# "


def header_line(report: ExperimentReport) -> str:
    """One-line JSON comment with the resolved config, code version and summary."""
    header = {
        "experiment": report.experiment.value,
        "version": report.version,
        "config": report.config.model_dump(mode="json"),
        "samples_ok": report.samples_ok,
        "failures": len(report.failures),
        "summary": report.summary,
    }
    return HEADER_PREFIX + json.dumps(header, sort_keys=True)


def sidecar_path(path: Union[str, Path], kind: str) -> Path:
    path = Path(path)
    return path.with_name(f"{path.stem}.{kind}.jsonl")


def write_report(report: ExperimentReport, path: Union[str, Path]) -> Path:
    """
    Write the report table as CSV plus its JSON-lines sidecars.

    Args:
        report: Finished experiment report.
        path: Destination of the CSV file.

    Returns:
        Path of the CSV file.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    table = pd.DataFrame(report.table())
    with path.open("w", newline="") as f:
        f.write(header_line(report) + "\n")
        if len(table.columns):
            table.to_csv(f, index=False, lineterminator="\n")

    with sidecar_path(path, "metrics").open("w") as f:
        for trace in report.traces:
            for metrics in trace.metrics:
                f.write(json.dumps({"sample_index": trace.sample_index, **metrics.model_dump()}) + "\n")

    if isinstance(report, PercolationReport):
        with sidecar_path(path, "blocks").open("w") as f:
            for snapshot in report.block_snapshots:
                f.write(json.dumps(snapshot) + "\n")

    logger.info(f"Wrote {len(table)} rows to {path}")
    return path


def read_report(path: Union[str, Path]) -> Tuple[dict, pd.DataFrame]:
    """Header and table of a report written by write_report."""
    path = Path(path)
    with path.open() as f:
        first = f.readline()
        if not first.startswith(HEADER_PREFIX):
            raise ValueError(f"{path} has no report header")
        header = json.loads(first[len(HEADER_PREFIX):])
        try:
            table = pd.read_csv(f)
        except pd.errors.EmptyDataError:
            table = pd.DataFrame()
    return header, table
