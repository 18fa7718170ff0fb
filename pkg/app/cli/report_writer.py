from pathlib import Path
from typing import List, Optional, Sequence, Union
import csv
import io
import logging
import sys

from app.models.manifest import ReportFormat
from app.models.report import AlarmReport, CycleFailure, CycleOutcome, RunReport, RunSummary
from app.models.sensor import ValidatedModel
from app.utils.errors import ReportWriteError

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_ALARM = 2

TABLE_HEADER = ["timestamp", "cluster", "evaluated", "pruned", "survivors", "alarm", "error"]


def exit_code_for(outcomes: Sequence[CycleOutcome]) -> int:
    """2 if any cycle alarmed, else 1 if any cycle failed, else 0"""
    if any(isinstance(outcome, AlarmReport) and outcome.alarm for outcome in outcomes):
        return EXIT_ALARM
    if any(isinstance(outcome, CycleFailure) for outcome in outcomes):
        return EXIT_ERROR
    return EXIT_OK


def _render_table(outcomes: Sequence[CycleOutcome]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(TABLE_HEADER)
    for outcome in outcomes:
        if isinstance(outcome, CycleFailure):
            writer.writerow([outcome.timestamp, "", "", "", "", "", f"{outcome.error_type}: {outcome.message}"])
            continue
        for cluster in outcome.clusters:
            writer.writerow([
                outcome.timestamp,
                cluster.cluster_id,
                cluster.evaluated,
                cluster.pruned,
                cluster.survivors,
                str(cluster.alarm).lower(),
                "",
            ])
    return buffer.getvalue()


def render_report(outcomes: Sequence[CycleOutcome], output_format: ReportFormat = ReportFormat.JSON) -> str:
    """Report text with stable field order; identical outcomes give identical bytes"""
    outcomes = list(outcomes)
    if output_format is ReportFormat.CSV:
        return _render_table(outcomes)
    document = RunReport(summary=RunSummary.calculate(outcomes), cycles=outcomes)
    return document.model_dump_json(indent=2) + "\n"


def emit_report(
    outcomes: Sequence[CycleOutcome],
    output_format: ReportFormat = ReportFormat.JSON,
    path: Optional[Union[str, Path]] = None,
) -> str:
    """Write the report to ``path`` or stdout and return the text"""
    text = render_report(outcomes, output_format)
    if path is None:
        sys.stdout.write(text)
        sys.stdout.flush()
        return text

    path = Path(path)
    try:
        path.write_text(text, encoding="utf-8")
    except OSError as e:
        raise ReportWriteError(f"cannot write report {path}: {e.strerror}", {"path": str(path)}) from e
    logger.info(f"Wrote {output_format.value} report to {path}")
    return text


def dump_couplings(model: ValidatedModel, directory: Union[str, Path]) -> List[Path]:
    """One CSV per cluster: a header row of canonical ids, then n rows of n couplings"""
    directory = Path(directory)
    written = []
    try:
        directory.mkdir(parents=True, exist_ok=True)
        for cluster in model.clusters:
            target = directory / f"couplings_{cluster.cluster_id}.csv"
            with target.open("w", newline="", encoding="utf-8") as handle:
                writer = csv.writer(handle, lineterminator="\n")
                writer.writerow(range(1, cluster.n + 1))
                for row in cluster.table.to_rows():
                    writer.writerow(repr(value) for value in row)
            written.append(target)
    except OSError as e:
        raise ReportWriteError(f"cannot write coupling dump to {directory}: {e.strerror}", {"path": str(directory)}) from e
    logger.info(f"Dumped coupling tables for {len(written)} cluster(s) to {directory}")
    return written
