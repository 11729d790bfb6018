"""
Report files: one CSV row per j/trial, full metadata in JSON.

Files are named ``{name}-{seed}-{timestamp}.{ext}``; the timestamp only
appears in the name, so identical runs produce byte-identical contents.
"""

import json
import logging
from datetime import datetime
from pathlib import Path
from typing import Any, List, Optional

import pandas as pd

from ..errors import DomainError
from ..schemas import ExperimentReport

logger = logging.getLogger(__name__)

FORMATS = ("csv", "json", "both")


def make_timestamp() -> str:
    return datetime.utcnow().strftime("%Y%m%dT%H%M%SZ")


def report_filename(name: str, seed: Any, timestamp: str, ext: str) -> str:
    return f"{name}-{seed}-{timestamp}.{ext}"


def _cell(value: Any) -> Any:
    if isinstance(value, (list, tuple, dict)):
        return json.dumps(value, sort_keys=True)
    return value


def report_frame(report: ExperimentReport) -> pd.DataFrame:
    """Rows as a table; nested cells are JSON encoded."""
    rows = [{k: _cell(v) for k, v in row.items()} for row in report.rows]
    return pd.DataFrame(rows)


def report_json(report: ExperimentReport) -> str:
    return json.dumps(report.model_dump(mode="json"), indent=2, sort_keys=True) + "\n"


def write_report(
    report: ExperimentReport,
    out_dir: str,
    fmt: str = "both",
    seed: Any = None,
    timestamp: Optional[str] = None,
) -> List[Path]:
    """Write the report as CSV and/or JSON and return the written paths."""
    if fmt not in FORMATS:
        raise DomainError(f"unknown report format {fmt!r}", known=list(FORMATS))
    directory = Path(out_dir)
    directory.mkdir(parents=True, exist_ok=True)
    timestamp = timestamp or make_timestamp()
    seed = report.parameters.get("seed", report.metadata.get("seed")) if seed is None else seed
    written = []
    if fmt in ("csv", "both"):
        path = directory / report_filename(report.name, seed, timestamp, "csv")
        report_frame(report).to_csv(path, index=False)
        written.append(path)
    if fmt in ("json", "both"):
        path = directory / report_filename(report.name, seed, timestamp, "json")
        path.write_text(report_json(report))
        written.append(path)
    for path in written:
        logger.info("wrote %s", path)
    return written


def verdict_line(report: ExperimentReport) -> str:
    return f"verdict: {report.verdict}"


def summary_lines(report: ExperimentReport) -> List[str]:
    """Human-readable summary: one ``key: value`` line per summary entry, verdict last."""
    lines = [f"{report.name}: {len(report.rows)} rows"]
    for key, value in sorted(report.summary.items()):
        lines.append(f"  {key}: {json.dumps(value, sort_keys=True, default=str)}")
    lines.append(verdict_line(report))
    return lines


def format_table(report: ExperimentReport, columns: List[str]) -> str:
    """The selected row columns as a fixed-width text table."""
    frame = report_frame(report)
    keep = [c for c in columns if c in frame.columns]
    return frame[keep].to_string(index=False)
