"""Experiment reports and their CSV/JSON serialisation."""

from __future__ import annotations

import csv
import io
import json
import math
import subprocess
from dataclasses import dataclass, field
from datetime import datetime, timezone
from importlib import resources
from pathlib import Path
from typing import Any

from . import __version__

SCHEMA_VERSION = "1.0.0"


def _load(name: str) -> Any:
    return json.loads(resources.files(__package__).joinpath("schemas", name).read_text())


COLUMNS: dict[str, tuple[str, ...]] = {
    k: tuple(v) for k, v in _load("columns.json").items() if k != "version"
}


def report_schema() -> dict[str, Any]:
    return _load("report.schema.json")


@dataclass
class Check:
    name: str
    status: str  # "pass" | "fail" | "inconclusive"
    detail: str = ""

    def __post_init__(self):
        if self.status not in ("pass", "fail", "inconclusive"):
            raise ValueError(f"bad check status {self.status!r}")


@dataclass
class Report:
    experiment: str
    config: dict[str, Any]
    rows: list[dict[str, Any]]
    columns: tuple[str, ...]
    parameters: dict[str, Any] = field(default_factory=dict)
    checks: list[Check] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.status != "fail" for c in self.checks)

    def failures(self) -> list[Check]:
        return [c for c in self.checks if c.status == "fail"]

    def summary(self) -> str:
        lines = [f"{self.experiment}: {'PASS' if self.passed else 'FAIL'}"]
        lines += [f"  [{c.status}] {c.name}: {c.detail}" for c in self.checks]
        lines += [f"  warning: {w}" for w in self.warnings]
        return "\n".join(lines)


_build_id: str | None = None


def build_id() -> str:
    """``git describe`` of the source tree when available, else the package version."""
    global _build_id
    if _build_id is None:
        try:
            out = subprocess.run(
                ["git", "describe", "--tags", "--always", "--dirty"],
                cwd=Path(__file__).parent,
                capture_output=True,
                text=True,
                timeout=5,
            )
            desc = out.stdout.strip() if out.returncode == 0 else ""
        except (OSError, subprocess.SubprocessError):
            desc = ""
        _build_id = f"{__version__}+{desc}" if desc else __version__
    return _build_id


def _clean(x: Any) -> Any:
    """JSON-safe copy: numpy scalars to Python, non-finite floats to None."""
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if hasattr(x, "item") and not isinstance(x, (str, bytes)):
        x = x.item()
    if isinstance(x, float) and not math.isfinite(x):
        return None
    return x


def to_json(report: Report, *, timestamp: str | None = None) -> str:
    payload = {
        "schema_version": SCHEMA_VERSION,
        "experiment": report.experiment,
        "build_id": build_id(),
        "generated_at": timestamp or datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "config": report.config,
        "columns": list(report.columns),
        "rows": [{c: r.get(c) for c in report.columns} for r in report.rows],
        "parameters": report.parameters,
        "checks": [{"name": c.name, "status": c.status, "detail": c.detail} for c in report.checks],
        "warnings": report.warnings,
        "passed": report.passed,
    }
    return json.dumps(_clean(payload), indent=2, sort_keys=True, allow_nan=False) + "\n"


def _cell(v: Any) -> Any:
    v = _clean(v)
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return v


def to_csv(report: Report) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(report.columns)
    for r in report.rows:
        w.writerow([_cell(r.get(c)) for c in report.columns])
    return buf.getvalue()


def emit_report(report: Report, output_format: str = "json", output_path: str | Path | None = None) -> str:
    """Serialise ``report``; write it to ``output_path`` when given.  Returns the text."""
    if output_format == "json":
        text = to_json(report)
    elif output_format == "csv":
        text = to_csv(report)
    else:
        raise ValueError(f"unknown output format {output_format!r}")
    if output_path is not None:
        path = Path(output_path)
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            with open(path, "w", newline="") as fh:
                fh.write(text)
        except OSError as exc:
            raise OSError(f"cannot write report to {path}: {exc.strerror or exc}") from exc
    return text
