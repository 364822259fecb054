"""Experiment reports: pydantic models, console markdown and JSON/CSV persistence."""

import csv
import json
import logging
import math
from datetime import UTC, datetime
from pathlib import Path
from typing import Any, Literal

from pydantic import BaseModel, Field, field_validator

logger = logging.getLogger(__name__)

Verdict = Literal["PASS", "FAIL", "INCONCLUSIVE"]


def _plain(value: Any) -> Any:
    """numpy scalars and arrays to plain Python; non-finite floats to strings so JSON stays strict."""
    if hasattr(value, "tolist"):
        value = value.tolist()
    if isinstance(value, float) and not math.isfinite(value):
        return str(value)
    if isinstance(value, complex):
        return [_plain(value.real), _plain(value.imag)]
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, list | tuple):
        return [_plain(v) for v in value]
    return value


class Table(BaseModel):
    """A named table of raw experiment rows."""

    name: str
    columns: list[str]
    rows: list[list[Any]] = Field(default_factory=list)

    @field_validator("rows", mode="before")
    @classmethod
    def _plain_rows(cls, rows: Any) -> Any:
        return _plain(rows)

    def add(self, *values: Any) -> None:
        if len(values) != len(self.columns):
            raise ValueError(f"table {self.name} has {len(self.columns)} columns, got {len(values)} values")
        self.rows.append(_plain(list(values)))


class ExperimentReport(BaseModel):
    """Outcome of one experiment with the data behind the verdict."""

    name: str
    params: dict[str, Any] = Field(default_factory=dict)
    tables: list[Table] = Field(default_factory=list)
    verdict: Verdict = "INCONCLUSIVE"
    seeds: list[int] = Field(default_factory=list)
    grid: dict[str, Any] = Field(default_factory=dict)
    provenance: dict[str, Any] = Field(default_factory=dict)
    notes: list[str] = Field(default_factory=list)
    started_at: datetime = Field(default_factory=lambda: datetime.now(UTC))

    @field_validator("params", "grid", "provenance", mode="before")
    @classmethod
    def _plain_maps(cls, value: Any) -> Any:
        return _plain(value)

    def table(self, name: str) -> Table:
        for table in self.tables:
            if table.name == name:
                return table
        raise KeyError(f"report {self.name} has no table {name!r}")

    @property
    def passed(self) -> bool:
        return self.verdict == "PASS"

    def payload(self) -> dict[str, Any]:
        """Deterministic content: everything except the timestamp."""
        return self.model_dump(mode="json", exclude={"started_at"})

    def to_markdown(self) -> str:
        parts = [f"# {self.name}: {self.verdict}\n"]
        if self.params:
            parts.append("**Parameters:** " + ", ".join(f"`{k}={v}`" for k, v in sorted(self.params.items())) + "\n")
        for note in self.notes:
            parts.append(f"- {note}")
        for table in self.tables:
            parts.append(f"\n## {table.name}\n")
            parts.append("| " + " | ".join(table.columns) + " |")
            parts.append("|" + "---|" * len(table.columns))
            for row in table.rows:
                parts.append("| " + " | ".join(_format_cell(v) for v in row) + " |")
        return "\n".join(parts) + "\n"


class SuiteEntry(BaseModel):
    criterion: str
    verdict: Verdict
    error: str | None = None
    report: ExperimentReport | None = None


class SuiteReport(BaseModel):
    """Aggregate of the acceptance battery: PASS only when every entry passes."""

    verdict: Verdict = "INCONCLUSIVE"
    entries: list[SuiteEntry] = Field(default_factory=list)
    provenance: dict[str, Any] = Field(default_factory=dict)
    started_at: datetime = Field(default_factory=lambda: datetime.now(UTC))

    @property
    def name(self) -> str:
        return "suite"

    def settle(self) -> None:
        verdicts = {entry.verdict for entry in self.entries}
        if verdicts == {"PASS"}:
            self.verdict = "PASS"
        elif "FAIL" in verdicts:
            self.verdict = "FAIL"
        else:
            self.verdict = "INCONCLUSIVE"

    def payload(self) -> dict[str, Any]:
        return self.model_dump(
            mode="json",
            exclude={"started_at": True, "entries": {"__all__": {"report": {"started_at"}}}},
        )

    def to_markdown(self) -> str:
        parts = [f"# Acceptance suite: {self.verdict}\n", "| criterion | verdict | error |", "|---|---|---|"]
        for entry in self.entries:
            parts.append(f"| {entry.criterion} | {entry.verdict} | {entry.error or ''} |")
        return "\n".join(parts) + "\n"


def _format_cell(value: Any) -> str:
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def write_report(report: ExperimentReport | SuiteReport, out_dir: str | Path, json_name: str | None = None) -> Path:
    """Write ``<name>.json`` (sorted keys, no timestamp) plus one CSV per table; returns the JSON path."""
    directory = Path(out_dir)
    directory.mkdir(parents=True, exist_ok=True)
    path = directory / (json_name or f"{report.name}.json")
    path.write_text(json.dumps(report.payload(), sort_keys=True, indent=2) + "\n")

    reports = [report] if isinstance(report, ExperimentReport) else [e.report for e in report.entries if e.report]
    for item in reports:
        for table in item.tables:
            csv_path = directory / f"{item.name}.{table.name}.csv"
            with csv_path.open("w", newline="") as handle:
                writer = csv.writer(handle)
                writer.writerow(table.columns)
                writer.writerows(table.rows)
    logger.info(f"Report written to {path}")
    return path
