"""Deterministic JSON/CSV reports and their console summaries."""

import csv
import hashlib
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Tuple

import numpy as np
from rich.console import Console
from rich.table import Table

logger = logging.getLogger(__name__)

Row = Dict[str, Any]


def jsonable(value: Any) -> Any:
    """Convert numpy scalars, complex numbers and non-finite floats for JSON."""
    if isinstance(value, Mapping):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [jsonable(v) for v in value.tolist()]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        x = float(value)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if isinstance(value, (complex, np.complexfloating)):
        return [jsonable(value.real), jsonable(value.imag)]
    if isinstance(value, Path):
        return value.as_posix()
    if hasattr(value, "value") and isinstance(getattr(value, "value"), str):
        return value.value
    return value


def scene_hash(command: str, scene: Optional[str], parameters: Mapping[str, Any]) -> str:
    """First 12 hex digits of the SHA-256 of the command, scene and parameters."""
    payload = json.dumps(
        {"command": command, "scene": scene, "parameters": jsonable(parameters)},
        sort_keys=True,
        separators=(",", ":"),
    )
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:12]


@dataclass
class Report:
    """Everything a command produced, minus wall-clock data."""

    command: str
    scene_hash: str
    parameters: Dict[str, Any]
    tolerances: Dict[str, Any]
    version: str
    results: Dict[str, Any] = field(default_factory=dict)
    tables: Dict[str, List[Row]] = field(default_factory=dict)
    verdicts: Dict[str, str] = field(default_factory=dict)

    @property
    def stem(self) -> str:
        return f"{self.command}-{self.scene_hash}"

    def to_dict(self) -> Dict[str, Any]:
        return jsonable(
            {
                "command": self.command,
                "scene_hash": self.scene_hash,
                "parameters": self.parameters,
                "tolerances": self.tolerances,
                "version": self.version,
                "results": self.results,
                "tables": self.tables,
                "verdicts": self.verdicts,
            }
        )

    def write(self, output_dir: Path) -> Tuple[Path, List[Path]]:
        """Write ``<command>-<hash>.json`` and one CSV per table.

        Returns:
            The JSON path and the CSV paths.
        """
        output_dir.mkdir(parents=True, exist_ok=True)
        json_path = output_dir / f"{self.stem}.json"
        json_path.write_text(
            json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n", encoding="utf-8"
        )
        csv_paths = [write_table(output_dir / f"{self.stem}-{name}.csv", rows) for name, rows in sorted(self.tables.items()) if rows]
        logger.debug("Wrote %s and %d table(s)", json_path, len(csv_paths))
        return json_path, csv_paths


def write_table(path: Path, rows: List[Row]) -> Path:
    """Write rows with the column order of the first row."""
    path.parent.mkdir(parents=True, exist_ok=True)
    columns = list(rows[0].keys())
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.DictWriter(handle, fieldnames=columns, extrasaction="ignore")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: jsonable(v) for k, v in row.items()})
    return path


_STYLES = {"pass": "green", "passes": "green", "fail": "red", "fails": "red"}


def print_verdicts(console: Console, report: Report, title: Optional[str] = None) -> None:
    """Render the verdicts of a report as a table."""
    if not report.verdicts:
        return
    table = Table(title=title or report.command)
    table.add_column("Check", style="cyan")
    table.add_column("Outcome")
    for name, outcome in report.verdicts.items():
        style = _STYLES.get(outcome, "yellow")
        table.add_row(name, f"[{style}]{outcome}[/{style}]")
    console.print(table)


def print_rows(console: Console, rows: List[Row], title: str, limit: int = 20) -> None:
    """Render the first ``limit`` rows of a result table."""
    if not rows:
        return
    table = Table(title=title)
    for column in rows[0]:
        table.add_column(str(column), justify="right")
    for row in rows[:limit]:
        table.add_row(*(_format(v) for v in row.values()))
    if len(rows) > limit:
        table.caption = f"{len(rows) - limit} more row(s) in the CSV"
    console.print(table)


def _format(value: Any) -> str:
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.6g}"
    return str(jsonable(value))
