"""Shared plumbing for the CLI commands: scenes, error mapping and reports."""

import logging
import time
from contextlib import contextmanager
from pathlib import Path
from typing import Any, Dict, Iterator, List, Mapping, Optional, Sequence

import typer
from rich.console import Console

from .. import __version__
from ..config import ToolkitSettings, Workspace, get_settings, load_scene, prepare
from ..errors import LogpotError, PreconditionError
from ..reports import Report, Row, print_rows, print_verdicts, scene_hash

console = Console()
logger = logging.getLogger(__name__)

EXIT_PRECONDITION = 2
EXIT_VERDICT = 3

_BAD_VERDICTS = {"fail", "fails", "inconclusive"}


def current_settings(ctx: Optional[typer.Context] = None) -> ToolkitSettings:
    """Settings stored by the app callback, or the environment defaults."""
    if ctx is not None and isinstance(ctx.obj, ToolkitSettings):
        return ctx.obj
    return get_settings()


@contextmanager
def guarded() -> Iterator[None]:
    """Turn rejected inputs into exit code 2 with a red message."""
    try:
        yield
    except LogpotError as e:
        console.print(f"[red]Error:[/red] {e}")
        raise typer.Exit(EXIT_PRECONDITION)


def load_workspace(scene_path: Path, settings: ToolkitSettings) -> Workspace:
    """Read, validate and realize a scene file."""
    scene = load_scene(scene_path)
    workspace = prepare(scene, settings)
    logger.debug("Loaded %s with %d nodes", scene_path, workspace.K.size)
    return workspace


def parse_point(text: str) -> complex:
    """``"x,y"`` or ``"x"`` as a complex number."""
    parts = [p.strip() for p in text.split(",")]
    try:
        if len(parts) == 1:
            return complex(float(parts[0]), 0.0)
        if len(parts) == 2:
            return complex(float(parts[0]), float(parts[1]))
    except ValueError:
        pass
    raise PreconditionError(f"cannot read point {text!r}; expected 'x,y'")


def parse_floats(text: str) -> List[float]:
    """Comma separated numbers, as used by ``--schedule``."""
    try:
        return [float(p) for p in text.split(",") if p.strip()]
    except ValueError as e:
        raise PreconditionError(f"cannot read number list {text!r}") from e


def settings_echo(settings: ToolkitSettings) -> Dict[str, Any]:
    """Settings that influence results; echoed into every report."""
    return settings.model_dump(exclude={"output_dir", "max_workers", "tolerances"})


def build_report(
    command: str,
    settings: ToolkitSettings,
    parameters: Mapping[str, Any],
    scene_text: Optional[str] = None,
    results: Optional[Dict[str, Any]] = None,
    tables: Optional[Dict[str, List[Row]]] = None,
    verdicts: Optional[Dict[str, str]] = None,
) -> Report:
    echo = settings_echo(settings) | dict(parameters)
    return Report(
        command=command,
        scene_hash=scene_hash(command, scene_text, echo),
        parameters=echo,
        tolerances=settings.tolerances.model_dump(),
        version=__version__,
        results=results or {},
        tables=tables or {},
        verdicts=verdicts or {},
    )


def emit(
    report: Report,
    settings: ToolkitSettings,
    started: float,
    show_tables: Sequence[str] = (),
    show_verdicts: bool = True,
) -> bool:
    """Write the report, summarize it on the console and tell whether every verdict is good."""
    json_path, csv_paths = report.write(settings.output_dir)
    for name in show_tables:
        print_rows(console, report.tables.get(name, []), f"{report.command}: {name}")
    if show_verdicts:
        print_verdicts(console, report)
    console.print(f"[green]✓[/green] Report written to [bold]{json_path}[/bold]")
    for path in csv_paths:
        console.print(f"  • {path}")
    elapsed = time.perf_counter() - started
    console.print(f"[dim]{report.command} finished in {elapsed:.2f}s[/dim]")
    return not any(v in _BAD_VERDICTS for v in report.verdicts.values())


def finish(report: Report, settings: ToolkitSettings, started: float, show_tables: Sequence[str] = ()) -> None:
    """Emit the report and exit with code 3 on failed or inconclusive verdicts."""
    if not emit(report, settings, started, show_tables):
        bad = [k for k, v in report.verdicts.items() if v in _BAD_VERDICTS]
        console.print(f"[yellow]Unsatisfied verdicts:[/yellow] {', '.join(bad)}")
        raise typer.Exit(EXIT_VERDICT)


def pass_fail(ok: bool) -> str:
    return "pass" if ok else "fail"
