"""Reproduce command: run registered experiments and judge their checks."""

import logging
import time
from typing import List, Optional

import typer
from rich.table import Table

from ..config import ToolkitSettings
from ..experiments import Experiment, ExperimentOutcome, Outcome, get_experiment_registry
from .common import EXIT_PRECONDITION, EXIT_VERDICT, build_report, console, emit, guarded

logger = logging.getLogger(__name__)

_STYLES = {Outcome.PASS: "green", Outcome.FAIL: "red", Outcome.MEASURED: "yellow"}


def list_experiments() -> None:
    """Print every registered experiment."""
    table = Table(title="Experiments")
    table.add_column("Id", style="cyan")
    table.add_column("Title")
    for experiment in get_experiment_registry().get_all():
        table.add_row(experiment.id, experiment.title)
    console.print(table)


def _print_outcome(experiment: Experiment, outcome: ExperimentOutcome) -> None:
    table = Table(title=f"{experiment.id}: {experiment.title}")
    table.add_column("Check", style="cyan")
    table.add_column("Outcome")
    table.add_column("Value", justify="right")
    table.add_column("Detail")
    for criterion in outcome.criteria:
        style = _STYLES[criterion.outcome]
        value = "" if criterion.value is None else f"{criterion.value:.6g}"
        table.add_row(
            criterion.name,
            f"[{style}]{criterion.outcome.value.upper()}[/{style}]",
            value,
            criterion.detail,
        )
    console.print(table)


def run_experiment(experiment: Experiment, settings: ToolkitSettings) -> bool:
    """Run one experiment, write its report and print its checks."""
    started = time.perf_counter()
    with console.status(f"Running {experiment.id}..."):
        outcome = experiment.run(settings)
    _print_outcome(experiment, outcome)
    report = build_report(
        f"reproduce-{experiment.id}",
        settings,
        {"experiment": experiment.id},
        results=outcome.results | {"criteria": {c.name: c.to_dict() for c in outcome.criteria}},
        tables=outcome.tables,
        verdicts=outcome.verdicts(),
    )
    emit(report, settings, started, show_verdicts=False)
    return outcome.passed


def reproduce_command(
    settings: ToolkitSettings,
    ids: Optional[List[str]] = None,
    list_only: bool = False,
) -> None:
    """Run the named experiments, or all of them; exit 3 when any check fails."""
    registry = get_experiment_registry()
    if list_only:
        list_experiments()
        return
    if not ids:
        console.print("[yellow]No experiment given.[/yellow] Available: " + ", ".join(registry.ids()))
        console.print("Run [bold]logpot reproduce all[/bold] to run every experiment.")
        raise typer.Exit(EXIT_PRECONDITION)

    selected = registry.ids() if ids == ["all"] else ids
    unknown = [i for i in selected if registry.get(i) is None]
    if unknown:
        console.print(f"[red]Error:[/red] unknown experiment(s): {', '.join(unknown)}")
        console.print("Available: " + ", ".join(registry.ids()))
        raise typer.Exit(EXIT_PRECONDITION)

    failed: List[str] = []
    for experiment_id in selected:
        experiment = registry.get(experiment_id)
        assert experiment is not None
        with guarded():
            if not run_experiment(experiment, settings):
                failed.append(experiment_id)

    if failed:
        console.print(f"[red]✗ Failed:[/red] {', '.join(failed)}")
        raise typer.Exit(EXIT_VERDICT)
    console.print(f"[green]✓ All {len(selected)} experiment(s) passed[/green]")
