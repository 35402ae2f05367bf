"""Main CLI entry point for logpot."""

import logging
from pathlib import Path
from typing import List, Optional

import typer
from pydantic import ValidationError
from rich.console import Console
from rich.logging import RichHandler

from logpot import __version__
from logpot.bergman import RatioKind
from logpot.commands import (
    bergman_command,
    build_map_command,
    bw_rate_command,
    capacity_command,
    green_command,
    lambda_star_command,
    leja_command,
    ratio_command,
    reproduce_command,
)
from logpot.commands.common import EXIT_PRECONDITION, current_settings
from logpot.commands.criteria import DEFAULT_SCHEDULE
from logpot.config import get_settings

console = Console()

app = typer.Typer(
    name="logpot",
    help="""Logarithmic potential toolkit - numerical checks of Bernstein-Markov properties

Every command but reproduce reads a [bold]--scene[/bold] file (JSON: the set K, optional pole set P
and a measure) and writes [bold]out/<command>-<hash>.json[/bold] plus CSV tables.

Exit codes: [green]0[/green] success, [red]2[/red] rejected input, [yellow]3[/yellow] failed or inconclusive verdict.""",
    no_args_is_help=True,
    rich_markup_mode="rich",
    add_completion=False,
    pretty_exceptions_show_locals=False,
)


def setup_logging(verbose: bool = False) -> None:
    """Configure logging for the application.

    Args:
        verbose: If True, set logging level to DEBUG
    """
    level = logging.DEBUG if verbose else logging.INFO

    logging.basicConfig(
        level=level,
        format="%(message)s",
        datefmt="[%X]",
        handlers=[
            RichHandler(
                console=console,
                rich_tracebacks=True,
                tracebacks_show_locals=verbose,
            )
        ],
        force=True,
    )

    # Keep numerical chatter of the sweeps out of normal runs
    if not verbose:
        logging.getLogger("logpot.potential").setLevel(logging.WARNING)
        logging.getLogger("logpot.meromorphic").setLevel(logging.WARNING)


# Global verbose option
verbose_option = typer.Option(
    False,
    "--verbose",
    "-v",
    help="Enable verbose output",
)

scene_option = typer.Option(
    ...,
    "--scene",
    "-s",
    help="Scene file (JSON)",
    exists=True,
    file_okay=True,
    dir_okay=False,
    readable=True,
)


def version_callback(value: bool) -> None:
    if value:
        console.print(f"logpot version {__version__}")
        raise typer.Exit()


@app.callback()
def main(
    ctx: typer.Context,
    seed: Optional[int] = typer.Option(None, "--seed", help="Seed for every stochastic choice"),
    resolution: Optional[int] = typer.Option(None, "--resolution", help="Nodes per curve piece"),
    tol: Optional[float] = typer.Option(None, "--tol", help="Green-function tolerance"),
    output_dir: Optional[Path] = typer.Option(None, "--output-dir", "-o", help="Directory for reports"),
    version: Optional[bool] = typer.Option(
        None,
        "--version",
        callback=version_callback,
        is_eager=True,
        help="Show the version and exit",
    ),
) -> None:
    """Global options shared by every command; a scene's own values override them."""
    try:
        ctx.obj = get_settings().with_overrides(
            seed=seed, resolution=resolution, tol=tol, output_dir=output_dir
        )
    except ValidationError as e:
        first = e.errors()[0]
        console.print(f"[red]Error:[/red] --{first['loc'][0]}: {first['msg']}")
        raise typer.Exit(EXIT_PRECONDITION)


@app.command()
def capacity(
    ctx: typer.Context,
    scene: Path = scene_option,
    k_max: Optional[int] = typer.Option(None, "--kmax", "--k-max", "-k", help="Leja order (default from settings)"),
    refine: bool = typer.Option(False, "--refine", help="Refine each Leja point between its neighbors"),
    verbose: bool = verbose_option,
) -> None:
    """Estimate the logarithmic capacity of K.

    The k-th diameters of a Leja sequence are extrapolated and compared
    with the energy of the Leja counting measure.
    """
    setup_logging(verbose)
    capacity_command(scene, current_settings(ctx), k_max, refine)


@app.command()
def leja(
    ctx: typer.Context,
    scene: Path = scene_option,
    k: int = typer.Option(32, "--k", "-k", min=1, help="Number of Leja points"),
    refine: bool = typer.Option(False, "--refine", help="Refine each Leja point between its neighbors"),
    fekete_pool: int = typer.Option(
        0, "--fekete-pool", min=0, help="Also compare with exact Fekete points on this many pool nodes (at most 64)"
    ),
    verbose: bool = verbose_option,
) -> None:
    """List Leja points of K with their Vandermonde bookkeeping."""
    setup_logging(verbose)
    leja_command(scene, current_settings(ctx), k, refine, fekete_pool)


@app.command()
def green(
    ctx: typer.Context,
    scene: Path = scene_option,
    at: Optional[List[str]] = typer.Option(None, "--at", help="Evaluation point 'x,y' (repeatable)"),
    pole: Optional[str] = typer.Option(None, "--pole", help="Finite pole 'x,y' off K; default is infinity"),
    grid: int = typer.Option(11, "--grid", min=2, help="Grid size when no --at point is given"),
    verbose: bool = verbose_option,
) -> None:
    """Evaluate the Green function of the complement of K."""
    setup_logging(verbose)
    green_command(scene, current_settings(ctx), at, pole, grid)


@app.command()
def bergman(
    ctx: typer.Context,
    scene: Path = scene_option,
    k: int = typer.Option(..., "--k", "-k", min=0, help="Polynomial degree"),
    at: Optional[List[str]] = typer.Option(None, "--at", help="Extra evaluation point 'x,y' (repeatable)"),
    verbose: bool = verbose_option,
) -> None:
    """Bergman function B_k of the scene measure, with its Gram residual."""
    setup_logging(verbose)
    bergman_command(scene, current_settings(ctx), k, at)


@app.command()
def ratio(
    ctx: typer.Context,
    scene: Path = scene_option,
    kind: RatioKind = typer.Option(RatioKind.POLY, "--kind", help="Function class of the ratio"),
    k_max: int = typer.Option(30, "--k-max", min=1, help="Largest degree"),
    k_min: int = typer.Option(1, "--k-min", min=1, help="Smallest degree"),
    csv_path: Optional[Path] = typer.Option(
        None, "--csv", dir_okay=False, help="Also write (k, ratio, ratio^(1/k), witness_m) to this file"
    ),
    verbose: bool = verbose_option,
) -> None:
    """Sweep the sup-norm over L2-norm ratio in k and classify its growth.

    Kinds: [bold]poly[/bold] polynomials, [bold]weighted[/bold] weighted by the
    pole set, [bold]subdiag[/bold] p/q with deg p < deg q = k,
    [bold]rational[/bold] best over denominators of degree 0..k.

    A [bold]violates[/bold] trend is a measured answer and exits 0; only an
    [bold]inconclusive[/bold] trend exits 3.
    """
    setup_logging(verbose)
    ratio_command(scene, current_settings(ctx), kind, k_max, k_min, csv_path)


@app.command("lambda-star")
def lambda_star(
    ctx: typer.Context,
    scene: Path = scene_option,
    t: float = typer.Option(1.0, "--t", "-t", help="Density exponent"),
    schedule: str = typer.Option(DEFAULT_SCHEDULE, "--r-schedule", "--schedule", help="Decreasing radii, comma separated"),
    mapped: bool = typer.Option(False, "--mapped", help="Also run through a separating map (needs P)"),
    rho: float = typer.Option(0.1, "--rho", help="Pole offset from the hull of P when a map is built"),
    m_max: int = typer.Option(8, "--m-max", min=1, help="Largest map degree"),
    delta: float = typer.Option(0.1, "--delta", help="Neighborhood for the Lipschitz constant"),
    verbose: bool = verbose_option,
) -> None:
    """Check the mass-density criterion: cap(A_r,t) against cap(K)."""
    setup_logging(verbose)
    lambda_star_command(scene, current_settings(ctx), t, schedule, mapped, rho, m_max, delta)


@app.command("build-map")
def build_map(
    ctx: typer.Context,
    scene: Path = scene_option,
    rho: float = typer.Option(0.1, "--rho", help="Pole offset from the hull of P"),
    m_max: int = typer.Option(8, "--m-max", min=1, help="Largest map degree"),
    eps: float = typer.Option(0.05, "--eps", help="Margin required by the degree test"),
    poles: Optional[List[str]] = typer.Option(
        None, "--pole", help="Certify this pole 'x,y' instead of searching (repeatable)"
    ),
    verbose: bool = verbose_option,
) -> None:
    """Build and certify a separating map 1/q_m with max_K|f| < R1 < min_P|f|."""
    setup_logging(verbose)
    build_map_command(scene, current_settings(ctx), rho, m_max, eps, poles)


@app.command("bw-rate")
def bw_rate(
    ctx: typer.Context,
    scene: Path = scene_option,
    f: str = typer.Option(..., "--f", help="Function of z, e.g. '1/(z-2)' or 'exp(z)'"),
    n: int = typer.Option(0, "--n", min=0, help="Number of free poles"),
    k_max: int = typer.Option(30, "--k-max", min=4, help="Largest numerator degree"),
    barrier: Optional[float] = typer.Option(None, "--barrier", help="Minimal distance of free poles from K"),
    verbose: bool = verbose_option,
) -> None:
    """Decay rate of best L2 rational approximations of f against 1/r."""
    setup_logging(verbose)
    bw_rate_command(scene, current_settings(ctx), f, n, k_max, barrier)


@app.command()
def reproduce(
    ctx: typer.Context,
    ids: Optional[List[str]] = typer.Argument(None, help="Experiment ids (ex1a ... bw), or 'all'"),
    list_only: bool = typer.Option(False, "--list", "-l", help="List the experiments and exit"),
    verbose: bool = verbose_option,
) -> None:
    """Run pre-registered experiments and print pass/fail per check.

    Examples:
    - logpot reproduce --list
    - logpot reproduce ex1a ex1b
    - logpot reproduce all
    """
    setup_logging(verbose)
    reproduce_command(current_settings(ctx), ids, list_only)


if __name__ == "__main__":
    app()
