"""Lambda* and separating-map commands."""

import logging
import time
from pathlib import Path
from typing import Dict, List, Optional

import typer

from ..config import ToolkitSettings
from ..criteria import (
    LambdaStarReport,
    Verdict,
    hull_inheritance,
    lambda_star_check,
    mapped_lambda_star,
    separating_map_build,
    separating_map_from_poles,
)
from ..errors import SeparationError
from ..reports import Row
from .common import (
    EXIT_VERDICT,
    build_report,
    console,
    emit,
    finish,
    guarded,
    load_workspace,
    parse_floats,
    parse_point,
    pass_fail,
)

logger = logging.getLogger(__name__)

DEFAULT_SCHEDULE = "0.2,0.1,0.05,0.02"


def _summary(label: str, report: LambdaStarReport) -> None:
    style = {Verdict.PASSES: "green", Verdict.FAILS: "red"}.get(report.verdict, "yellow")
    ratio = report.cap_Ar[-1] / report.cap_K if report.cap_K else 0.0
    console.print(f"{label}: cap(A_r)/cap(K) = {ratio:.4f} at r={report.schedule[-1]:g} -> [{style}]{report.verdict.value}[/{style}]")
    if not report.strict_agrees and report.strict_verdict is not None:
        console.print(
            f"  strict threshold r^t: [yellow]{report.strict_verdict.value}[/yellow] "
            f"(|A_r| = {report.strict_subset_sizes[-1]} against {report.subset_sizes[-1]} with slack {report.mass_rtol:g})"
        )


def lambda_star_command(
    scene_path: Path,
    settings: ToolkitSettings,
    t: float,
    schedule: str = DEFAULT_SCHEDULE,
    mapped: bool = False,
    rho: float = 0.1,
    m_max: int = 8,
    delta: float = 0.1,
) -> None:
    """Check the mass-density criterion on ``K``, optionally also through a separating map."""
    started = time.perf_counter()
    with guarded():
        radii = parse_floats(schedule)
        ws = load_workspace(scene_path, settings)
        settings = ws.settings
        tol = settings.tolerances
        mu = ws.require_measure()
        plain = lambda_star_check(
            ws.K,
            mu,
            t,
            radii,
            k_max=settings.k_max,
            pass_rtol=tol.lambda_pass,
            fail_rtol=tol.lambda_fail,
            mass_rtol=tol.mass_rtol,
            max_workers=settings.max_workers,
        )
        mapped_report = None
        if mapped:
            mapped_report = mapped_lambda_star(
                ws.K,
                mu,
                ws.require_poles(),
                t,
                radii,
                rho=rho,
                m_max=m_max,
                delta=delta,
                k_max=settings.k_max,
                pass_rtol=tol.lambda_pass,
                fail_rtol=tol.lambda_fail,
                mass_rtol=tol.mass_rtol,
                max_workers=settings.max_workers,
            )

    _summary("Lambda*", plain)
    results: Dict[str, object] = {"lambda_star": plain.to_dict()}
    tables: Dict[str, List[Row]] = {"lambda_star": plain.table()}
    verdicts = {"lambda_star": plain.verdict.value}
    if mapped_report is not None:
        _summary("Mapped subsets", mapped_report.mapped_subset_report)
        _summary("Image", mapped_report.image_report)
        results["mapped"] = mapped_report.to_dict()
        tables["mapped_subsets"] = mapped_report.mapped_subset_report.table()
        tables["image"] = mapped_report.image_report.table()
        verdicts["mapped_lambda_star"] = mapped_report.mapped_subset_report.verdict.value

    report = build_report(
        "lambda-star",
        settings,
        {"t": t, "schedule": radii, "mapped": mapped, "rho": rho, "m_max": m_max, "delta": delta},
        ws.scene.canonical(),
        results=results,
        tables=tables,
        verdicts=verdicts,
    )
    finish(report, settings, started, show_tables=["lambda_star"])


def build_map_command(
    scene_path: Path,
    settings: ToolkitSettings,
    rho: float,
    m_max: int,
    eps: float = 0.05,
    poles: Optional[List[str]] = None,
) -> None:
    """Search for ``f = 1/q_m`` with ``max_K |f| < R1 < min_P |f|`` and certify it.

    With ``poles`` the given pole choice is certified instead of searched.
    """
    started = time.perf_counter()
    with guarded():
        ws = load_workspace(scene_path, settings)
        settings = ws.settings
        P = ws.require_poles()
        inheritance = hull_inheritance(ws.K, P)
        parameters = {"rho": rho, "m_max": m_max, "eps": eps, "poles": poles or []}
        try:
            if poles:
                f = separating_map_from_poles(ws.K, P, [parse_point(p) for p in poles])
            else:
                f = separating_map_build(ws.K, P, rho, m_max, eps)
        except SeparationError as e:
            console.print(f"[red]No separating map:[/red] {e}")
            report = build_report(
                "build-map",
                settings,
                parameters,
                ws.scene.canonical(),
                results={"best_margin": e.best_margin, "best_m": e.best_m, "hull_inheritance": inheritance.to_dict()},
                verdicts={"separating_map": "fail"},
            )
            emit(report, settings, started)
            raise typer.Exit(EXIT_VERDICT)

    console.print(
        f"m = [bold]{f.m}[/bold]: max_K|f| = {f.max_K:.6g} < R1 = {f.R1:.6g} < min_P|f| = {f.min_P:.6g}"
    )
    if inheritance.inherited:
        console.print("[dim]P avoids the polynomial hull of K; the rational property follows from the polynomial one[/dim]")
    report = build_report(
        "build-map",
        settings,
        parameters,
        ws.scene.canonical(),
        results={"map": f.to_dict(), "hull_inheritance": inheritance.to_dict()},
        tables={"search": f.trace},
        verdicts={"separating_map": pass_fail(f.sandwich_holds)},
    )
    finish(report, settings, started, show_tables=["search"])
