"""Bergman function and Bernstein-Markov ratio commands."""

import time
from pathlib import Path
from typing import List, Optional

import numpy as np

from ..bergman import (
    RatioKind,
    TrendClass,
    WeightSpec,
    bergman_function,
    gram_residual,
    orthonormalize,
    ratio_sweep,
    ratio_trend,
)
from ..config import ToolkitSettings
from ..measures import DiscreteMeasure
from ..reports import write_table
from .common import build_report, console, finish, guarded, load_workspace, parse_point


def bergman_command(
    scene_path: Path,
    settings: ToolkitSettings,
    k: int,
    at: Optional[List[str]] = None,
) -> None:
    """Orthonormalize up to degree ``k`` and report ``B_k`` on ``K`` and at extra points."""
    started = time.perf_counter()
    with guarded():
        ws = load_workspace(scene_path, settings)
        settings = ws.settings
        mu = ws.require_measure()
        basis = orthonormalize(mu, k)
        on_K = np.asarray(bergman_function(basis, ws.K.boundary_nodes))
        points = [parse_point(p) for p in at or []]
        extra = np.asarray(bergman_function(basis, np.asarray(points, dtype=np.complex128))) if points else np.zeros(0)

    residual = gram_residual(basis)
    console.print(f"max_K B_{k} = [bold]{on_K.max():.8g}[/bold], Gram residual {residual:.2e}")
    rows = [{"re": float(z.real), "im": float(z.imag), "B_k": float(v)} for z, v in zip(points, extra)]
    report = build_report(
        "bergman",
        settings,
        {"k": k, "points": at or []},
        ws.scene.canonical(),
        results={
            "k": k,
            "max_on_K": float(on_K.max()),
            "min_on_K": float(on_K.min()),
            "gram_residual": residual,
            "total_mass": mu.total_mass,
        },
        tables={"points": rows} if rows else {},
    )
    finish(report, settings, started, show_tables=["points"])


def _pole_weight(P_nodes: np.ndarray) -> WeightSpec:
    """Probability weight spreading unit mass over the pole nodes."""
    return WeightSpec(DiscreteMeasure(P_nodes, np.full(P_nodes.size, 1.0 / P_nodes.size)))


def ratio_command(
    scene_path: Path,
    settings: ToolkitSettings,
    kind: RatioKind,
    k_max: int,
    k_min: int = 1,
    csv_path: Optional[Path] = None,
) -> None:
    """Sweep ``||f||_K / ||f||_mu`` over ``k`` for one function class and classify its trend.

    ``csv_path`` receives the ratio table in addition to the report tables.
    A violates trend is a measured outcome; only inconclusive exits 3.
    """
    started = time.perf_counter()
    with guarded():
        ws = load_workspace(scene_path, settings)
        settings = ws.settings
        mu = ws.require_measure()
        P = ws.require_poles() if kind in (RatioKind.SUBDIAG, RatioKind.RATIONAL) else None
        weight = _pole_weight(ws.require_poles().boundary_nodes) if kind is RatioKind.WEIGHTED else None
        ks = list(range(k_min, k_max + 1))
        rows = ratio_sweep(kind, ws.K, mu, ks, P, weight, max_workers=settings.max_workers)
        trend = ratio_trend(
            [row.ratio for row in rows],
            ks,
            confidence=settings.tolerances.trend_confidence,
            min_slope=settings.tolerances.trend_min_slope,
        )

    style = "green" if trend.classification is TrendClass.CONSISTENT else "yellow"
    console.print(f"Trend: [{style}]{trend.classification.value}[/{style}] (slope {trend.slope:.4g})")
    if csv_path is not None:
        write_table(csv_path, [row.to_dict() for row in rows])
        console.print(f"Ratio table written to [bold]{csv_path}[/bold]")
    report = build_report(
        "ratio",
        settings,
        {"kind": kind.value, "k_min": k_min, "k_max": k_max},
        ws.scene.canonical(),
        results={"trend": trend.to_dict(), "last_root": rows[-1].root},
        tables={"ratios": [row.to_dict() for row in rows]},
        verdicts={"trend": trend.classification.value},
    )
    finish(report, settings, started, show_tables=["ratios"])
