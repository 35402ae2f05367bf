"""Capacity and Leja commands."""

import logging
import time
from pathlib import Path
from typing import Optional

import numpy as np

from ..config import ToolkitSettings
from ..potential import FEKETE_MAX_ORDER, capacity_estimate, fekete_points_exact, leja_points, vandermonde_product
from .common import build_report, console, finish, guarded, load_workspace

logger = logging.getLogger(__name__)


def capacity_command(
    scene_path: Path, settings: ToolkitSettings, k_max: Optional[int] = None, refine: bool = False
) -> None:
    """Estimate ``cap(K)`` from Leja k-th diameters, with the energy cross-check."""
    started = time.perf_counter()
    with guarded():
        ws = load_workspace(scene_path, settings)
        settings = ws.settings
        order = min(k_max or settings.k_max, ws.K.size)
        cap, diagnostics = capacity_estimate(
            ws.K,
            order,
            tail_fraction=settings.tail_fraction,
            disagreement=settings.tolerances.disagreement,
            refine=refine,
        )
    console.print(f"cap(K) ≈ [bold]{cap:.6g}[/bold] (energy check {diagnostics.energy_estimate:.6g})")
    if diagnostics.disagreement:
        console.print(f"[yellow]Estimators disagree by {100 * diagnostics.relative_gap:.1f}%[/yellow]")
    rows = [{"k": k, "delta_k": d} for k, d in enumerate(diagnostics.deltas, start=2)]
    report = build_report(
        "capacity",
        settings,
        {"k_max": order, "refine": refine},
        ws.scene.canonical(),
        results={"capacity": cap, "diagnostics": diagnostics.to_dict()},
        tables={"kth_diameters": rows},
    )
    finish(report, settings, started)


def leja_command(
    scene_path: Path,
    settings: ToolkitSettings,
    k: int,
    refine: bool = False,
    fekete_pool: int = 0,
) -> None:
    """List ``k`` Leja points of ``K``; optionally compare with exact Fekete points on a small pool."""
    started = time.perf_counter()
    with guarded():
        ws = load_workspace(scene_path, settings)
        settings = ws.settings
        leja = leja_points(ws.K, k, refine)
        fekete_rows = []
        if fekete_pool:
            pool = leja_points(ws.K, fekete_pool).points
            for order in range(2, min(k, FEKETE_MAX_ORDER) + 1):
                exact = vandermonde_product(fekete_points_exact(pool, order))
                fekete_rows.append(
                    {
                        "k": order,
                        "fekete_vandermonde": exact,
                        "fekete_delta": exact ** (2.0 / (order * (order - 1))),
                        "leja_vandermonde": vandermonde_product(leja.points[:order]),
                    }
                )
    rows = [
        {
            "j": j,
            "re": float(z.real),
            "im": float(z.imag),
            "log_product": float(leja.running_products[j]),
            "delta": float(leja.kth_diameters[j - 1]) if j >= 1 else float("nan"),
        }
        for j, z in enumerate(leja.points)
    ]
    tables = {"points": rows}
    if fekete_rows:
        tables["fekete"] = fekete_rows
    report = build_report(
        "leja",
        settings,
        {"k": k, "refine": refine, "fekete_pool": fekete_pool},
        ws.scene.canonical(),
        results={
            "k": len(leja),
            "last_kth_diameter": float(leja.kth_diameters[-1]) if leja.kth_diameters.size else None,
            "spread": float(np.max(np.abs(leja.points))),
        },
        tables=tables,
    )
    finish(report, settings, started, show_tables=["points"])
