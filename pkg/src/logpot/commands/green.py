"""Green function command."""

import time
from pathlib import Path
from typing import List, Optional

import numpy as np

from ..config import ToolkitSettings
from ..errors import PreconditionError
from ..geometry import ComplexArray, SetDiscretization
from ..potential import equilibrium_measure, green_infinity, green_pole
from .common import build_report, console, finish, guarded, load_workspace, parse_point


def _lattice(K: SetDiscretization, n: int) -> ComplexArray:
    """``n x n`` grid over the bounding box of ``K`` enlarged by half its size."""
    z = K.boundary_nodes
    pad = 0.5 * max(K.extent, 1e-3)
    xs = np.linspace(z.real.min() - pad, z.real.max() + pad, n)
    ys = np.linspace(z.imag.min() - pad, z.imag.max() + pad, n)
    X, Y = np.meshgrid(xs, ys)
    return (X + 1j * Y).ravel()


def green_command(
    scene_path: Path,
    settings: ToolkitSettings,
    at: Optional[List[str]] = None,
    pole: Optional[str] = None,
    grid: int = 11,
) -> None:
    """Evaluate ``g_K(z, inf)``, or ``g_K(z, a)`` with ``--pole``, at points or on a grid."""
    started = time.perf_counter()
    with guarded():
        ws = load_workspace(scene_path, settings)
        settings = ws.settings
        points = (
            np.asarray([parse_point(p) for p in at], dtype=np.complex128)
            if at
            else _lattice(ws.K, grid)
        )
        G = equilibrium_measure(ws.K, settings.green_order, settings.tol, settings.tail_fraction)
        if pole is None:
            values = np.asarray(green_infinity(G, points))
        else:
            a = parse_point(pole)
            keep = points != a
            if not keep.any():
                raise PreconditionError("every evaluation point coincides with the pole")
            points = points[keep]
            values = np.asarray(green_pole(ws.K, a, points, settings.green_order, settings.tol))

    if not G.regular_flag:
        console.print("[yellow]Green field is not flagged regular; values near K are unreliable[/yellow]")
    rows = [{"re": float(z.real), "im": float(z.imag), "green": float(v)} for z, v in zip(points, values)]
    report = build_report(
        "green",
        settings,
        {"pole": pole, "points": at or [], "grid": grid if not at else None},
        ws.scene.canonical(),
        results={
            "capacity": G.capacity,
            "regular": G.regular_flag,
            "boundary_deviation": G.boundary_deviation,
            "order": len(G.leja),
            "max_value": float(values.max()) if values.size else 0.0,
        },
        tables={"values": rows},
    )
    finish(report, settings, started, show_tables=["values"] if at else [])
