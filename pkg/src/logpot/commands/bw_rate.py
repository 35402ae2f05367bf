"""Overconvergence rate command."""

import time
from pathlib import Path
from typing import Optional

from ..config import ToolkitSettings
from ..expressions import parse_function
from ..meromorphic import SearchConfig, overconvergence_rate
from ..potential import equilibrium_measure
from .common import build_report, console, finish, guarded, load_workspace, pass_fail


def bw_rate_command(
    scene_path: Path,
    settings: ToolkitSettings,
    f_text: str,
    n: int,
    k_max: int,
    barrier: Optional[float] = None,
) -> None:
    """Decay of best L2 approximations with ``n`` free poles, against the predicted ``1/r``."""
    started = time.perf_counter()
    with guarded():
        f = parse_function(f_text)
        ws = load_workspace(scene_path, settings)
        settings = ws.settings
        mu = ws.require_measure()
        G = equilibrium_measure(ws.K, settings.green_order, settings.tol, settings.tail_fraction)
        config = SearchConfig(barrier=barrier, singularities=tuple(f.singularities))
        with console.status(f"Fitting k = {max(n, 1)}..{k_max} with n = {n}"):
            rate = overconvergence_rate(
                f, ws.K, mu, n, k_max, config, G, rate_gap=settings.tolerances.rate_gap
            )

    console.print(
        f"{f_text}: [bold]{rate.classification.value}[/bold] decay, "
        f"L2 rate {rate.rate_l2:.4f}, sup rate {rate.rate_sup:.4f}, predicted r = {rate.predicted_r:.4g}"
    )
    report = build_report(
        "bw-rate",
        settings,
        {"f": f_text, "n": n, "k_max": k_max, "barrier": barrier},
        ws.scene.canonical(),
        results=rate.to_dict(),
        tables={"errors": rate.table()},
        verdicts={"rates_consistent": pass_fail(rate.rates_consistent)},
    )
    finish(report, settings, started, show_tables=["errors"])
