"""Mass density for a measure whose ball masses vanish to infinite order at -1."""

import logging
import math
from typing import Dict, List

import numpy as np
from scipy import integrate, optimize

from ..config import ToolkitSettings
from ..criteria import Verdict, lambda_star_check, mapped_lambda_star, separating_map_from_poles
from ..measures import BumpMeasureSpec, bump_density
from . import scenes
from .base import CriterionResult, Experiment, ExperimentOutcome

logger = logging.getLogger(__name__)


def _density(theta: float) -> float:
    return float(bump_density(np.array([complex(math.cos(theta), math.sin(theta))]), 0j)[0])


def exact_ball_mass(theta: float, r: float) -> float:
    """Mass of the disk of radius ``r`` about ``e^(i theta)`` under the bump density."""
    half = 2.0 * math.asin(r / 2.0)
    value, _ = integrate.quad(_density, theta - half, theta + half, limit=200)
    return float(value)


def arc_oracle(r: float, t: float) -> float:
    """Capacity ``sin(theta*/2)`` of the arc ``|arg z| <= theta*`` where the mass reaches ``r^t``."""
    threshold = r**t
    if exact_ball_mass(0.0, r) < threshold:
        return 0.0
    upper = math.pi - 2.0 * math.asin(r / 2.0)
    if exact_ball_mass(upper, r) >= threshold:
        return 1.0
    theta = optimize.brentq(lambda x: exact_ball_mass(x, r) - threshold, 0.0, upper, xtol=1e-12)
    return math.sin(theta / 2.0)


def complement_arc_bound(r: float) -> float:
    """Capacity of the unit circle minus the arc inside ``B(-1, r)``."""
    return math.sin((2.0 * math.pi - 4.0 * math.asin(r / 2.0)) / 4.0)


class BumpDensityExperiment(Experiment):
    """``K`` the unit circle, ``mu = exp(-1/(1-(theta/pi)^2)) ds``.

    With ``t = 1`` no ball is heavy enough (the density never exceeds
    ``1/e``), so that case is measured only; ``t = 3`` is compared against
    the exact arc capacities.
    """

    resolution = 2048
    schedule = (0.2, 0.1, 0.05, 0.02, 0.01)
    t = 3.0
    k_max = 200
    oracle_rtol = 0.03
    pole = 0.01

    @property
    def id(self) -> str:
        return "ex3"

    @property
    def title(self) -> str:
        return "Unit circle with a flat bump density: Lambda* against the arc capacities"

    def run(self, settings: ToolkitSettings) -> ExperimentOutcome:
        ws = scenes.load(
            settings,
            scenes.circle(),
            self.resolution,
            BumpMeasureSpec(),
            scenes.origin(),
        )
        K, mu, P = ws.K, ws.require_measure(), ws.require_poles()
        tol = settings.tolerances
        schedule = list(self.schedule)
        at_one, report = (
            lambda_star_check(
                K,
                mu,
                t,
                schedule,
                k_max=self.k_max,
                pass_rtol=tol.lambda_pass,
                fail_rtol=tol.lambda_fail,
                mass_rtol=tol.mass_rtol,
                max_workers=settings.max_workers,
            )
            for t in (1.0, self.t)
        )

        table: List[Dict[str, float]] = []
        worst = 0.0
        for r, cap in zip(report.schedule, report.cap_Ar):
            oracle = arc_oracle(r, self.t)
            error = abs(cap - oracle) / oracle if oracle else math.inf
            worst = max(worst, error)
            table.append(
                {
                    "r": r,
                    "cap_Ar": cap,
                    "oracle": oracle,
                    "relative_error": error,
                    "complement_arc_bound": complement_arc_bound(r),
                }
            )

        f = separating_map_from_poles(K, P, [self.pole])
        mapped = mapped_lambda_star(
            K,
            mu,
            P,
            self.t,
            schedule,
            separating_map=f,
            k_max=self.k_max,
            pass_rtol=tol.lambda_pass,
            fail_rtol=tol.lambda_fail,
            mass_rtol=tol.mass_rtol,
            max_workers=settings.max_workers,
        )
        logger.info("ex3: t=%g %s, worst oracle error %.3f", self.t, report.verdict.value, worst)

        return ExperimentOutcome(
            results={
                "t_one": at_one.to_dict(),
                "lambda_star": report.to_dict(),
                "mapped": mapped.to_dict(),
                "max_oracle_error": worst,
            },
            tables={"arcs": table, "t_one": at_one.table(), "mapped_subsets": mapped.mapped_subset_report.table()},
            criteria=[
                CriterionResult.measured(
                    "lambda_star_t1",
                    f"{at_one.verdict.value}; largest density set has {max(at_one.subset_sizes)} nodes",
                    at_one.cap_Ar[-1],
                ),
                CriterionResult.check(
                    "lambda_star_t3_passes",
                    report.verdict is Verdict.PASSES,
                    report.verdict.value,
                    report.cap_Ar[-1] / report.cap_K,
                ),
                CriterionResult.check(
                    "arc_oracle",
                    worst <= self.oracle_rtol,
                    f"max relative error {worst:.4f} against sin(theta*/2)",
                    worst,
                ),
                CriterionResult.check(
                    "mapped_lambda_star_passes",
                    mapped.mapped_subset_report.verdict is Verdict.PASSES,
                    f"f(z) = 1/(z - {self.pole})",
                ),
                CriterionResult.measured(
                    "image_lambda_star",
                    mapped.image_report.verdict.value,
                ),
            ],
        )
