"""Arc length on the unit circle: the Bergman maximum in closed form."""

import logging
import math

from ..bergman import RatioKind, TrendClass, ratio_sweep, ratio_trend
from ..config import ToolkitSettings
from . import scenes
from .base import CriterionResult, Experiment, ExperimentOutcome

logger = logging.getLogger(__name__)


class CircleBergmanExperiment(Experiment):
    """``max_K B_k = (k+1)/(2 pi)`` for ``(unit circle, ds)``."""

    k_max = 50
    resolution = 256

    @property
    def id(self) -> str:
        return "ex1a"

    @property
    def title(self) -> str:
        return "Unit circle with arc length: Bergman maximum (k+1)/(2 pi)"

    @property
    def description(self) -> str:
        return "Polynomial ratios for k <= 50 against the closed form, and their trend."

    def run(self, settings: ToolkitSettings) -> ExperimentOutcome:
        ws = scenes.load(settings, scenes.circle(), self.resolution, scenes.arclength())
        mu = ws.require_measure()
        ks = list(range(1, self.k_max + 1))
        rows = ratio_sweep(RatioKind.POLY, ws.K, mu, ks, max_workers=settings.max_workers)

        table = []
        worst = 0.0
        for row in rows:
            expected = (row.k + 1) / (2.0 * math.pi)
            error = abs(row.ratio**2 - expected) / expected
            worst = max(worst, error)
            table.append(
                row.to_dict()
                | {"expected_root": expected ** (1.0 / (2 * row.k)), "relative_error": error}
            )
        trend = ratio_trend(
            [row.ratio for row in rows],
            ks,
            confidence=settings.tolerances.trend_confidence,
            min_slope=settings.tolerances.trend_min_slope,
        )
        logger.info("ex1a: worst relative error of max B_k is %.2e", worst)
        return ExperimentOutcome(
            results={"trend": trend.to_dict(), "max_relative_error": worst},
            tables={"ratios": table},
            criteria=[
                CriterionResult.check(
                    "bergman_closed_form",
                    worst <= 1e-6,
                    f"max relative error {worst:.2e} for k <= {self.k_max}",
                    worst,
                ),
                CriterionResult.check(
                    "polynomial_trend_consistent",
                    trend.classification is TrendClass.CONSISTENT,
                    trend.classification.value,
                ),
            ],
        )
