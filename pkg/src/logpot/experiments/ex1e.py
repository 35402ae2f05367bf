"""Two concentric circles with half arc length on each: the rational property holds."""

import logging
import math

from ..bergman import RatioKind, TrendClass, ratio_sweep, ratio_trend
from ..config import ToolkitSettings
from . import scenes
from .base import CriterionResult, Experiment, ExperimentOutcome

logger = logging.getLogger(__name__)


def two_circle_bound(k: int) -> float:
    """``((4^(k+1) - 1) / (3 pi))^(1/(2k))``, which dominates the ratio root."""
    return ((4.0 ** (k + 1) - 1.0) / (3.0 * math.pi)) ** (1.0 / (2 * k))


class TwoCirclesExperiment(Experiment):
    """``K = {|z| = 1} u {|z| = 1/2}``, ``mu = 1/2 ds + 1/2 ds``, ``P = {0}``."""

    k_max = 30
    resolution = 512

    @property
    def id(self) -> str:
        return "ex1e"

    @property
    def title(self) -> str:
        return "Two circles with half arc length each: rational ratio stays below its bound"

    def run(self, settings: ToolkitSettings) -> ExperimentOutcome:
        ws = scenes.load(
            settings, scenes.two_circles(), self.resolution, scenes.half_and_half(), scenes.origin()
        )
        mu, P = ws.require_measure(), ws.require_poles()
        ks = list(range(1, self.k_max + 1))
        rows = ratio_sweep(RatioKind.RATIONAL, ws.K, mu, ks, P, max_workers=settings.max_workers)
        table = [row.to_dict() | {"bound": two_circle_bound(row.k)} for row in rows]
        violations = [row.k for row in rows if row.root > two_circle_bound(row.k)]
        trend = ratio_trend(
            [row.ratio for row in rows],
            ks,
            confidence=settings.tolerances.trend_confidence,
            min_slope=settings.tolerances.trend_min_slope,
        )
        logger.info("ex1e: %d bound violation(s), trend %s", len(violations), trend.classification.value)
        return ExperimentOutcome(
            results={"trend": trend.to_dict(), "violations": violations},
            tables={"ratios": table},
            criteria=[
                CriterionResult.check(
                    "ratio_below_bound",
                    not violations,
                    f"ratio^(1/k) <= ((4^(k+1)-1)/(3 pi))^(1/2k) for k <= {self.k_max}"
                    + (f"; violated at k={violations}" if violations else ""),
                ),
                CriterionResult.check(
                    "rational_trend_consistent",
                    trend.classification is TrendClass.CONSISTENT,
                    trend.classification.value,
                    trend.slope,
                ),
            ],
        )
