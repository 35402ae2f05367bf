"""Arc length on the inner circle of an annulus: sub-diagonal yes, polynomial no."""

import logging
import math

import numpy as np

from ..bergman import RatioKind, TrendClass, ratio_sweep, ratio_trend
from ..config import ToolkitSettings
from ..geometry import SetDiscretization
from ..measures import DiscreteMeasure, l2_norm
from . import scenes
from .base import CriterionResult, Experiment, ExperimentOutcome

logger = logging.getLogger(__name__)


class InnerCircleExperiment(Experiment):
    """``K`` the annulus boundary, ``mu = ds`` on ``|z| = 1/2``, ``P = {0}``."""

    k_max = 40
    resolution = 512

    @property
    def id(self) -> str:
        return "ex1c"

    @property
    def title(self) -> str:
        return "Annulus boundary, ds on the inner circle: z^k breaks the polynomial property"

    def _identity(self, K: SetDiscretization, mu: DiscreteMeasure) -> float:
        """Worst relative error of the z^k ratio root against its closed form."""
        worst = 0.0
        for k in range(1, self.k_max + 1):
            sup = float(np.max(np.abs(K.boundary_nodes**k)))
            root = (sup / l2_norm(mu, mu.atoms**k)) ** (1.0 / k)
            expected = 2.0 * math.pi ** (-1.0 / (2 * k))
            worst = max(worst, abs(root - expected) / expected)
        return worst

    def run(self, settings: ToolkitSettings) -> ExperimentOutcome:
        ws = scenes.load(
            settings, scenes.annulus(), self.resolution, scenes.arclength(0.5), scenes.origin()
        )
        mu, P = ws.require_measure(), ws.require_poles()
        ks = list(range(1, self.k_max + 1))
        identity_error = self._identity(ws.K, mu)

        tolerances = settings.tolerances
        poly = ratio_sweep(RatioKind.POLY, ws.K, mu, ks, max_workers=settings.max_workers)
        subdiag = ratio_sweep(RatioKind.SUBDIAG, ws.K, mu, ks, P, max_workers=settings.max_workers)
        poly_trend = ratio_trend(
            [r.ratio for r in poly], ks, tolerances.trend_confidence, tolerances.trend_min_slope
        )
        subdiag_trend = ratio_trend(
            [r.ratio for r in subdiag], ks, tolerances.trend_confidence, tolerances.trend_min_slope
        )
        logger.info(
            "ex1c: polynomial %s, sub-diagonal %s",
            poly_trend.classification.value,
            subdiag_trend.classification.value,
        )
        table = [
            {"k": p.k, "poly_root": p.root, "subdiag_root": s.root, "z_k_root": 2.0 * math.pi ** (-1.0 / (2 * p.k))}
            for p, s in zip(poly, subdiag)
        ]
        return ExperimentOutcome(
            results={
                "z_k_identity_error": identity_error,
                "poly_trend": poly_trend.to_dict(),
                "subdiag_trend": subdiag_trend.to_dict(),
            },
            tables={"ratios": table},
            criteria=[
                CriterionResult.check(
                    "z_k_identity",
                    identity_error <= 1e-8,
                    f"max relative error {identity_error:.2e} against 2 pi^(-1/2k)",
                    identity_error,
                ),
                CriterionResult.check(
                    "polynomial_trend_violates",
                    poly_trend.classification is TrendClass.VIOLATES,
                    poly_trend.classification.value,
                    poly_trend.slope,
                ),
                CriterionResult.check(
                    "subdiagonal_trend_consistent",
                    subdiag_trend.classification is TrendClass.CONSISTENT,
                    subdiag_trend.classification.value,
                    subdiag_trend.slope,
                ),
            ],
        )
