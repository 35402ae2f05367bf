"""Arc length on the outer circle of an annulus: no sub-diagonal property."""

import logging
import math

import numpy as np

from ..bergman import RatioKind, ratio_sweep, ratio_trend
from ..config import ToolkitSettings
from ..measures import l2_norm
from . import scenes
from .base import CriterionResult, Experiment, ExperimentOutcome

logger = logging.getLogger(__name__)


class OuterCircleExperiment(Experiment):
    """``K`` the annulus boundary, ``mu = ds`` on ``|z| = 1``, ``P = {0}``.

    ``z^-k`` has ``||z^-k||_K = 2^k`` but unit-order L2 norm, so the rational
    ratio grows like ``2^k``.
    """

    k_max = 20
    resolution = 512
    threshold = 1.9

    @property
    def id(self) -> str:
        return "ex1b"

    @property
    def title(self) -> str:
        return "Annulus boundary, ds on the outer circle: rational ratio grows like 2^k"

    def run(self, settings: ToolkitSettings) -> ExperimentOutcome:
        ws = scenes.load(
            settings, scenes.annulus(), self.resolution, scenes.arclength(1.0), scenes.origin()
        )
        mu, P = ws.require_measure(), ws.require_poles()
        ks = list(range(1, self.k_max + 1))
        rows = ratio_sweep(RatioKind.RATIONAL, ws.K, mu, ks, P, max_workers=settings.max_workers)
        last = rows[-1]

        k = self.k_max
        witness_sup = float(np.max(np.abs(ws.K.boundary_nodes ** (-k))))
        witness_root = (witness_sup / l2_norm(mu, mu.atoms ** (-k))) ** (1.0 / k)
        closed_form = 2.0 * (2.0 * math.pi) ** (-1.0 / (2 * k))
        trend = ratio_trend(
            [row.ratio for row in rows],
            ks,
            confidence=settings.tolerances.trend_confidence,
            min_slope=settings.tolerances.trend_min_slope,
        )
        logger.info("ex1b: rational ratio root %.4f at k=%d (witness m=%d)", last.root, k, last.witness_m)
        return ExperimentOutcome(
            results={
                "ratio_root": last.root,
                "witness_m": last.witness_m,
                "z_minus_k_root": witness_root,
                "z_minus_k_closed_form": closed_form,
                "trend": trend.to_dict(),
            },
            tables={"ratios": [row.to_dict() for row in rows]},
            criteria=[
                CriterionResult.check(
                    "rational_ratio_root",
                    last.root >= self.threshold,
                    f"ratio^(1/k) = {last.root:.4f} at k={k}, threshold {self.threshold}",
                    last.root,
                ),
                CriterionResult.check(
                    "witness_multiplicity",
                    last.witness_m == k,
                    f"maximizing denominator degree m={last.witness_m}",
                    float(last.witness_m),
                ),
                CriterionResult.check(
                    "z_minus_k_identity",
                    abs(witness_root - closed_form) <= 1e-8 * closed_form,
                    f"{witness_root:.10f} vs 2(2 pi)^(-1/2k) = {closed_form:.10f}",
                    witness_root,
                ),
                CriterionResult.measured("rational_trend", trend.classification.value, trend.slope),
            ],
        )
