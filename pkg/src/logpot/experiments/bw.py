"""Overconvergence of best L2 approximations on the unit circle."""

import logging
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from ..config import ToolkitSettings
from ..expressions import parse_function
from ..measures import DiscreteMeasure
from ..meromorphic import DecayClass, RateReport, SearchConfig, fixed_pole_sweep, overconvergence_rate
from ..potential import equilibrium_measure
from . import scenes
from .base import CriterionResult, Experiment, ExperimentOutcome

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RateCase:
    """One function with its pole count, degree range and expected outcome."""

    name: str
    expression: str
    n: int
    k_max: int
    expected: DecayClass
    predicted_r: Optional[float] = None
    r_rtol: float = 0.0


CASES = (
    RateCase("pole_at_2", "1/(z-2)", 0, 30, DecayClass.GEOMETRIC, 2.0, 0.05),
    RateCase("poles_at_1.5_and_3", "1/((z-1.5)*(z-3))", 1, 20, DecayClass.GEOMETRIC, 3.0, 0.10),
    RateCase("entire", "exp(z)", 0, 16, DecayClass.SUPERLINEAR),
    RateCase("polynomial", "z^2 + 1", 0, 8, DecayClass.EXACT),
)


def oracle_rate(f: object, mu: DiscreteMeasure, ks: List[int], candidates: np.ndarray) -> float:
    """``1/r`` fitted from the best single pole on a real grid at every ``k``."""
    errors = [fixed_pole_sweep(f, mu, k, candidates)[1] for k in ks]  # type: ignore[arg-type]
    slope = float(np.polyfit(np.asarray(ks, dtype=np.float64), np.log(errors), 1)[0])
    return float(np.exp(slope))


class OverconvergenceExperiment(Experiment):
    """Decay rates of best approximations with ``n`` free poles against ``1/r``."""

    resolution = 256
    oracle_grid = np.linspace(1.05, 4.0, 60)
    oracle_orders = (8, 10, 12, 14)

    @property
    def id(self) -> str:
        return "bw"

    @property
    def title(self) -> str:
        return "Best L2 rational approximation on the unit circle: decay rate against 1/r"

    def run(self, settings: ToolkitSettings) -> ExperimentOutcome:
        ws = scenes.load(settings, scenes.circle(), self.resolution, scenes.arclength())
        K, mu = ws.K, ws.require_measure()
        G = equilibrium_measure(K, settings.green_order, settings.tol)
        gap = settings.tolerances.rate_gap

        outcome = ExperimentOutcome()
        for case in CASES:
            f = parse_function(case.expression)
            config = SearchConfig(singularities=tuple(f.singularities))
            report = overconvergence_rate(f, K, mu, case.n, case.k_max, config, G, rate_gap=gap)
            outcome.tables[case.name] = report.table()
            outcome.results[case.name] = report.to_dict()
            outcome.criteria.extend(self._judge(case, report, gap))
            if case.n == 1 and case.predicted_r is not None:
                outcome.criteria.extend(self._against_oracle(f, mu, report))
            logger.info("bw: %s -> %s", case.name, report.classification.value)
        return outcome

    def _judge(self, case: RateCase, report: RateReport, gap: float) -> List[CriterionResult]:
        checks = [
            CriterionResult.check(
                f"{case.name}_class",
                report.classification is case.expected,
                report.classification.value,
            )
        ]
        if case.predicted_r is not None:
            error = abs(report.predicted_r - case.predicted_r) / case.predicted_r
            checks.append(
                CriterionResult.check(
                    f"{case.name}_predicted_r",
                    error <= case.r_rtol,
                    f"predicted r = {report.predicted_r:.4f}, expected {case.predicted_r} +/- {case.r_rtol:.0%}",
                    report.predicted_r,
                )
            )
            checks.append(
                CriterionResult.check(
                    f"{case.name}_rate_gap",
                    report.rates_consistent,
                    f"L2 rate {report.rate_l2:.4f}, sup rate {report.rate_sup:.4f}, allowed gap {gap}",
                    abs(report.rate_l2 - report.rate_sup),
                )
            )
        return checks

    def _against_oracle(self, f: object, mu: DiscreteMeasure, report: RateReport) -> List[CriterionResult]:
        rate = oracle_rate(f, mu, list(self.oracle_orders), self.oracle_grid)
        oracle_r = 1.0 / rate
        found = report.results[-1].poles_found
        best_pole, _ = fixed_pole_sweep(f, mu, self.oracle_orders[-1], self.oracle_grid)  # type: ignore[arg-type]
        distance = float(np.min(np.abs(found - best_pole))) if found.size else float("inf")
        return [
            CriterionResult.check(
                "pole_grid_oracle_r",
                abs(report.predicted_r - oracle_r) <= 0.10 * oracle_r,
                f"search r = {report.predicted_r:.4f}, pole-grid r = {oracle_r:.4f}",
                oracle_r,
            ),
            CriterionResult.measured(
                "pole_grid_oracle_distance",
                f"found pole vs best grid pole {best_pole.real:.3f}",
                distance,
            ),
        ]
