"""Mass density on the annulus boundary and the separating map ``1/(z^2 - 0.01)``."""

import logging
from typing import List

import numpy as np

from ..config import ToolkitSettings
from ..criteria import (
    Verdict,
    hull_inheritance,
    lambda_star_check,
    mapped_lambda_star,
    separating_map_build,
    separating_map_from_poles,
)
from . import scenes
from .base import CriterionResult, Experiment, ExperimentOutcome

logger = logging.getLogger(__name__)


def lipschitz_closed_form(delta: float) -> float:
    """``4(1 - 2 delta) / (1 - 4 delta)``."""
    return 4.0 * (1.0 - 2.0 * delta) / (1.0 - 4.0 * delta)


def lipschitz_checks(
    measured: float, closed_form: float, delta: float, capacity_bound_holds: bool, rtol: float
) -> List[CriterionResult]:
    """Judge the Lipschitz constant of the map on the delta-neighborhood.

    The closed form passes only if it dominates the measured ``max |f'|``;
    ``cap f(K) <= L cap K`` is checked with the measured ``L``.
    """
    return [
        CriterionResult.check(
            "lipschitz_capacity_bound",
            capacity_bound_holds,
            f"cap f(K) <= L cap K with measured L = {measured:.6g}",
            measured,
        ),
        CriterionResult.check(
            "lipschitz_closed_form_dominates",
            measured <= closed_form * (1.0 + rtol),
            f"4(1-2d)/(1-4d) = {closed_form:.6g} against max |f'| = {measured:.6g} at d={delta}",
            closed_form,
        ),
    ]


class AnnulusDensityExperiment(Experiment):
    """``K`` the annulus boundary, ``mu = 1/2 ds + 1/2 ds``, ``P = {0}``, ``t = 1``.

    Every ball of radius ``r < 1/2`` about a point of ``K`` carries mass
    about ``r``, so ``A_{r,1} = K`` along the whole schedule.
    """

    resolution = 4096
    schedule = (0.4, 0.2, 0.1, 0.05)
    explicit_poles = (0.1, -0.1)
    delta = 0.1
    rho = 0.1
    m_max = 4

    @property
    def id(self) -> str:
        return "ex2"

    @property
    def title(self) -> str:
        return "Annulus boundary: Lambda* with t = 1 and the map 1/(z^2 - 0.01)"

    def run(self, settings: ToolkitSettings) -> ExperimentOutcome:
        ws = scenes.load(
            settings, scenes.annulus(), self.resolution, scenes.half_and_half(), scenes.origin()
        )
        K, mu, P = ws.K, ws.require_measure(), ws.require_poles()
        tol = settings.tolerances
        plain = lambda_star_check(
            K,
            mu,
            1.0,
            list(self.schedule),
            k_max=settings.k_max,
            pass_rtol=tol.lambda_pass,
            fail_rtol=tol.lambda_fail,
            mass_rtol=tol.mass_rtol,
            max_workers=settings.max_workers,
        )
        full = all(size == K.size for size in plain.subset_sizes)

        explicit = separating_map_from_poles(K, P, list(self.explicit_poles))
        f_at_origin = abs(complex(explicit(np.array([0j]))[0]))
        mapped = mapped_lambda_star(
            K,
            mu,
            P,
            1.0,
            list(self.schedule),
            separating_map=explicit,
            delta=self.delta,
            k_max=settings.k_max,
            pass_rtol=tol.lambda_pass,
            fail_rtol=tol.lambda_fail,
            mass_rtol=tol.mass_rtol,
            max_workers=settings.max_workers,
        )
        built = separating_map_build(K, P, self.rho, self.m_max)
        recheck = separating_map_from_poles(K, P, list(built.poles))
        closed_form = lipschitz_closed_form(self.delta)
        inheritance = hull_inheritance(K, P)
        logger.info(
            "ex2: Lambda* %s, mapped %s, built map m=%d",
            plain.verdict.value,
            mapped.mapped_subset_report.verdict.value,
            built.m,
        )

        return ExperimentOutcome(
            results={
                "lambda_star": plain.to_dict(),
                "mapped": mapped.to_dict(),
                "explicit_map": explicit.to_dict(),
                "built_map": built.to_dict(),
                "f_at_origin": f_at_origin,
                "lipschitz_closed_form": closed_form,
                "lipschitz_measured": mapped.lipschitz_measured,
                "hull_inheritance": inheritance.to_dict(),
            },
            tables={
                "lambda_star": plain.table(),
                "mapped_subsets": mapped.mapped_subset_report.table(),
                "image": mapped.image_report.table(),
                "map_search": built.trace,
            },
            criteria=[
                CriterionResult.check(
                    "density_sets_are_K",
                    full,
                    f"|A_r,1| = {plain.subset_sizes} of {K.size} nodes",
                ),
                CriterionResult.check(
                    "lambda_star_passes",
                    plain.verdict is Verdict.PASSES,
                    plain.verdict.value,
                    plain.cap_Ar[-1] / plain.cap_K,
                ),
                CriterionResult.measured(
                    "density_sets_strict",
                    f"threshold r exactly: |A_r,1| = {plain.strict_subset_sizes}, "
                    f"{plain.strict_verdict.value if plain.strict_verdict else 'n/a'}",
                    plain.strict_cap_Ar[-1] / plain.cap_K,
                ),
                CriterionResult.check(
                    "mapped_lambda_star_passes",
                    mapped.mapped_subset_report.verdict is Verdict.PASSES,
                    "cap f(A_r,1) against cap f(K)",
                ),
                CriterionResult.measured(
                    "image_lambda_star",
                    f"pushforward ball masses on f(K): {mapped.image_report.verdict.value}",
                ),
                *lipschitz_checks(
                    mapped.lipschitz_measured,
                    closed_form,
                    self.delta,
                    mapped.lipschitz_bound_holds,
                    tol.lambda_pass,
                ),
                CriterionResult.check(
                    "built_map_certified",
                    built.m <= self.m_max and recheck.sandwich_holds,
                    f"m={built.m}: max_K|f|={recheck.max_K:.4g} < R1={recheck.R1:.4g} < min_P|f|={recheck.min_P:.4g}",
                    float(built.m),
                ),
                CriterionResult.check(
                    "explicit_map_on_K",
                    explicit.max_K <= 4.17,
                    f"max_K |f| = {explicit.max_K:.6f}",
                    explicit.max_K,
                ),
                CriterionResult.check(
                    "explicit_map_at_origin",
                    abs(f_at_origin - 100.0) <= 1e-9,
                    f"|f(0)| = {f_at_origin:.12g}",
                    f_at_origin,
                ),
            ],
        )
