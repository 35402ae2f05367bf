"""A measure with full support on the filled annulus and no rational property."""

import logging
from typing import Dict, List

import numpy as np

from ..bergman import rational_ratio
from ..config import ToolkitSettings
from ..geometry import ComplexArray, SetDiscretization
from ..measures import DiscreteMeasure, MuCMeasureSpec, l2_norm, mu_c_generator
from . import scenes
from .base import CriterionResult, Experiment, ExperimentOutcome

logger = logging.getLogger(__name__)


def witness_root(
    K: SetDiscretization, mu: DiscreteMeasure, zeros: ComplexArray, n: int
) -> float:
    """``(||r||_K / ||r||_mu)^(1/n)`` for ``r = prod (z - zeros) / z^n``."""

    def r(z: ComplexArray) -> ComplexArray:
        return np.prod(z[:, None] - zeros[None, :], axis=1) / z**n

    sup = float(np.max(np.abs(r(K.boundary_nodes))))
    return (sup / l2_norm(mu, r(mu.atoms))) ** (1.0 / n)


def witness_lower_bound(
    points: ComplexArray, coefficients: np.ndarray, k: int, n: int
) -> float:
    """``2^(1 - k/n + 1/(2n)) / (1 + sum_{j>k} c_j |z_j|^(-2n))^(1/(2n))``."""
    tail = float(np.sum(coefficients[k:] * np.abs(points[k:]) ** (-2.0 * n)))
    return 2.0 ** (1.0 - k / n + 1.0 / (2 * n)) / (1.0 + tail) ** (1.0 / (2 * n))


class DenseAtomsExperiment(Experiment):
    """``mu_c = (1/4pi) ds + (1/2) sum c_j delta_{z_j}`` on the filled annulus, ``P = {0}``.

    Along ``n_k = k^2`` the functions ``prod_{l<=k} (z - z_l) / z^(n_k)``
    keep the ratio root above 1.
    """

    resolution = 512
    atoms = 64
    orders = (2, 3, 4)

    @property
    def id(self) -> str:
        return "ex1d"

    @property
    def title(self) -> str:
        return "Filled annulus with dense point masses: rational property fails along n_k = k^2"

    def run(self, settings: ToolkitSettings) -> ExperimentOutcome:
        spec = MuCMeasureSpec(seed=settings.seed, atoms=self.atoms)
        ws = scenes.load(settings, scenes.annulus(filled=True), self.resolution, spec, scenes.origin())
        mu, P = ws.require_measure(), ws.require_poles()
        _, certificate = mu_c_generator(settings.seed, n_atoms=self.atoms, resolution=self.resolution)
        points = np.array([complex(x, y) for x, y in certificate.points])
        coefficients = np.array(certificate.coefficients)

        table: List[Dict[str, float]] = []
        for k in self.orders:
            n = k * k
            rational = rational_ratio(ws.K, mu, P, n)
            table.append(
                {
                    "k": k,
                    "n_k": n,
                    "rational_root": rational.value ** (1.0 / n),
                    "witness_m": rational.m,
                    "witness_root": witness_root(ws.K, mu, points[:k], n),
                    "lower_bound": witness_lower_bound(points, coefficients, k, n),
                }
            )
        logger.info("ex1d: rational ratio roots %s", [round(row["rational_root"], 4) for row in table])

        above_one = all(row["rational_root"] > 1.0 for row in table)
        bound_holds = all(row["witness_root"] >= row["lower_bound"] * (1.0 - 1e-3) for row in table)
        smallest = min(row["rational_root"] for row in table)
        return ExperimentOutcome(
            results={"certificate": certificate.to_dict(), "orders": list(self.orders)},
            tables={"witnesses": table},
            criteria=[
                CriterionResult.check(
                    "mu_c_certificate",
                    certificate.certified,
                    "; ".join(certificate.reasons) or "all summability conditions hold",
                ),
                CriterionResult.check(
                    "rational_ratio_above_one",
                    above_one,
                    f"smallest ratio root along n_k is {smallest:.4f}",
                    smallest,
                ),
                CriterionResult.check(
                    "witness_lower_bound",
                    bound_holds,
                    "direct witness ratios against their Bernstein-Walsh lower bound",
                ),
                CriterionResult.measured(
                    "witness_root_at_last_order",
                    f"n_k={table[-1]['n_k']:g}",
                    table[-1]["witness_root"],
                ),
            ],
        )
