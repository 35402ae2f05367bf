"""Tests for the mass-density criterion and separating maps."""

import numpy as np
import pytest

from logpot.criteria import (
    LambdaStarReport,
    Verdict,
    density_masks,
    hull_inheritance,
    lambda_star_check,
    lipschitz_constant,
    mapped_lambda_star,
    separating_map_build,
    separating_map_from_poles,
    subset_capacity,
)
from logpot.errors import PreconditionError, ResolutionError, SeparationError
from logpot.experiments.base import Outcome
from logpot.experiments.ex2 import lipschitz_checks, lipschitz_closed_form
from logpot.geometry import CircleSpec, discretize, from_points
from logpot.measures import DiscreteMeasure, ball_masses

SCHEDULE = [0.4, 0.2, 0.1]


@pytest.fixture
def half_and_half(annulus_boundary):
    """``1/2 ds`` on each boundary circle of the annulus."""
    K = annulus_boundary
    return DiscreteMeasure(K.boundary_nodes, 0.5 * K.quad_weights, K.mesh_spacing)


class TestLambdaStar:
    """``cap(A_r,t)`` against ``cap(K)``."""

    def test_arclength_passes(self, unit_circle, circle_ds):
        report = lambda_star_check(unit_circle, circle_ds, 1.0, SCHEDULE, k_max=64)
        assert report.verdict is Verdict.PASSES
        assert report.subset_sizes == [unit_circle.size] * 3
        assert not report.exceeds_cap_K
        assert [row["r"] for row in report.table()] == SCHEDULE

    def test_measure_on_half_circle_fails(self, unit_circle):
        right = unit_circle.boundary_nodes.real > 0
        mu = DiscreteMeasure(
            unit_circle.boundary_nodes[right], unit_circle.quad_weights[right], unit_circle.mesh_spacing
        )
        report = lambda_star_check(unit_circle, mu, 1.0, SCHEDULE, k_max=64)
        assert report.verdict is Verdict.FAILS
        assert report.cap_Ar[-1] < 0.9 * report.cap_K

    def test_report_round_trips_to_dict(self, unit_circle, circle_ds):
        report = lambda_star_check(unit_circle, circle_ds, 1.0, SCHEDULE, k_max=32)
        data = report.to_dict()
        assert data["verdict"] == "passes"
        assert isinstance(report, LambdaStarReport)
        assert data["schedule"] == SCHEDULE

    def test_schedule_must_decrease(self, unit_circle, circle_ds):
        with pytest.raises(PreconditionError, match="strictly decreasing"):
            density_masks(unit_circle, circle_ds, 1.0, [0.1, 0.2])

    def test_radius_below_resolution(self, unit_circle, circle_ds):
        with pytest.raises(ResolutionError) as exc:
            density_masks(unit_circle, circle_ds, 1.0, [0.2, unit_circle.mesh_spacing])
        assert exc.value.quantity == "r"

    def test_exponent_positive(self, unit_circle, circle_ds):
        with pytest.raises(PreconditionError, match="t must be positive"):
            density_masks(unit_circle, circle_ds, 0.0, SCHEDULE)

    def test_measure_off_K(self, unit_circle):
        mu = DiscreteMeasure.point_masses([0j])
        with pytest.raises(PreconditionError, match="off the support"):
            density_masks(unit_circle, mu, 1.0, SCHEDULE)

    def test_tiny_subset_has_zero_capacity(self, unit_circle):
        mask = np.zeros(unit_circle.size, dtype=bool)
        mask[0] = True
        assert subset_capacity(unit_circle, mask) == 0.0


class TestStrictThreshold:
    """Ball masses sitting just below ``r^t`` separate the strict and slackened sets."""

    RADIUS = 0.2

    def measure(self, unit_circle, circle_ds, factor):
        base = ball_masses(circle_ds, unit_circle.boundary_nodes, [self.RADIUS])[0].max()
        return circle_ds.scaled(factor * self.RADIUS / base)

    def test_strict_by_default(self, unit_circle, circle_ds):
        mu = self.measure(unit_circle, circle_ds, 0.99)
        _, strict = density_masks(unit_circle, mu, 1.0, [self.RADIUS])
        _, relaxed = density_masks(unit_circle, mu, 1.0, [self.RADIUS], mass_rtol=0.02)
        assert strict[0].sum() == 0
        assert relaxed[0].sum() == unit_circle.size

    def test_at_threshold_is_included(self, unit_circle, circle_ds):
        mu = self.measure(unit_circle, circle_ds, 1.0 + 1e-9)
        _, strict = density_masks(unit_circle, mu, 1.0, [self.RADIUS])
        assert strict[0].all()

    def test_report_carries_both_verdicts(self, unit_circle, circle_ds):
        mu = self.measure(unit_circle, circle_ds, 0.99)
        report = lambda_star_check(unit_circle, mu, 1.0, [self.RADIUS], k_max=32, mass_rtol=0.02)
        assert report.verdict is Verdict.PASSES
        assert report.strict_verdict is Verdict.FAILS
        assert report.strict_subset_sizes == [0]
        assert report.strict_cap_Ar == [0.0]
        assert not report.strict_agrees
        assert report.table()[0]["strict_subset_size"] == 0
        assert report.to_dict()["strict_verdict"] == "fails"

    def test_no_slack_agrees(self, unit_circle, circle_ds):
        report = lambda_star_check(unit_circle, circle_ds, 1.0, SCHEDULE, k_max=32, mass_rtol=0.0)
        assert report.strict_agrees
        assert report.strict_cap_Ar == report.cap_Ar


class TestSeparatingMaps:
    """Maps ``1/q_m`` that separate K from P."""

    def test_explicit_map_on_annulus(self, annulus_boundary, origin):
        f = separating_map_from_poles(annulus_boundary, origin, [0.1, -0.1])
        # |z^2 - 0.01| >= 0.24 on |z| = 1/2
        assert f.max_K <= 4.17
        assert f.max_K == pytest.approx(1.0 / 0.24, rel=1e-9)
        assert abs(f(np.array([0j]))[0]) == pytest.approx(100.0)
        assert f.sandwich_holds
        assert f.to_dict()["m"] == 2

    def test_derivative_matches_difference_quotient(self, annulus_boundary, origin):
        f = separating_map_from_poles(annulus_boundary, origin, [0.1, -0.1])
        z, h = np.array([0.7 + 0.2j]), 1e-6
        numeric = (f(z + h) - f(z - h)) / (2 * h)
        assert np.allclose(f.derivative(z), numeric, rtol=1e-6)

    def test_poles_outside_do_not_separate(self, annulus_boundary, origin):
        with pytest.raises(SeparationError):
            separating_map_from_poles(annulus_boundary, origin, [2.0])

    def test_needs_a_pole(self, annulus_boundary, origin):
        with pytest.raises(PreconditionError, match="at least one pole"):
            separating_map_from_poles(annulus_boundary, origin, [])

    def test_build_on_annulus(self, annulus_boundary, origin):
        f = separating_map_build(annulus_boundary, origin, rho=0.1, m_max=4)
        assert 1 <= f.m <= 4
        assert f.sandwich_holds
        assert f.trace[-1]["margin"] > 0.0
        assert separating_map_from_poles(annulus_boundary, origin, list(f.poles)).sandwich_holds

    def test_rho_too_large(self, annulus_boundary, origin):
        with pytest.raises(PreconditionError, match="half the K-P distance"):
            separating_map_build(annulus_boundary, origin, rho=0.3)

    def test_K_in_hull_of_P(self, unit_circle):
        P = discretize(CircleSpec(radius=2.0), 128)
        with pytest.raises(PreconditionError, match="polynomial hull"):
            separating_map_build(unit_circle, P, rho=0.1)

    def test_separation_error_is_not_a_precondition(self):
        error = SeparationError(8, -0.3, 5)
        assert not isinstance(error, PreconditionError)
        assert error.best_m == 5


class TestLipschitzAndHull:
    def test_lipschitz_closed_form(self):
        assert lipschitz_closed_form(0.1) == pytest.approx(16.0 / 3.0, abs=1e-10)

    def test_lipschitz_of_half_square(self, unit_circle):
        # |z| <= 1 + delta on the neighborhood
        L = lipschitz_constant(lambda z: z, unit_circle, 0.1)
        assert 1.0 <= L <= 1.1 + unit_circle.fill_grid.cell

    def test_explicit_map_exceeds_closed_form(self, annulus_boundary, origin):
        f = separating_map_from_poles(annulus_boundary, origin, [0.1, -0.1])
        L = lipschitz_constant(f.derivative, annulus_boundary, 0.1)
        # |f'(0.4)| = 0.8 / 0.15^2 on the inner edge of the neighborhood
        assert 2 * lipschitz_closed_form(0.1) < L < 45.0

    def test_lipschitz_checks_judge_closed_form(self):
        closed = lipschitz_closed_form(0.1)
        bound, dominates = lipschitz_checks(35.6, closed, 0.1, True, 0.02)
        assert bound.name == "lipschitz_capacity_bound"
        assert bound.outcome is Outcome.PASS
        assert dominates.outcome is Outcome.FAIL
        assert "5.33333" in dominates.detail

    def test_lipschitz_checks_pass_when_dominated(self):
        checks = lipschitz_checks(5.0, lipschitz_closed_form(0.1), 0.1, True, 0.02)
        assert [c.outcome for c in checks] == [Outcome.PASS, Outcome.PASS]
        assert lipschitz_checks(5.0, 16.0 / 3.0, 0.1, False, 0.02)[0].outcome is Outcome.FAIL

    def test_pole_in_hull(self, unit_circle, origin):
        result = hull_inheritance(unit_circle, origin)
        assert result.p_meets_hull
        assert not result.inherited

    def test_pole_outside_hull(self, unit_circle):
        result = hull_inheritance(unit_circle, from_points([3.0 + 0j]))
        assert result.inherited
        assert result.distance == pytest.approx(2.0)
        assert result.to_dict()["inherited"] is True


@pytest.mark.slow
class TestMappedLambdaStar:
    """The criterion carried through the explicit map on the annulus."""

    def test_both_forms(self, annulus_boundary, origin, half_and_half):
        f = separating_map_from_poles(annulus_boundary, origin, [0.1, -0.1])
        result = mapped_lambda_star(
            annulus_boundary,
            half_and_half,
            origin,
            1.0,
            [1.0, 0.5, 0.2],
            separating_map=f,
            k_max=64,
        )
        assert result.separating_map is f
        assert result.mapped_subset_report.schedule == [1.0, 0.5, 0.2]
        assert result.image_report.schedule[0] == 1.0
        assert result.lipschitz_bound_holds
        assert result.lipschitz_measured > lipschitz_closed_form(0.1)
        assert set(result.to_dict()) >= {"image_form", "mapped_subset_form", "capacities_agree"}

