"""Tests for Blatt bounds, best L2 rational approximation and decay rates."""

import math

import numpy as np
import pytest

from logpot.errors import PreconditionError
from logpot.geometry import refine
from logpot.meromorphic import (
    DecayClass,
    RationalFunction,
    SearchConfig,
    best_l2_fixed_poles,
    best_l2_rational,
    blatt_bound,
    fixed_pole_sweep,
    overconvergence_rate,
)
from logpot.potential import bernstein_walsh_bound, equilibrium_measure


def pole_at_two(z):
    return 1.0 / (z - 2.0)


class TestRationalFunction:
    def test_monomial_form(self):
        r = RationalFunction(np.array([1.0, 0.0, 1.0], dtype=complex), np.array([2.0 + 0j]))
        assert r.numerator_degree == 2
        assert r.n == 1
        assert r(np.array([0j]))[0] == pytest.approx(-0.5)

    def test_pole_free(self):
        r = RationalFunction(np.array([3.0 + 0j]), np.zeros(0, dtype=complex))
        assert np.allclose(r(np.array([1j, 5.0 + 0j])), 3.0)


class TestFixedPoles:
    """Linear least squares with a prescribed denominator."""

    def test_exact_when_pole_is_right(self, circle_ds):
        fit = best_l2_fixed_poles(pole_at_two(circle_ds.atoms), circle_ds, 0, [2.0])
        assert fit.residual < 1e-10
        z = np.array([0.3 + 0.4j, -5.0 + 0j])
        assert np.allclose(fit(z), pole_at_two(z), atol=1e-10)
        assert not fit.ill_conditioned

    def test_samples_must_match_atoms(self, circle_ds):
        with pytest.raises(PreconditionError, match="sampled on the atoms"):
            best_l2_fixed_poles(np.ones(3), circle_ds, 2, [])

    def test_pole_on_atom(self, circle_ds):
        with pytest.raises(PreconditionError, match="coincides"):
            best_l2_fixed_poles(np.ones(circle_ds.size), circle_ds, 2, [circle_ds.atoms[0]])

    def test_sweep_picks_true_pole(self, circle_ds):
        pole, error = fixed_pole_sweep(pole_at_two, circle_ds, 1, [1.5, 2.0, 3.0])
        assert pole == 2.0
        assert error < 1e-10


class TestPoleSearch:
    """Free poles found by the greedy sweep and Nelder-Mead."""

    def test_recovers_pole_from_warm_start(self, unit_circle, circle_ds):
        result = best_l2_rational(pole_at_two, circle_ds, unit_circle, 2, 1, initial_poles=[2.1])
        assert abs(result.poles_found[0] - 2.0) < 1e-3
        assert result.err_l2 < 1e-6
        assert result.trace[0]["stage"] == "warm-start"

    def test_polynomial_case_has_no_search(self, unit_circle, circle_ds):
        result = best_l2_rational(pole_at_two, circle_ds, unit_circle, 4, 0)
        assert result.poles_found.size == 0
        assert result.trace == []
        # ||f - p_4|| = ||sum_{j>4} z^j / 2^(j+1)||, a geometric tail
        expected = math.sqrt(2 * math.pi * sum(4.0 ** -(j + 1) for j in range(5, 200)))
        assert result.err_l2 == pytest.approx(expected, rel=1e-6)
        assert result.err_sup >= result.err_l2 / math.sqrt(2 * math.pi)

    def test_too_many_poles(self, unit_circle, circle_ds):
        with pytest.raises(PreconditionError, match="must not exceed k"):
            best_l2_rational(pole_at_two, circle_ds, unit_circle, 1, 2)

    def test_barrier_from_singularities(self, unit_circle):
        config = SearchConfig(singularities=[3.0])
        assert config.resolve_barrier(unit_circle) == pytest.approx(1.0)
        assert SearchConfig(barrier=0.4).resolve_barrier(unit_circle) == 0.4


class TestBlatt:
    """Pointwise bounds for rational functions off K."""

    def test_pole_free_case_is_bernstein_walsh(self, unit_circle):
        G = equilibrium_measure(unit_circle)
        r = RationalFunction(np.array([0.0, 0.0, 1.0], dtype=complex), np.zeros(0, dtype=complex))
        bound = blatt_bound(r, unit_circle, 2.0 + 0j, G=G)
        assert bound == pytest.approx(bernstein_walsh_bound(1.0, 2, G, 2.0 + 0j), rel=1e-9)

    def test_evaluation_at_a_pole(self, unit_circle):
        r = RationalFunction(np.array([1.0 + 0j]), np.array([3.0 + 0j]))
        with pytest.raises(PreconditionError, match="at a pole"):
            blatt_bound(r, unit_circle, 3.0 + 0j)

    @pytest.mark.slow
    def test_no_violations_on_grid(self, annulus_boundary, rng):
        K = annulus_boundary
        G = equilibrium_measure(K)
        sup_nodes = refine(K).boundary_nodes
        candidates = np.array([0j, 3.0 + 0j])

        axis = np.linspace(-4.0, 4.0, 50)
        X, Y = np.meshgrid(axis, axis)
        z = (X + 1j * Y).ravel()
        near_K = np.min(np.abs(z[:, None] - K.boundary_nodes[None, :]), axis=1) < 0.1
        near_P = np.min(np.abs(z[:, None] - candidates[None, :]), axis=1) < 0.1
        z = z[~(near_K | near_P)]

        violations = 0
        for _ in range(500):
            degree = int(rng.integers(0, 5))
            coefficients = rng.standard_normal(degree + 1) + 1j * rng.standard_normal(degree + 1)
            poles = rng.choice(candidates, size=int(rng.integers(1, 4)))
            r = RationalFunction(coefficients, poles)
            bound = blatt_bound(r, K, z, G=G, certified=True, sup_nodes=sup_nodes)
            violations += int(np.sum(np.abs(r(z)) > bound * (1.0 + 1e-9) + 1e-9))
        assert violations == 0


@pytest.mark.slow
class TestOverconvergence:
    """Decay of best approximation errors on the unit circle."""

    def test_single_pole_rate(self, unit_circle, circle_ds):
        report = overconvergence_rate(pole_at_two, unit_circle, circle_ds, 0, 30)
        assert report.classification is DecayClass.GEOMETRIC
        assert report.predicted_r == pytest.approx(2.0, rel=0.05)
        assert report.rates_consistent
        assert len(report.table()) == 30

    def test_polynomial_is_exact(self, unit_circle, circle_ds):
        report = overconvergence_rate(lambda z: z**2 + 1.0, unit_circle, circle_ds, 0, 8)
        assert report.classification is DecayClass.EXACT
        assert report.to_dict()["predicted_r"] == "inf"

    def test_entire_function_is_superlinear(self, unit_circle, circle_ds):
        report = overconvergence_rate(np.exp, unit_circle, circle_ds, 0, 16)
        assert report.classification is DecayClass.SUPERLINEAR

    def test_needs_four_degrees(self, unit_circle, circle_ds):
        with pytest.raises(PreconditionError, match="at least four"):
            overconvergence_rate(pole_at_two, unit_circle, circle_ds, 0, 3)
