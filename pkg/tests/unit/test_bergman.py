"""Tests for orthonormal bases, Bergman functions and ratio sweeps."""

import math

import numpy as np
import pytest

from logpot.bergman import (
    RatioKind,
    TrendClass,
    WeightSpec,
    bergman_function,
    bmp_ratio,
    extremal_forms,
    gram_residual,
    kernel_values,
    orthonormalize,
    ratio_sweep,
    ratio_trend,
    rational_ratio,
    subdiagonal_ratio,
    weighted_bmp_ratio,
)
from logpot.errors import PreconditionError, RankDeficiencyError
from logpot.geometry import CircleSpec, discretize, from_points
from logpot.measures import DiscreteMeasure, combine, l2_norm


def arclength(radius: float, n: int) -> DiscreteMeasure:
    K = discretize(CircleSpec(radius=radius), n)
    return DiscreteMeasure(K.boundary_nodes, K.quad_weights, K.mesh_spacing)


@pytest.fixture
def inner_ds():
    """Arc length on ``|z| = 1/2`` (total mass pi)."""
    return arclength(0.5, 128)


class TestWeightSpec:
    def test_empty_weight(self):
        w = WeightSpec()
        assert w.is_empty
        assert w.mass == 0.0
        assert np.all(w.log_power(np.array([2.0 + 0j]), 5) == 0.0)

    def test_from_poles(self):
        w = WeightSpec.from_poles([0j, 1 + 0j], 4)
        assert w.mass == pytest.approx(0.5)
        assert w.is_probability_class
        # w^4 = 1/|z (z - 1)|
        assert w.log_power(np.array([2.0 + 0j]), 4)[0] == pytest.approx(-math.log(2.0))


class TestOrthonormalize:
    """Arnoldi bases in L2(mu)."""

    @pytest.mark.parametrize("k", [0, 1, 10, 50])
    def test_circle_bergman_function(self, circle_ds, k):
        # q_j = z^j / sqrt(2 pi), so B_k = (k + 1) / (2 pi) on |z| = 1
        B = orthonormalize(circle_ds, k)
        values = bergman_function(B, circle_ds.atoms)
        assert np.allclose(values, (k + 1) / (2 * math.pi), rtol=1e-6)

    def test_gram_residual(self):
        B = orthonormalize(combine([arclength(1.0, 256), arclength(0.5, 256)]), 20)
        assert gram_residual(B) <= 1e-10

    def test_rank_deficiency(self):
        mu = DiscreteMeasure.counting([0j, 1 + 0j, 1j])
        with pytest.raises(RankDeficiencyError) as exc:
            orthonormalize(mu, 5)
        assert exc.value.degree == 5

    def test_negative_degree(self, circle_ds):
        with pytest.raises(PreconditionError):
            orthonormalize(circle_ds, -1)

    def test_weight_pole_at_atom(self, circle_ds):
        w = WeightSpec.from_poles([circle_ds.atoms[0]], 2)
        with pytest.raises(PreconditionError, match="pole at an atom"):
            orthonormalize(circle_ds, 2, w)

    def test_kernel_peaks_at_point(self, circle_ds):
        B = orthonormalize(circle_ds, 6)
        z0 = circle_ds.atoms[3]
        value = kernel_values(B, z0, np.array([z0]))[0]
        assert value.real == pytest.approx(bergman_function(B, z0))
        assert abs(value.imag) < 1e-12


class TestRatios:
    """Sup over L2 ratios against closed forms."""

    def test_poly_ratio_on_circle(self, unit_circle, circle_ds):
        assert bmp_ratio(unit_circle, circle_ds, 8) == pytest.approx(math.sqrt(9 / (2 * math.pi)))

    @pytest.mark.parametrize("k", [1, 4, 10])
    def test_measure_on_inner_circle(self, unit_circle, inner_ds, k):
        # sum_j 4^j / pi on |z| = 1
        expected = math.sqrt((4 ** (k + 1) - 1) / (3 * math.pi))
        ratio = bmp_ratio(unit_circle, inner_ds, k)
        assert ratio == pytest.approx(expected, rel=1e-8)
        # the monomial z^k alone already gives 2 pi^(-1/(2k))
        assert ratio ** (1.0 / k) >= 2.0 * math.pi ** (-1.0 / (2 * k))

    def test_weighted_equals_poly_when_weight_is_one_on_support(self, unit_circle, circle_ds):
        w = WeightSpec.from_poles([0j], 6)
        assert weighted_bmp_ratio(unit_circle, circle_ds, w, 6) == pytest.approx(bmp_ratio(unit_circle, circle_ds, 6))

    def test_weight_atoms_on_K_rejected(self, unit_circle, circle_ds):
        w = WeightSpec.from_poles([unit_circle.boundary_nodes[0]], 3)
        with pytest.raises(PreconditionError, match="atoms on K"):
            weighted_bmp_ratio(unit_circle, circle_ds, w, 3)

    def test_subdiagonal_on_annulus(self, annulus_boundary, circle_ds, origin):
        k = 6
        # p / z^k peaks on the inner circle: sum_j 4^(k - j) / (2 pi)
        expected = math.sqrt((4 ** (k + 1) - 1) / (3 * 2 * math.pi))
        assert subdiagonal_ratio(annulus_boundary, circle_ds, origin, k) == pytest.approx(expected, rel=1e-8)

    def test_rational_picks_full_denominator(self, annulus_boundary, circle_ds, origin):
        result = rational_ratio(annulus_boundary, circle_ds, origin, 5)
        assert result.m == 5
        assert len(result.by_degree) == 6
        assert result.value == pytest.approx(subdiagonal_ratio(annulus_boundary, circle_ds, origin, 5))

    def test_pole_set_meeting_K(self, unit_circle, circle_ds):
        with pytest.raises(PreconditionError, match="meets K"):
            subdiagonal_ratio(unit_circle, circle_ds, from_points([1 + 0j]), 2)

    def test_extremal_forms_agree(self, unit_circle, circle_ds, rng):
        poles = 0.4 * (rng.random(3) + 1j * rng.random(3))
        numerator = rng.standard_normal(3) + 1j * rng.standard_normal(3)
        rational, weighted = extremal_forms(unit_circle, circle_ds, poles, numerator)
        assert rational == pytest.approx(weighted, rel=1e-12)

    def test_random_polynomials_below_ratio(self, unit_circle, inner_ds, rng):
        k = 6
        bound = bmp_ratio(unit_circle, inner_ds, k)
        coeffs = rng.standard_normal((1000, k + 1)) + 1j * rng.standard_normal((1000, k + 1))
        on_K = np.polynomial.polynomial.polyval(unit_circle.boundary_nodes, coeffs.T)
        on_mu = np.polynomial.polynomial.polyval(inner_ds.atoms, coeffs.T)
        for sup_values, mu_values in zip(on_K, on_mu):
            assert np.max(np.abs(sup_values)) / l2_norm(inner_ds, mu_values) <= bound + 1e-8

    def test_extremal_forms_agree_on_random_numerators(self, annulus_boundary, circle_ds, rng):
        poles = 0.3 * (rng.random(4) - 0.5 + 1j * (rng.random(4) - 0.5))
        for _ in range(100):
            numerator = rng.standard_normal(4) + 1j * rng.standard_normal(4)
            rational, weighted = extremal_forms(annulus_boundary, circle_ds, poles, numerator)
            assert rational == pytest.approx(weighted, rel=1e-12)

    def test_extremal_forms_need_a_pole(self, unit_circle, circle_ds):
        with pytest.raises(PreconditionError):
            extremal_forms(unit_circle, circle_ds, [], [1.0])


class TestSweepAndTrend:
    """Ratio sweeps over k and their growth classification."""

    def test_sweep_rows_in_order(self, unit_circle, circle_ds):
        rows = ratio_sweep(RatioKind.POLY, unit_circle, circle_ds, [1, 2, 3, 4], max_workers=2)
        assert [row.k for row in rows] == [1, 2, 3, 4]
        assert rows[2].root == pytest.approx(rows[2].ratio ** (1 / 3))
        assert rows[0].to_dict()["witness_m"] == 0

    def test_sweep_needs_poles(self, unit_circle, circle_ds):
        with pytest.raises(PreconditionError, match="needs a pole set"):
            ratio_sweep(RatioKind.SUBDIAG, unit_circle, circle_ds, [1])

    def test_subdiag_sweep_violates(self, annulus_boundary, circle_ds, origin):
        k_values = list(range(1, 13))
        rows = ratio_sweep(RatioKind.SUBDIAG, annulus_boundary, circle_ds, k_values, P=origin)
        trend = ratio_trend([row.ratio for row in rows], k_values)
        assert trend.classification is TrendClass.VIOLATES

    def test_geometric_growth_violates(self):
        k = np.arange(1, 21)
        assert ratio_trend(2.0**k, k).classification is TrendClass.VIOLATES

    def test_square_root_growth_consistent(self):
        k = np.arange(1, 31)
        result = ratio_trend(np.sqrt((k + 1) / (2 * math.pi)), k)
        assert result.classification is TrendClass.CONSISTENT
        assert result.to_dict()["classification"] == "consistent-with-BMP"

    def test_large_flat_ratio_inconclusive(self):
        k = np.arange(1, 13)
        assert ratio_trend(np.full(k.size, 1e6), k).classification is TrendClass.INCONCLUSIVE

    def test_needs_eight_entries(self):
        with pytest.raises(PreconditionError, match="at least 8"):
            ratio_trend([1.0] * 5)

    def test_lengths_must_match(self):
        with pytest.raises(PreconditionError, match="differ in length"):
            ratio_trend([1.0] * 9, range(1, 5))
