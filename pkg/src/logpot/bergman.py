"""Orthonormal polynomials, Bergman functions and Bernstein-Markov ratios.

Bases are built by an Arnoldi recurrence in the (possibly weighted) L2
inner product of a discrete measure: each new column is ``z`` times the
previous one, orthogonalized by modified Gram-Schmidt with one
reorthogonalization pass. The Hessenberg matrix of recurrence coefficients
evaluates the basis anywhere.
"""

import functools
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import stats

from .errors import PreconditionError, RankDeficiencyError
from .geometry import ComplexArray, RealArray, SetDiscretization, set_distance
from .measures import DiscreteMeasure, l2_norm
from .potential import leja_pole_configuration, log_potential

logger = logging.getLogger(__name__)

_RANK_RTOL = 1e-10


@dataclass(frozen=True, eq=False)
class WeightSpec:
    """Weight ``w = exp(U^sigma)`` for a measure ``sigma`` on the pole set.

    The empty measure gives ``w = 1``. ``mass <= 1`` is the probability
    class; any finite mass is admissible.
    """

    sigma: DiscreteMeasure = field(default_factory=DiscreteMeasure.empty)

    @property
    def mass(self) -> float:
        return self.sigma.total_mass

    @property
    def is_empty(self) -> bool:
        return self.sigma.size == 0

    @property
    def is_probability_class(self) -> bool:
        return self.mass <= 1.0 + 1e-12

    @classmethod
    def from_poles(cls, poles: Sequence[complex], k: int) -> "WeightSpec":
        """Weight whose ``k``-th power is ``1/|prod (z - pole)|``."""
        poles_arr = np.asarray(poles, dtype=np.complex128)
        if poles_arr.size == 0:
            return cls()
        return cls(DiscreteMeasure(poles_arr, np.full(poles_arr.size, 1.0 / k)))

    def log_power(self, z: ComplexArray, k: int) -> RealArray:
        """``log w(z)^k = k U^sigma(z)``."""
        z = np.asarray(z, dtype=np.complex128)
        if self.is_empty or k == 0:
            return np.zeros(z.shape)
        return k * np.asarray(log_potential(self.sigma, z))


@dataclass(frozen=True, eq=False)
class OrthonormalBasis:
    """Orthonormal system ``q_0..q_k`` in ``L2(mu)``, weighted by ``w^k``.

    ``q_j = exp(log w^k - shift/2) * phi_j`` where ``phi_j`` are the Arnoldi
    polynomials in the normalized variable ``(z - center)/scale``;
    ``hessenberg`` holds their recurrence coefficients.
    """

    degree: int
    measure: DiscreteMeasure
    weight: WeightSpec
    hessenberg: np.ndarray
    constant: float
    center: complex
    scale: float
    shift: float
    values: np.ndarray

    def working_values(self, z: Union[complex, ComplexArray]) -> np.ndarray:
        """Arnoldi polynomials ``phi_0..phi_k`` at ``z`` (one row per point)."""
        x = (np.atleast_1d(np.asarray(z, dtype=np.complex128)).ravel() - self.center) / self.scale
        H = self.hessenberg
        W = np.zeros((x.size, self.degree + 1), dtype=np.complex128)
        W[:, 0] = self.constant
        for j in range(1, self.degree + 1):
            v = x * W[:, j - 1] - W[:, :j] @ H[:j, j - 1]
            W[:, j] = v / H[j, j - 1]
        return W

    def evaluate(self, z: Union[complex, ComplexArray]) -> np.ndarray:
        """Weighted orthonormal functions ``q_0..q_k`` at ``z``."""
        factor = np.exp(self.weight.log_power(np.atleast_1d(z).ravel(), self.degree) - 0.5 * self.shift)
        return self.working_values(z) * factor[:, None]


def orthonormalize(
    mu: DiscreteMeasure, k: int, w: Optional[WeightSpec] = None
) -> OrthonormalBasis:
    """Orthonormalize ``{phi_j w^k : j <= k}`` in ``L2(mu)``.

    Args:
        mu: Discrete measure.
        k: Degree.
        w: Optional weight; the empty weight gives ordinary polynomials.

    Returns:
        The orthonormal basis.

    Raises:
        RankDeficiencyError: ``mu`` does not induce a norm on degree ``k``.
    """
    if k < 0:
        raise PreconditionError("degree must be nonnegative")
    w = w or WeightSpec()
    if mu.size < k + 1:
        raise RankDeficiencyError(k, mu.size)
    atoms = mu.atoms
    log_w = 2.0 * w.log_power(atoms, k)
    if not np.all(np.isfinite(log_w)):
        raise PreconditionError("weight has a pole at an atom of the measure")
    shift = float(log_w.max()) if log_w.size else 0.0
    weights = mu.weights * np.exp(log_w - shift)

    center = complex(np.sum(weights * atoms) / np.sum(weights))
    scale = float(np.max(np.abs(atoms - center))) or 1.0
    x = (atoms - center) / scale

    Q = np.zeros((atoms.size, k + 1), dtype=np.complex128)
    H = np.zeros((k + 1, max(k, 1)), dtype=np.complex128)
    constant = 1.0 / math.sqrt(float(weights.sum()))
    Q[:, 0] = constant
    for j in range(1, k + 1):
        v = x * Q[:, j - 1]
        before = math.sqrt(float(np.dot(weights, np.abs(v) ** 2)))
        for _ in range(2):
            for i in range(j):
                h = np.sum(weights * np.conj(Q[:, i]) * v)
                v = v - h * Q[:, i]
                H[i, j - 1] += h
        norm = math.sqrt(float(np.dot(weights, np.abs(v) ** 2)))
        if before == 0.0 or norm <= _RANK_RTOL * before:
            raise RankDeficiencyError(k, j)
        H[j, j - 1] = norm
        Q[:, j] = v / norm
    return OrthonormalBasis(
        degree=k,
        measure=mu,
        weight=w,
        hessenberg=H,
        constant=constant,
        center=center,
        scale=scale,
        shift=shift,
        values=Q,
    )


def gram_residual(B: OrthonormalBasis) -> float:
    """``max |G - I|`` for the Gram matrix of the basis under ``mu``."""
    q = B.evaluate(B.measure.atoms)
    gram = (q.conj().T * B.measure.weights) @ q
    return float(np.max(np.abs(gram - np.eye(B.degree + 1))))


def log_bergman_function(B: OrthonormalBasis, z: Union[complex, ComplexArray]) -> RealArray:
    """``log sum_j |q_j(z)|^2``."""
    points = np.atleast_1d(np.asarray(z, dtype=np.complex128)).ravel()
    total = np.sum(np.abs(B.working_values(points)) ** 2, axis=1)
    with np.errstate(divide="ignore"):
        return np.log(total) + 2.0 * B.weight.log_power(points, B.degree) - B.shift


def bergman_function(B: OrthonormalBasis, z: Union[complex, ComplexArray]) -> Union[float, RealArray]:
    """``B_k(z) = sum_{j=0}^k |q_j(z)|^2``."""
    values = np.exp(log_bergman_function(B, z))
    return float(values[0]) if np.ndim(z) == 0 else values.reshape(np.shape(z))


def kernel_values(B: OrthonormalBasis, z0: complex, z: Union[complex, ComplexArray]) -> ComplexArray:
    """Extremal function ``sum_j conj(q_j(z0)) q_j(z)``, peaking at ``z0``."""
    coeffs = np.conj(B.evaluate(z0)[0])
    return B.evaluate(z) @ coeffs


def kernel_polynomial(B: OrthonormalBasis, z0: complex) -> Callable[[ComplexArray], ComplexArray]:
    """The extremal witness at ``z0`` as a function of ``z``."""
    return functools.partial(kernel_values, B, complex(z0))


def _max_ratio(B: OrthonormalBasis, K: SetDiscretization) -> float:
    return float(np.exp(0.5 * np.max(log_bergman_function(B, K.boundary_nodes))))


def bmp_ratio(K: SetDiscretization, mu: DiscreteMeasure, k: int) -> float:
    """``sup ||p||_K / ||p||_mu`` over polynomials of degree ``k``: ``max_K sqrt(B_k)``."""
    return _max_ratio(orthonormalize(mu, k), K)


def _check_weight_off_set(K: SetDiscretization, w: WeightSpec) -> None:
    if w.is_empty:
        return
    distance = np.min(np.abs(w.sigma.atoms[:, None] - K.boundary_nodes[None, :]))
    if distance < K.mesh_spacing:
        raise PreconditionError("weight measure has atoms on K")


def weighted_bmp_ratio(K: SetDiscretization, mu: DiscreteMeasure, w: WeightSpec, k: int) -> float:
    """``sup ||p w^k||_K / ||p w^k||_mu`` over polynomials of degree ``k``."""
    if w.is_empty:
        return bmp_ratio(K, mu, k)
    _check_weight_off_set(K, w)
    return _max_ratio(orthonormalize(mu, k, w), K)


def _check_disjoint(K: SetDiscretization, P: SetDiscretization) -> None:
    if set_distance(K, P) <= 0.0:
        raise PreconditionError("pole set P meets K")


def subdiagonal_ratio(K: SetDiscretization, mu: DiscreteMeasure, P: SetDiscretization, k: int) -> float:
    """Ratio over ``p/q_k`` with ``q_k`` vanishing at ``k`` Leja points of ``P``.

    Exact over numerators for that denominator; a lower bound over all
    degree-``k`` denominators with zeros in ``P``.
    """
    _check_disjoint(K, P)
    if k == 0:
        return bmp_ratio(K, mu, 0)
    poles = leja_pole_configuration(P, k)
    return weighted_bmp_ratio(K, mu, WeightSpec.from_poles(poles, k), k)


@dataclass
class RationalRatio:
    """Best ratio over denominator degrees with its witness poles."""

    value: float
    witness: ComplexArray
    by_degree: List[float]

    @property
    def m(self) -> int:
        return int(self.witness.size)


def rational_ratio(K: SetDiscretization, mu: DiscreteMeasure, P: SetDiscretization, k: int) -> RationalRatio:
    """Maximize the weighted ratio over denominators of degree ``m = 0..k`` with zeros in ``P``."""
    _check_disjoint(K, P)
    values = []
    configurations = []
    for m in range(k + 1):
        poles = leja_pole_configuration(P, m)
        configurations.append(poles)
        values.append(weighted_bmp_ratio(K, mu, WeightSpec.from_poles(poles, k), k))
    best = int(np.argmax(values))
    return RationalRatio(values[best], configurations[best], values)


def extremal_forms(
    K: SetDiscretization,
    mu: DiscreteMeasure,
    poles: Sequence[complex],
    numerator: Sequence[complex],
) -> Tuple[float, float]:
    """The k-th-root ratio of ``p/q`` computed as a rational function and as ``p w^k``.

    Args:
        K: Set for the sup norm.
        mu: Measure for the L2 norm.
        poles: Zeros of the monic denominator ``q``; ``k = len(poles)``.
        numerator: Ascending coefficients of ``p``.

    Returns:
        ``(rational form, weighted form)``.
    """
    poles_arr = np.asarray(poles, dtype=np.complex128)
    k = poles_arr.size
    if k == 0:
        raise PreconditionError("need at least one pole")
    coeffs = np.asarray(numerator, dtype=np.complex128)

    def rational(z: ComplexArray) -> ComplexArray:
        q = np.prod(z[:, None] - poles_arr[None, :], axis=1)
        return np.polynomial.polynomial.polyval(z, coeffs) / q

    sigma = WeightSpec.from_poles(poles_arr, k)

    def weighted(z: ComplexArray) -> ComplexArray:
        return np.polynomial.polynomial.polyval(z, coeffs) * np.exp(sigma.log_power(z, k))

    forms = []
    for f in (rational, weighted):
        sup = float(np.max(np.abs(f(K.boundary_nodes))))
        forms.append((sup / l2_norm(mu, f(mu.atoms))) ** (1.0 / k))
    return forms[0], forms[1]


class RatioKind(str, Enum):
    """Function class the ratio is taken over."""

    POLY = "poly"
    WEIGHTED = "weighted"
    SUBDIAG = "subdiag"
    RATIONAL = "rational"


@dataclass
class RatioRow:
    k: int
    ratio: float
    witness_m: int

    @property
    def root(self) -> float:
        return self.ratio ** (1.0 / self.k) if self.k else self.ratio

    def to_dict(self) -> Dict[str, float]:
        return {"k": self.k, "ratio": self.ratio, "ratio_root": self.root, "witness_m": self.witness_m}


def ratio_sweep(
    kind: RatioKind,
    K: SetDiscretization,
    mu: DiscreteMeasure,
    k_values: Sequence[int],
    P: Optional[SetDiscretization] = None,
    weight: Optional[WeightSpec] = None,
    max_workers: int = 4,
) -> List[RatioRow]:
    """Evaluate one ratio variant for every ``k``; degrees run concurrently."""
    if kind in (RatioKind.SUBDIAG, RatioKind.RATIONAL) and P is None:
        raise PreconditionError(f"ratio kind '{kind.value}' needs a pole set")

    def one(k: int) -> RatioRow:
        if kind is RatioKind.POLY:
            return RatioRow(k, bmp_ratio(K, mu, k), 0)
        if kind is RatioKind.WEIGHTED:
            return RatioRow(k, weighted_bmp_ratio(K, mu, weight or WeightSpec(), k), 0)
        assert P is not None
        if kind is RatioKind.SUBDIAG:
            return RatioRow(k, subdiagonal_ratio(K, mu, P, k), k)
        result = rational_ratio(K, mu, P, k)
        return RatioRow(k, result.value, result.m)

    with ThreadPoolExecutor(max_workers=max_workers) as executor:
        rows = list(executor.map(one, k_values))
    logger.debug("Ratio sweep %s over %d degrees", kind.value, len(rows))
    return rows


class TrendClass(str, Enum):
    """Finite-k surrogate for ``limsup ratio^(1/k) <= 1``."""

    CONSISTENT = "consistent-with-BMP"
    VIOLATES = "violates-BMP"
    INCONCLUSIVE = "inconclusive"


@dataclass
class TrendResult:
    classification: TrendClass
    slope: float
    stderr: float
    lower_bound: float
    tail_max_excess: float

    def to_dict(self) -> Dict[str, object]:
        return {
            "classification": self.classification.value,
            "slope": self.slope,
            "stderr": self.stderr,
            "lower_bound": self.lower_bound,
            "tail_max_excess": self.tail_max_excess,
        }


def ratio_trend(
    ratios: Sequence[float],
    orders: Optional[Sequence[int]] = None,
    confidence: float = 0.99,
    min_slope: float = 0.01,
    tail_fraction: float = 0.25,
) -> TrendResult:
    """Classify a ratio sequence by fitting ``log r_k = a + b log k + c k``.

    A linear-in-k slope ``c`` that is positive at the given one-sided
    confidence and exceeds ``min_slope`` means geometric growth. Otherwise
    the sequence is consistent when ``r_k^(1/k) <= 1 + 3/k`` on its tail.
    """
    k = np.asarray(orders if orders is not None else range(1, len(ratios) + 1), dtype=np.float64)
    r = np.asarray(ratios, dtype=np.float64)
    if k.size != r.size:
        raise PreconditionError("orders and ratios differ in length")
    keep = k >= 1
    k, r = k[keep], r[keep]
    if k.size < 8:
        raise PreconditionError("trend classification needs at least 8 entries")
    y = np.log(r)
    X = np.column_stack([np.ones_like(k), np.log(k), k])
    coef, *_ = np.linalg.lstsq(X, y, rcond=None)
    dof = k.size - 3
    rss = float(np.sum((y - X @ coef) ** 2))
    cov = rss / dof * np.linalg.pinv(X.T @ X)
    stderr = math.sqrt(max(float(cov[2, 2]), 0.0))
    lower = float(coef[2]) - float(stats.t.ppf(confidence, dof)) * stderr

    first = int(math.floor((1.0 - tail_fraction) * k.size))
    tail_k, tail_r = k[first:], r[first:]
    excess = float(np.max(tail_r ** (1.0 / tail_k) - (1.0 + 3.0 / tail_k)))
    if lower > 0.0 and coef[2] > min_slope:
        cls = TrendClass.VIOLATES
    elif excess <= 0.0:
        cls = TrendClass.CONSISTENT
    else:
        cls = TrendClass.INCONCLUSIVE
    return TrendResult(cls, float(coef[2]), stderr, lower, excess)
