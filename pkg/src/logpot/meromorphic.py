"""Blatt bounds, best L2 rational approximation and overconvergence rates."""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.optimize import minimize

from .bergman import OrthonormalBasis, gram_residual, orthonormalize
from .criteria import hull_inheritance
from .errors import PreconditionError
from .geometry import ComplexArray, ComplexMap, RealArray, SetDiscretization, from_points, hull_indicator, refine
from .measures import DiscreteMeasure
from .potential import (
    DEFAULT_GREEN_ORDER,
    DEFAULT_TOL,
    GreenField,
    equilibrium_measure,
    green_field_with_pole,
    green_infinity,
    green_pole,
)

logger = logging.getLogger(__name__)

_TINY = 1e-300


@dataclass(frozen=True, eq=False)
class RationalFunction:
    """``scale * p(z) / prod (z - pole)``.

    With a ``basis`` the numerator is ``sum c_j q_j``; otherwise the
    coefficients are ascending monomial coefficients.
    """

    coefficients: ComplexArray
    poles: ComplexArray
    scale: complex = 1.0
    basis: Optional[OrthonormalBasis] = None
    residual: float = 0.0
    gram_residual: float = 0.0
    ill_conditioned: bool = False

    @property
    def numerator_degree(self) -> int:
        return int(np.asarray(self.coefficients).size) - 1

    @property
    def n(self) -> int:
        return int(np.asarray(self.poles).size)

    def numerator(self, z: ComplexArray) -> ComplexArray:
        z = np.atleast_1d(np.asarray(z, dtype=np.complex128))
        if self.basis is not None:
            return (self.basis.evaluate(z.ravel()) @ self.coefficients).reshape(z.shape)
        return np.polynomial.polynomial.polyval(z, self.coefficients)

    def __call__(self, z: Union[complex, ComplexArray]) -> ComplexArray:
        z_arr = np.atleast_1d(np.asarray(z, dtype=np.complex128))
        poles = np.asarray(self.poles, dtype=np.complex128)
        q = np.prod(z_arr[..., None] - poles, axis=-1) if poles.size else np.ones(z_arr.shape)
        return self.scale * self.numerator(z_arr) / q


def blatt_bound(
    r: RationalFunction,
    K: SetDiscretization,
    z: Union[complex, ComplexArray],
    G: Optional[GreenField] = None,
    certified: bool = False,
    sup_nodes: Optional[ComplexArray] = None,
    order: int = DEFAULT_GREEN_ORDER,
    tol: float = DEFAULT_TOL,
) -> Union[float, RealArray]:
    """``||r||_K exp(sum_j g_K(z, a_j) + (deg p - n) g_K(z, inf))``.

    With ``certified`` every Green term is widened by the boundary deviation
    of its field so discretization error cannot make the bound undershoot.
    ``sup_nodes`` defaults to a four-fold refinement of ``K``.
    """
    G = G or equilibrium_measure(K, order, tol)
    if not G.regular_flag:
        raise PreconditionError("Blatt bound needs a Green field flagged regular")
    z_arr = np.atleast_1d(np.asarray(z, dtype=np.complex128))
    poles = np.asarray(r.poles, dtype=np.complex128)
    if poles.size and np.any(z_arr[..., None] == poles):
        raise PreconditionError("Blatt bound evaluated at a pole")
    nodes = refine(K).boundary_nodes if sup_nodes is None else sup_nodes
    sup_norm = float(np.max(np.abs(r(nodes))))

    excess = r.numerator_degree - r.n
    exponent = excess * np.asarray(green_infinity(G, z_arr))
    slack = abs(excess) * G.boundary_deviation if certified else 0.0
    for a in poles:
        exponent = exponent + np.asarray(green_pole(K, complex(a), z_arr, order, tol))
        if certified:
            slack += green_field_with_pole(K, complex(a), order, tol).boundary_deviation
    values = sup_norm * np.exp(exponent + slack)
    return float(values.ravel()[0]) if np.ndim(z) == 0 else values.reshape(np.shape(z))


def _denominator(atoms: ComplexArray, poles: ComplexArray) -> ComplexArray:
    if poles.size == 0:
        return np.ones(atoms.shape, dtype=np.complex128)
    q = np.prod(atoms[:, None] - poles[None, :], axis=1)
    return q / np.max(np.abs(q))


def best_l2_fixed_poles(
    f_samples: Sequence[complex],
    mu: DiscreteMeasure,
    k: int,
    poles: Sequence[complex],
) -> RationalFunction:
    """Orthogonal projection of ``f`` onto ``{p / q : deg p <= k}`` in ``L2(mu)``.

    ``||f - p/q||_mu = ||f q - p||`` in the measure ``mu / |q|^2``, so the
    numerator comes from an Arnoldi basis of that measure.
    """
    poles_arr = np.asarray(poles, dtype=np.complex128)
    f = np.asarray(f_samples, dtype=np.complex128)
    if f.shape != mu.atoms.shape:
        raise PreconditionError("f must be sampled on the atoms of mu")
    if poles_arr.size and np.min(np.abs(mu.atoms[:, None] - poles_arr[None, :])) == 0.0:
        raise PreconditionError("a pole coincides with an atom of mu")
    q = _denominator(mu.atoms, poles_arr)
    weighted = DiscreteMeasure(mu.atoms, mu.weights / np.abs(q) ** 2, mu.mesh)
    B = orthonormalize(weighted, k)
    target = f * q
    coefficients = (B.values.conj().T * weighted.weights) @ target
    residual_values = target - B.values @ coefficients
    residual = float(math.sqrt(np.dot(weighted.weights, np.abs(residual_values) ** 2)))
    gram = gram_residual(B)
    ill = gram > 1e-8
    if ill:
        logger.warning("Fixed-pole span is ill-conditioned (Gram residual %.2e)", gram)
    scale = 1.0
    if poles_arr.size:
        raw = np.prod(mu.atoms[:, None] - poles_arr[None, :], axis=1)
        scale = float(np.max(np.abs(raw)))
    return RationalFunction(
        coefficients=coefficients,
        poles=poles_arr,
        scale=scale,
        basis=B,
        residual=residual,
        gram_residual=gram,
        ill_conditioned=ill,
    )


@dataclass
class SearchConfig:
    """Pole search settings.

    ``barrier`` is the least distance a pole keeps from ``K`` (poles never
    enter the hull); by default half the distance to the known
    singularities, else a tenth of the diameter of ``K``.
    """

    barrier: Optional[float] = None
    singularities: Sequence[complex] = ()
    candidates_per_side: int = 21
    max_iter: int = 400
    xatol: float = 1e-10
    fatol: float = 1e-13
    sup_factor: int = 4

    def resolve_barrier(self, K: SetDiscretization) -> float:
        if self.barrier is not None:
            return self.barrier
        if len(self.singularities):
            sing = np.asarray(self.singularities, dtype=np.complex128)
            distance = float(np.min(np.abs(sing[:, None] - K.boundary_nodes[None, :])))
            if distance > 0.0:
                return 0.5 * distance
        return 0.1 * K.extent


@dataclass
class ApproxResult:
    k: int
    n: int
    err_l2: float
    err_sup: float
    poles_found: ComplexArray
    trace: List[Dict[str, object]] = field(default_factory=list)

    @property
    def rate_l2(self) -> float:
        return self.err_l2 ** (1.0 / self.k) if self.k else self.err_l2

    @property
    def rate_sup(self) -> float:
        return self.err_sup ** (1.0 / self.k) if self.k else self.err_sup

    def to_dict(self) -> Dict[str, object]:
        return {
            "k": self.k,
            "n": self.n,
            "err_l2": self.err_l2,
            "err_sup": self.err_sup,
            "rate_l2": self.rate_l2,
            "rate_sup": self.rate_sup,
            "poles_found": [[float(p.real), float(p.imag)] for p in self.poles_found],
        }


class _PoleObjective:
    """Fast L2 error for trial poles: least squares in a fixed Arnoldi basis of ``mu``."""

    def __init__(self, f: ComplexArray, mu: DiscreteMeasure, k: int, K: SetDiscretization, barrier: float) -> None:
        self.f = f
        self.mu = mu
        self.K = K
        self.barrier = barrier
        self.values = orthonormalize(mu, k).values
        self.sqrt_w = np.sqrt(mu.weights)
        self.evaluations = 0

    def admissible(self, poles: ComplexArray) -> bool:
        if not np.all(np.isfinite(poles)):
            return False
        if np.any(hull_indicator(self.K, poles)):
            return False
        distance = np.min(np.abs(poles[:, None] - self.K.boundary_nodes[None, :]))
        return bool(distance >= self.barrier)

    def error(self, poles: ComplexArray) -> float:
        self.evaluations += 1
        q = _denominator(self.mu.atoms, poles)
        s = self.sqrt_w / np.abs(q)
        A = self.values * s[:, None]
        b = s * self.f * q
        coef, *_ = np.linalg.lstsq(A, b, rcond=None)
        return float(np.linalg.norm(b - A @ coef))

    def __call__(self, x: np.ndarray) -> float:
        poles = x[0::2] + 1j * x[1::2]
        if not self.admissible(poles):
            return math.inf
        return math.log(self.error(poles) + _TINY)


def _candidate_grid(K: SetDiscretization, per_side: int) -> ComplexArray:
    center = complex(np.mean(K.boundary_nodes))
    half = max(K.extent, 1e-6)
    axis = np.linspace(-half, half, per_side)
    X, Y = np.meshgrid(axis, axis)
    return (center + X + 1j * Y).ravel()


def best_l2_rational(
    f: ComplexMap,
    mu: DiscreteMeasure,
    K: SetDiscretization,
    k: int,
    n: int,
    config: Optional[SearchConfig] = None,
    initial_poles: Optional[Sequence[complex]] = None,
) -> ApproxResult:
    """Best L2 approximation of ``f`` by ``p/q`` with ``deg p <= k`` and at most ``n`` poles.

    Poles start from a greedy sweep of a candidate grid outside the barrier
    (or from ``initial_poles``) and are refined by Nelder-Mead on the log
    error, each step solving the linear numerator problem exactly. The
    result is an upper bound on the true best error.
    """
    if n > k:
        raise PreconditionError("pole count n must not exceed k")
    config = config or SearchConfig()
    barrier = config.resolve_barrier(K)
    f_atoms = np.asarray(f(mu.atoms), dtype=np.complex128)
    trace: List[Dict[str, object]] = []
    poles = np.zeros(0, dtype=np.complex128)

    if n > 0:
        objective = _PoleObjective(f_atoms, mu, k, K, barrier)
        if initial_poles is not None and len(initial_poles) == n and objective.admissible(np.asarray(initial_poles)):
            poles = np.asarray(initial_poles, dtype=np.complex128)
            trace.append({"stage": "warm-start", "error": objective.error(poles)})
        else:
            candidates = _candidate_grid(K, config.candidates_per_side)
            for _ in range(n):
                best_c, best_err = None, math.inf
                for c in candidates:
                    trial = np.append(poles, c)
                    if not objective.admissible(trial):
                        continue
                    err = objective.error(trial)
                    if err < best_err:
                        best_c, best_err = c, err
                if best_c is None:
                    raise PreconditionError("no admissible pole candidate outside the barrier")
                poles = np.append(poles, best_c)
            trace.append({"stage": "greedy", "error": objective.error(poles)})
        x0 = np.column_stack([poles.real, poles.imag]).ravel()
        result = minimize(
            objective,
            x0,
            method="Nelder-Mead",
            options={
                "xatol": config.xatol,
                "fatol": config.fatol,
                "maxiter": config.max_iter * n,
                "adaptive": n > 2,
            },
        )
        if np.isfinite(result.fun) and result.fun <= objective(x0):
            poles = result.x[0::2] + 1j * result.x[1::2]
        else:
            logger.info("Pole refinement rejected at k=%d", k)
        trace.append(
            {"stage": "nelder-mead", "error": math.exp(float(result.fun)) if np.isfinite(result.fun) else math.inf, "evaluations": objective.evaluations}
        )

    fit = best_l2_fixed_poles(f_atoms, mu, k, poles)
    sup_nodes = refine(K, config.sup_factor).boundary_nodes
    err_sup = max(
        float(np.max(np.abs(f(sup_nodes) - fit(sup_nodes)))),
        float(np.max(np.abs(f_atoms - fit(mu.atoms)))),
    )
    logger.debug("k=%d n=%d: err_l2=%.3e err_sup=%.3e", k, n, fit.residual, err_sup)
    return ApproxResult(k, n, fit.residual, err_sup, poles, trace)


def fixed_pole_sweep(
    f: ComplexMap, mu: DiscreteMeasure, k: int, candidates: Sequence[complex]
) -> Tuple[complex, float]:
    """Best single pole over a candidate list, by exact fixed-pole fits."""
    f_atoms = np.asarray(f(mu.atoms), dtype=np.complex128)
    errors = [best_l2_fixed_poles(f_atoms, mu, k, [c]).residual for c in candidates]
    best = int(np.argmin(errors))
    return complex(candidates[best]), float(errors[best])


class DecayClass(str, Enum):
    GEOMETRIC = "geometric"
    SUPERLINEAR = "superlinear"
    EXACT = "exact"
    NO_DECAY = "no-decay"


@dataclass
class RateReport:
    """Error decay of best approximations over ``k`` and the implied level ``r``."""

    n: int
    results: List[ApproxResult]
    rate_l2: float
    rate_sup: float
    predicted_r: float
    classification: DecayClass
    rates_consistent: bool
    checked_pole_sets: List[Dict[str, object]] = field(default_factory=list)

    def table(self) -> List[Dict[str, float]]:
        return [
            {
                "k": res.k,
                "err_l2": res.err_l2,
                "err_sup": res.err_sup,
                "rate_l2": res.rate_l2,
                "rate_sup": res.rate_sup,
            }
            for res in self.results
        ]

    def to_dict(self) -> Dict[str, object]:
        return {
            "n": self.n,
            "rate_l2": self.rate_l2,
            "rate_sup": self.rate_sup,
            "predicted_r": self.predicted_r if math.isfinite(self.predicted_r) else "inf",
            "classification": self.classification.value,
            "rates_consistent": self.rates_consistent,
            "checked_pole_sets": self.checked_pole_sets,
            "trace": [res.to_dict() | {"search": res.trace} for res in self.results],
        }


def _tail_rate(ks: np.ndarray, errors: np.ndarray) -> Tuple[float, float, float]:
    """Geometric rate over the tail, plus the slopes of its two halves."""
    first = ks.size // 2
    k_tail, e_tail = ks[first:], np.log(errors[first:])
    slope = float(np.polyfit(k_tail, e_tail, 1)[0])
    if k_tail.size < 6:
        return math.exp(slope), slope, slope
    mid = k_tail.size // 2
    early = float(np.polyfit(k_tail[: mid + 1], e_tail[: mid + 1], 1)[0])
    late = float(np.polyfit(k_tail[mid:], e_tail[mid:], 1)[0])
    return math.exp(slope), early, late


def overconvergence_rate(
    f: ComplexMap,
    K: SetDiscretization,
    mu: DiscreteMeasure,
    n: int,
    k_max: int,
    config: Optional[SearchConfig] = None,
    G: Optional[GreenField] = None,
    noise_floor: float = 1e-12,
    rate_gap: float = 0.05,
    superlinear_drop: float = 0.1,
) -> RateReport:
    """Run the best approximation for ``k = max(n, 1)..k_max`` and fit the error decay.

    Each degree warm-starts from the poles of the previous one. Errors at
    or below ``noise_floor`` (relative to ``||f||_K``) are excluded from the
    fit; with fewer than four usable errors the decay counts as exact.
    """
    G = G or equilibrium_measure(K)
    if not G.regular_flag:
        raise PreconditionError("overconvergence needs a Green field flagged regular")
    ks = list(range(max(n, 1), k_max + 1))
    if len(ks) < 4:
        raise PreconditionError("need at least four degrees between n and k_max")
    results: List[ApproxResult] = []
    poles: Optional[ComplexArray] = None
    for k in ks:
        res = best_l2_rational(f, mu, K, k, n, config, poles)
        poles = res.poles_found
        results.append(res)

    scale = max(1.0, float(np.max(np.abs(f(K.boundary_nodes)))))
    floor = noise_floor * scale
    k_arr = np.asarray(ks, dtype=np.float64)
    l2 = np.asarray([r.err_l2 for r in results])
    sup = np.asarray([r.err_sup for r in results])
    usable = (l2 > floor) & (sup > floor)

    rate_l2 = rate_sup = 0.0
    if usable.sum() < 4:
        cls = DecayClass.EXACT
        predicted = math.inf
    else:
        rate_l2, early, late = _tail_rate(k_arr[usable], l2[usable])
        rate_sup, _, _ = _tail_rate(k_arr[usable], sup[usable])
        if rate_l2 >= 0.99:
            cls, predicted = DecayClass.NO_DECAY, 1.0
        elif late < early - superlinear_drop:
            cls, predicted = DecayClass.SUPERLINEAR, math.inf
        else:
            cls, predicted = DecayClass.GEOMETRIC, 1.0 / rate_l2
    consistent = abs(rate_l2 - rate_sup) <= rate_gap
    if not consistent:
        logger.warning("L2 rate %.4f and sup rate %.4f differ", rate_l2, rate_sup)

    checked: List[Dict[str, object]] = []
    if poles is not None and poles.size:
        diag = hull_inheritance(K, from_points(poles))
        checked.append({"poles": [[float(p.real), float(p.imag)] for p in poles]} | diag.to_dict())
    logger.info("Decay %s with predicted r=%s", cls.value, predicted)
    return RateReport(n, results, rate_l2, rate_sup, predicted, cls, consistent, checked)
