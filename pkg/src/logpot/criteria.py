"""Mass-density (Lambda*) criterion and separating maps ``f = 1/q_m``."""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import PreconditionError, ResolutionError, SeparationError
from .geometry import (
    BoolArray,
    ComplexArray,
    SetDiscretization,
    epsilon_neighborhood,
    hull_indicator,
    map_set,
    set_distance,
)
from .measures import DiscreteMeasure, ball_masses, check_support, pushforward
from .potential import capacity_estimate, leja_points

logger = logging.getLogger(__name__)


class Verdict(str, Enum):
    PASSES = "passes"
    FAILS = "fails"
    INCONCLUSIVE = "inconclusive"


@dataclass
class LambdaStarReport:
    """Capacities of ``A_{r,t} = {z in K : mu(B(z, r)) >= r^t}`` along a schedule.

    ``cap_Ar`` and ``verdict`` use the threshold ``r^t (1 - mass_rtol)``;
    the ``strict_*`` fields use ``r^t`` itself.
    """

    t: float
    schedule: List[float]
    cap_Ar: List[float]
    cap_K: float
    verdict: Verdict
    subset_sizes: List[int] = field(default_factory=list)
    exceeds_cap_K: bool = False
    mass_rtol: float = 0.0
    strict_cap_Ar: List[float] = field(default_factory=list)
    strict_subset_sizes: List[int] = field(default_factory=list)
    strict_verdict: Optional[Verdict] = None

    @property
    def strict_agrees(self) -> bool:
        return self.strict_verdict is None or self.strict_verdict is self.verdict

    def table(self) -> List[Dict[str, float]]:
        strict_caps = self.strict_cap_Ar or self.cap_Ar
        strict_sizes = self.strict_subset_sizes or self.subset_sizes
        return [
            {
                "r": r,
                "cap_Ar": cap,
                "subset_size": size,
                "ratio": cap / self.cap_K if self.cap_K else 0.0,
                "strict_cap_Ar": strict_cap,
                "strict_subset_size": strict_size,
            }
            for r, cap, size, strict_cap, strict_size in zip(
                self.schedule, self.cap_Ar, self.subset_sizes, strict_caps, strict_sizes
            )
        ]

    def to_dict(self) -> Dict[str, object]:
        return {
            "t": self.t,
            "schedule": self.schedule,
            "cap_Ar": self.cap_Ar,
            "cap_K": self.cap_K,
            "verdict": self.verdict.value,
            "subset_sizes": self.subset_sizes,
            "exceeds_cap_K": self.exceeds_cap_K,
            "mass_rtol": self.mass_rtol,
            "strict_cap_Ar": self.strict_cap_Ar,
            "strict_subset_sizes": self.strict_subset_sizes,
            "strict_verdict": self.strict_verdict.value if self.strict_verdict else None,
        }


def _verdict(cap_last: float, cap_K: float, pass_rtol: float, fail_rtol: float) -> Verdict:
    if cap_last >= (1.0 - pass_rtol) * cap_K:
        return Verdict.PASSES
    if cap_last < (1.0 - fail_rtol) * cap_K:
        return Verdict.FAILS
    return Verdict.INCONCLUSIVE


def _check_schedule(schedule: Sequence[float], floor: float) -> List[float]:
    values = [float(r) for r in schedule]
    if not values:
        raise PreconditionError("radius schedule is empty")
    if any(b >= a for a, b in zip(values, values[1:])):
        raise PreconditionError("radius schedule must be strictly decreasing")
    if values[-1] < floor:
        raise ResolutionError("r", values[-1], floor)
    return values


def _ball_mass_table(
    K: SetDiscretization, mu: DiscreteMeasure, t: float, schedule: Sequence[float]
) -> Tuple[List[float], np.ndarray]:
    if t <= 0:
        raise PreconditionError("t must be positive")
    radii = _check_schedule(schedule, 3.0 * K.mesh_spacing)
    check_support(mu.atoms, K)
    return radii, ball_masses(mu, K.boundary_nodes, radii)


def _threshold(masses: np.ndarray, radii: Sequence[float], t: float, mass_rtol: float) -> List[BoolArray]:
    return [masses[i] >= (r**t) * (1.0 - mass_rtol) for i, r in enumerate(radii)]


def density_masks(
    K: SetDiscretization,
    mu: DiscreteMeasure,
    t: float,
    schedule: Sequence[float],
    mass_rtol: float = 0.0,
) -> Tuple[List[float], List[BoolArray]]:
    """Node masks of ``A_{r,t}`` for every radius of the schedule.

    The default threshold is ``r^t`` exactly. A positive ``mass_rtol`` lowers
    it to ``r^t (1 - mass_rtol)`` to absorb the quadrature error of
    discretized ball masses.
    """
    radii, masses = _ball_mass_table(K, mu, t, schedule)
    return radii, _threshold(masses, radii, t, mass_rtol)


def _density_report(
    K: SetDiscretization,
    t: float,
    radii: List[float],
    masses: np.ndarray,
    cap_ref: float,
    k_max: int,
    transform: Optional[Callable[[ComplexArray], ComplexArray]],
    pass_rtol: float,
    fail_rtol: float,
    mass_rtol: float,
    max_workers: int,
) -> LambdaStarReport:
    masks = _threshold(masses, radii, t, mass_rtol)
    strict = _threshold(masses, radii, t, 0.0)
    caps = _capacities(K, masks, k_max, transform, max_workers)
    # only the radii whose strict set differs need their own capacity
    differ = [i for i, (a, b) in enumerate(zip(masks, strict)) if not np.array_equal(a, b)]
    strict_caps = list(caps)
    if differ:
        redone = _capacities(K, [strict[i] for i in differ], k_max, transform, max_workers)
        for i, cap in zip(differ, redone):
            strict_caps[i] = cap
    verdict = _verdict(caps[-1], cap_ref, pass_rtol, fail_rtol)
    strict_verdict = _verdict(strict_caps[-1], cap_ref, pass_rtol, fail_rtol)
    if strict_verdict is not verdict:
        logger.warning(
            "Lambda* verdict %s with mass slack %g but %s with the strict threshold",
            verdict.value,
            mass_rtol,
            strict_verdict.value,
        )
    return LambdaStarReport(
        t=t,
        schedule=radii,
        cap_Ar=caps,
        cap_K=cap_ref,
        verdict=verdict,
        subset_sizes=[int(m.sum()) for m in masks],
        exceeds_cap_K=any(c > cap_ref * (1.0 + pass_rtol) for c in caps),
        mass_rtol=mass_rtol,
        strict_cap_Ar=strict_caps,
        strict_subset_sizes=[int(m.sum()) for m in strict],
        strict_verdict=strict_verdict,
    )


def subset_capacity(
    K: SetDiscretization,
    mask: BoolArray,
    k_max: int = 128,
    transform: Optional[Callable[[ComplexArray], ComplexArray]] = None,
) -> float:
    """Capacity of the selected nodes of ``K``, optionally after mapping them."""
    if int(mask.sum()) < 2:
        return 0.0
    sub = K.subset(mask)
    if transform is not None:
        sub = map_set(sub, transform)
    if sub.is_polar:
        return 0.0
    cap, _ = capacity_estimate(sub, min(k_max, sub.size))
    return cap


def _capacities(
    K: SetDiscretization,
    masks: Sequence[BoolArray],
    k_max: int,
    transform: Optional[Callable[[ComplexArray], ComplexArray]],
    max_workers: int,
) -> List[float]:
    with ThreadPoolExecutor(max_workers=max_workers) as executor:
        return list(executor.map(lambda m: subset_capacity(K, m, k_max, transform), masks))


def lambda_star_check(
    K: SetDiscretization,
    mu: DiscreteMeasure,
    t: float,
    schedule: Sequence[float],
    k_max: int = 128,
    pass_rtol: float = 0.02,
    fail_rtol: float = 0.10,
    mass_rtol: float = 0.02,
    max_workers: int = 4,
) -> LambdaStarReport:
    """Test whether ``cap(A_{r,t})`` approaches ``cap(K)`` as ``r`` decreases.

    Args:
        K: Discretized set.
        mu: Measure supported on ``K``.
        t: Density exponent.
        schedule: Strictly decreasing radii, none below three mesh spacings.
        k_max: Leja order for every capacity estimate.
        pass_rtol: Pass when the last capacity is within this fraction of ``cap(K)``.
        fail_rtol: Fail when it falls short by more than this fraction.
        mass_rtol: Relative slack on the ball-mass threshold; the strict
            ``r^t`` sets are reported alongside.
        max_workers: Radii evaluated concurrently.

    Returns:
        The report; the verdict is read at the smallest radius.
    """
    radii, masses = _ball_mass_table(K, mu, t, schedule)
    cap_K, _ = capacity_estimate(K, min(k_max, K.size))
    report = _density_report(
        K, t, radii, masses, cap_K, k_max, None, pass_rtol, fail_rtol, mass_rtol, max_workers
    )
    if report.exceeds_cap_K:
        logger.warning("Capacity of a subset exceeds cap(K); estimator resolution too low")
    logger.info(
        "Lambda* with t=%g: cap(A_r)/cap(K)=%.4f -> %s", t, report.cap_Ar[-1] / cap_K, report.verdict.value
    )
    return report


@dataclass
class SeparatingMap:
    """``f(z) = 1 / prod (scale * (z - w_j))`` with its verified modulus sandwich.

    ``max_K |f| < R1 < min_P |f| <= max_P |f| < R2``.
    """

    poles: ComplexArray
    R1: float
    R2: float
    max_K: float
    min_P: float
    max_P: float
    scale: float = 1.0
    margin: float = 0.0
    trace: List[Dict[str, float]] = field(default_factory=list)

    @property
    def m(self) -> int:
        return int(self.poles.size)

    def __call__(self, z: ComplexArray) -> ComplexArray:
        z = np.asarray(z, dtype=np.complex128)
        q = np.prod(self.scale * (z[..., None] - self.poles), axis=-1)
        return 1.0 / q

    def derivative(self, z: ComplexArray) -> ComplexArray:
        z = np.asarray(z, dtype=np.complex128)
        return -self(z) * np.sum(1.0 / (z[..., None] - self.poles), axis=-1)

    @property
    def sandwich_holds(self) -> bool:
        return self.max_K < self.R1 < self.min_P <= self.max_P < self.R2

    def to_dict(self) -> Dict[str, object]:
        return {
            "m": self.m,
            "poles": [[float(w.real), float(w.imag)] for w in self.poles],
            "R1": self.R1,
            "R2": self.R2,
            "max_K": self.max_K,
            "min_P": self.min_P,
            "max_P": self.max_P,
            "scale": self.scale,
            "margin": self.margin,
            "sandwich_holds": self.sandwich_holds,
            "trace": self.trace,
        }


def _check_separated(K: SetDiscretization, P: SetDiscretization) -> float:
    if np.any(hull_indicator(P, K.boundary_nodes)):
        raise PreconditionError("K meets the polynomial hull of P")
    distance = set_distance(K, P)
    if distance <= 0.0:
        raise PreconditionError("K and P overlap")
    return distance


def _certify(
    K: SetDiscretization,
    P: SetDiscretization,
    poles: ComplexArray,
    scale: float = 1.0,
    margin: float = 0.0,
    trace: Optional[List[Dict[str, float]]] = None,
) -> SeparatingMap:
    probe = SeparatingMap(poles, 0.0, 0.0, 0.0, 0.0, 0.0, scale)
    with np.errstate(divide="ignore"):
        on_K = np.abs(probe(K.boundary_nodes))
        on_P = np.abs(probe(P.boundary_nodes))
    max_K = float(on_K.max())
    min_P = float(on_P.min())
    max_P = float(on_P.max())
    R1 = math.sqrt(max_K * min_P)
    return SeparatingMap(poles, R1, 2.0 * max_P, max_K, min_P, max_P, scale, margin, trace or [])


def separating_map_from_poles(
    K: SetDiscretization, P: SetDiscretization, poles: Sequence[complex]
) -> SeparatingMap:
    """Certify a given pole choice by direct evaluation on every node of K and P."""
    _check_separated(K, P)
    poles_arr = np.asarray(poles, dtype=np.complex128)
    if poles_arr.size == 0:
        raise PreconditionError("a separating map needs at least one pole")
    result = _certify(K, P, poles_arr)
    if not (math.isfinite(result.max_P) and result.sandwich_holds):
        raise SeparationError(poles_arr.size, math.log(result.min_P / result.max_K), poles_arr.size)
    return result


def separating_map_build(
    K: SetDiscretization,
    P: SetDiscretization,
    rho: float,
    m_max: int = 8,
    eps: float = 0.05,
) -> SeparatingMap:
    """Search ``m = 1..m_max`` for poles on the boundary of the rho-neighborhood of P's hull.

    The poles are the first ``m`` Leja points of that boundary. Degree ``m``
    is accepted when ``log delta_m < min_K (1/m) log|q_m| - eps``, with
    ``delta_1`` the largest distance from the first pole to the pool.

    Raises:
        PreconditionError: K meets the hull of P, or ``rho`` is too large.
        SeparationError: No degree up to ``m_max`` passes; carries the best margin.
    """
    distance = _check_separated(K, P)
    if rho >= distance / 2.0:
        raise PreconditionError(f"rho={rho:g} must be below half the K-P distance {distance:.6g}")
    if m_max < 1:
        raise PreconditionError("m_max must be at least 1")
    neighborhood = epsilon_neighborhood(P, rho, use_hull=True)
    pool = neighborhood.boundary_nodes
    leja = leja_points(neighborhood, min(m_max, neighborhood.size))

    cap_pool = float(leja.kth_diameters[-1]) if len(leja) > 1 else float(np.max(np.abs(pool - leja.points[0])))
    scale = 1.0 if cap_pool < 1.0 else 0.5 / cap_pool
    if scale != 1.0:
        logger.info("Prescaling by %.4g so the pole pool has diameter below 1", scale)

    trace: List[Dict[str, float]] = []
    best_margin, best_m = -math.inf, None
    for m in range(1, len(leja) + 1):
        poles = leja.points[:m]
        if m == 1:
            log_delta = math.log(float(np.max(np.abs(pool - poles[0]))))
        else:
            log_delta = math.log(float(leja.kth_diameters[m - 2]))
        log_q = np.sum(np.log(np.abs(K.boundary_nodes[:, None] - poles[None, :])), axis=1) / m
        margin = float(log_q.min()) - eps - log_delta
        trace.append({"m": m, "log_delta": log_delta, "min_log_q": float(log_q.min()), "margin": margin})
        if margin > best_margin:
            best_margin, best_m = margin, m
        if margin > 0.0:
            result = _certify(K, P, poles, scale, margin, trace)
            if result.sandwich_holds:
                logger.info("Separating map found at m=%d (margin %.4g)", m, margin)
                return result
            logger.warning("Degree %d passed the test but failed direct verification", m)
    raise SeparationError(m_max, best_margin, best_m)


def lipschitz_constant(
    f_prime: Callable[[ComplexArray], ComplexArray], K: SetDiscretization, delta: float
) -> float:
    """Largest ``|f'|`` over the cells of the delta-neighborhood of ``K``."""
    region = epsilon_neighborhood(K, delta)
    points = np.concatenate([region.fill_grid.centers(region.fill_grid.occupied), K.boundary_nodes])
    return float(np.max(np.abs(f_prime(points))))


@dataclass
class HullInheritance:
    """Whether rational BMP follows from polynomial BMP for this pole set."""

    p_meets_hull: bool
    distance: float

    @property
    def inherited(self) -> bool:
        return not self.p_meets_hull

    def to_dict(self) -> Dict[str, object]:
        return {"p_meets_hull": self.p_meets_hull, "distance": self.distance, "inherited": self.inherited}


def hull_inheritance(K: SetDiscretization, P: SetDiscretization) -> HullInheritance:
    """Diagnose the hull case ``P`` disjoint from the polynomial hull of ``K``.

    There poles can be pushed to infinity by Runge approximation, so the
    rational property is inherited from the polynomial one.
    """
    meets = bool(np.any(hull_indicator(K, P.boundary_nodes)))
    return HullInheritance(meets, set_distance(K, P))


@dataclass
class MappedLambdaStar:
    """Lambda* on the image of a separating map, in both forms."""

    separating_map: SeparatingMap
    image_report: LambdaStarReport
    mapped_subset_report: LambdaStarReport
    lipschitz_measured: float
    cap_image_plain: float
    cap_image_refined: float
    capacities_agree: bool
    lipschitz_bound_holds: bool

    def to_dict(self) -> Dict[str, object]:
        return {
            "separating_map": self.separating_map.to_dict(),
            "image_form": self.image_report.to_dict(),
            "mapped_subset_form": self.mapped_subset_report.to_dict(),
            "lipschitz_measured": self.lipschitz_measured,
            "cap_image_plain": self.cap_image_plain,
            "cap_image_refined": self.cap_image_refined,
            "capacities_agree": self.capacities_agree,
            "lipschitz_bound_holds": self.lipschitz_bound_holds,
        }


def mapped_lambda_star(
    K: SetDiscretization,
    mu: DiscreteMeasure,
    P: SetDiscretization,
    t: float,
    schedule: Sequence[float],
    separating_map: Optional[SeparatingMap] = None,
    rho: float = 0.1,
    m_max: int = 8,
    eps: float = 0.05,
    delta: float = 0.1,
    k_max: int = 128,
    pass_rtol: float = 0.02,
    fail_rtol: float = 0.10,
    mass_rtol: float = 0.02,
    max_workers: int = 4,
) -> MappedLambdaStar:
    """Run the criterion on ``f(K)`` with ``f_* mu``, and on images of the sets ``A_{r,t}``.

    The image form thresholds ball masses of the pushforward on ``f(K)``;
    the mapped-subset form thresholds on ``K`` and compares
    ``cap(f(A_{r,t}))`` with ``cap(f(K))``. A map is built when none is given.
    """
    f = separating_map or separating_map_build(K, P, rho, m_max, eps)
    image = map_set(K, f)
    nu = pushforward(f, mu, mesh=image.mesh_spacing)
    floor = 3.0 * image.mesh_spacing
    image_schedule = [r for r in schedule if r >= floor]
    if not image_schedule:
        raise ResolutionError("r", float(max(schedule)), floor)
    if len(image_schedule) < len(schedule):
        logger.info("Image mesh resolves only %d of %d radii", len(image_schedule), len(schedule))
    image_report = lambda_star_check(
        image, nu, t, image_schedule, k_max, pass_rtol, fail_rtol, mass_rtol, max_workers
    )

    radii, masses = _ball_mass_table(K, mu, t, schedule)
    cap_plain, _ = capacity_estimate(image, min(k_max, image.size))
    cap_refined, _ = capacity_estimate(image, min(k_max, image.size), refine=True)
    agree = abs(cap_plain - cap_refined) <= 0.05 * cap_plain
    if not agree:
        logger.warning("Image capacity: plain %.5g vs refined %.5g", cap_plain, cap_refined)
    subset_report = _density_report(
        K, t, radii, masses, cap_plain, k_max, f, pass_rtol, fail_rtol, mass_rtol, max_workers
    )

    lipschitz = lipschitz_constant(f.derivative, K, delta)
    cap_K, _ = capacity_estimate(K, min(k_max, K.size))
    return MappedLambdaStar(
        separating_map=f,
        image_report=image_report,
        mapped_subset_report=subset_report,
        lipschitz_measured=lipschitz,
        cap_image_plain=cap_plain,
        cap_image_refined=cap_refined,
        capacities_agree=agree,
        lipschitz_bound_holds=cap_plain <= lipschitz * cap_K * (1.0 + pass_rtol),
    )
