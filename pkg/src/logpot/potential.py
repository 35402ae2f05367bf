"""Logarithmic potentials, Leja/Fekete points, capacity and Green functions."""

import itertools
import logging
import math
import threading
import weakref
from collections import OrderedDict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.spatial import cKDTree

from .errors import DegenerateSetError, PreconditionError, ResolutionError
from .geometry import ComplexArray, RealArray, SetDiscretization, BoolArray, map_set
from .measures import DiscreteMeasure

logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-2
DEFAULT_GREEN_ORDER = 512
DEFAULT_TAIL_FRACTION = 0.5
DEFAULT_DISAGREEMENT = 0.10
FEKETE_MAX_POOL = 64
FEKETE_MAX_ORDER = 7
_CHUNK = 1024


def log_potential(sigma: DiscreteMeasure, z: Union[complex, ComplexArray]) -> Union[float, RealArray]:
    """``U(z) = -sum w_i log|z - a_i|``; ``+inf`` at atoms, ``0`` for the zero measure."""
    points = np.atleast_1d(np.asarray(z, dtype=np.complex128))
    flat = points.ravel()
    out = np.zeros(flat.size)
    if sigma.size:
        with np.errstate(divide="ignore"):
            for start in range(0, flat.size, _CHUNK):
                block = flat[start : start + _CHUNK]
                out[start : start + block.size] = -(
                    np.log(np.abs(block[:, None] - sigma.atoms[None, :])) @ sigma.weights
                )
    if np.ndim(z) == 0:
        return float(out[0])
    return out.reshape(points.shape)


def energy(mu: DiscreteMeasure) -> float:
    """Off-diagonal logarithmic energy ``sum_{i != j} w_i w_j log(1/|a_i - a_j|)``.

    Coincident atoms give ``+inf``, which is logged as a warning.
    """
    if mu.size < 2:
        raise PreconditionError("energy needs at least two atoms")
    total = 0.0
    with np.errstate(divide="ignore"):
        for start in range(0, mu.size, _CHUNK):
            block = mu.atoms[start : start + _CHUNK]
            logs = -np.log(np.abs(block[:, None] - mu.atoms[None, :]))
            rows = np.arange(block.size)
            logs[rows, rows + start] = 0.0
            total += float(mu.weights[start : start + block.size] @ logs @ mu.weights)
    if math.isinf(total):
        logger.warning("Energy is infinite: the measure has coincident atoms")
    return total


@dataclass(frozen=True, eq=False)
class LejaSequence:
    """Greedy Leja points with Vandermonde bookkeeping.

    ``running_products[j]`` is ``sum_{i<j} log|z_j - z_i|`` (0 for the first
    point) and ``kth_diameters[k-2]`` is ``delta_k`` for ``k = 2..len(points)``.
    """

    points: ComplexArray
    indices: Tuple[int, ...]
    running_products: RealArray
    kth_diameters: RealArray

    @property
    def orders(self) -> np.ndarray:
        return np.arange(2, self.points.size + 1)

    def __len__(self) -> int:
        return int(self.points.size)


def _kth_diameters(increments: RealArray) -> RealArray:
    log_v = np.cumsum(increments)[1:]
    k = np.arange(2, increments.size + 1)
    return np.exp(2.0 * log_v / (k * (k - 1)))


def _neighbors(K: SetDiscretization, index: int) -> Tuple[Optional[complex], Optional[complex]]:
    for comp in K.components:
        if comp.start <= index < comp.stop and comp.curve:
            size = comp.stop - comp.start
            local = index - comp.start
            before = local - 1 if local > 0 else (size - 1 if comp.closed else None)
            after = local + 1 if local < size - 1 else (0 if comp.closed else None)
            nodes = K.boundary_nodes
            return (
                None if before is None else complex(nodes[comp.start + before]),
                None if after is None else complex(nodes[comp.start + after]),
            )
    return None, None


def _refine_point(K: SetDiscretization, index: int, chosen: Sequence[complex]) -> complex:
    """Local line search along the polyline through the neighbors of a node."""
    center = complex(K.boundary_nodes[index])
    before, after = _neighbors(K, index)
    if before is None and after is None:
        return center
    chosen_arr = np.asarray(chosen, dtype=np.complex128)

    def position(t: float) -> complex:
        if t >= 0:
            return center + t * ((after if after is not None else center) - center)
        return center - t * ((before if before is not None else center) - center)

    def objective(t: float) -> float:
        with np.errstate(divide="ignore"):
            return -float(np.sum(np.log(np.abs(position(t) - chosen_arr))))

    lo = -0.5 if before is not None else 0.0
    hi = 0.5 if after is not None else 0.0
    result = minimize_scalar(objective, bounds=(lo, hi), method="bounded")
    if result.success and result.fun < objective(0.0):
        return position(float(result.x))
    return center


def leja_points(K: SetDiscretization, k: int, refine: bool = False) -> LejaSequence:
    """Greedy Leja sequence of ``k`` points on the nodes of ``K``.

    The first point is the node of largest modulus; each next point maximizes
    the product of distances to the points chosen so far. Ties go to the
    lowest node index.

    Args:
        K: Node pool.
        k: Number of points.
        refine: Move each chosen point by a local line search along the boundary.

    Returns:
        The sequence with its running products and k-th diameters.
    """
    nodes = K.boundary_nodes
    if k < 1:
        raise PreconditionError("k must be positive")
    if nodes.size < k:
        raise DegenerateSetError(f"only {nodes.size} candidate nodes for {k} Leja points")
    score = np.zeros(nodes.size)
    taken = np.zeros(nodes.size, dtype=bool)
    points: List[complex] = []
    indices: List[int] = []
    increments = np.zeros(k)
    for j in range(k):
        if j == 0:
            idx = int(np.argmax(np.abs(nodes)))
        else:
            masked = np.where(taken, -np.inf, score)
            idx = int(np.argmax(masked))
            if not np.isfinite(masked[idx]):
                raise DegenerateSetError("Leja candidates exhausted by coincident nodes")
        point = complex(nodes[idx])
        if refine and j > 0:
            point = _refine_point(K, idx, points)
        if j > 0:
            with np.errstate(divide="ignore"):
                increments[j] = float(np.sum(np.log(np.abs(point - np.asarray(points)))))
        points.append(point)
        indices.append(idx)
        taken[idx] = True
        with np.errstate(divide="ignore"):
            score += np.log(np.abs(nodes - point))
    pts = np.asarray(points, dtype=np.complex128)
    return LejaSequence(pts, tuple(indices), increments, _kth_diameters(increments))


def _log_vandermonde(L: np.ndarray, combo: Sequence[int]) -> float:
    return float(sum(L[i, j] for i, j in itertools.combinations(combo, 2)))


def _fekete_search(L: np.ndarray, r: int, bounds: Dict[int, float], start: List[int]) -> Tuple[float, Tuple[int, ...]]:
    n = L.shape[0]
    # incumbent: greedy start improved by single exchanges
    best_combo = sorted(start)
    best = _log_vandermonde(L, best_combo)
    improved = True
    while improved:
        improved = False
        for pos in range(r):
            for c in range(n):
                if c in best_combo:
                    continue
                trial = sorted(best_combo[:pos] + best_combo[pos + 1 :] + [c])
                value = _log_vandermonde(L, trial)
                if value > best + 1e-12:
                    best, best_combo, improved = value, trial, True

    state = {"best": best, "combo": tuple(best_combo)}

    def dfs(chosen: List[int], last: int, value: float, gains: np.ndarray) -> None:
        remaining = r - len(chosen)
        window = gains[last + 1 :]
        if window.size < remaining:
            return
        if remaining == 1:
            offset = int(np.argmax(window))
            total = value + float(window[offset])
            if total > state["best"] + 1e-12:
                state["best"] = total
                state["combo"] = tuple(chosen + [last + 1 + offset])
            return
        top = float(np.sort(window)[-remaining:].sum())
        if value + top + bounds.get(remaining, math.inf) <= state["best"] + 1e-12:
            return
        for offset in np.argsort(-window, kind="stable"):
            c = last + 1 + int(offset)
            if c > n - remaining:
                continue
            dfs(chosen + [c], c, value + float(gains[c]), gains + L[c])

    dfs([], -1, 0.0, np.zeros(n))
    return state["best"], state["combo"]


def fekete_points_exact(node_pool: Sequence[complex], k: int) -> ComplexArray:
    """Exact maximizer of the Vandermonde product over ``k``-subsets of a small pool.

    Branch and bound over index-ordered subsets, bounded by the exact optima
    of smaller orders.
    """
    pool = np.asarray(node_pool, dtype=np.complex128)
    if pool.size > FEKETE_MAX_POOL or k > FEKETE_MAX_ORDER:
        raise PreconditionError(
            f"exact Fekete search is limited to {FEKETE_MAX_POOL} nodes and "
            f"k <= {FEKETE_MAX_ORDER}; use leja_points"
        )
    if not 1 <= k <= pool.size:
        raise PreconditionError("k must lie between 1 and the pool size")
    if k == 1:
        return pool[[int(np.argmax(np.abs(pool)))]]
    with np.errstate(divide="ignore"):
        L = np.log(np.abs(pool[:, None] - pool[None, :]))
    np.fill_diagonal(L, -np.inf)
    bounds: Dict[int, float] = {1: 0.0}
    combo: Tuple[int, ...] = ()
    for r in range(2, k + 1):
        greedy = list(leja_points_from_pool(pool, r))
        bounds[r], combo = _fekete_search(np.where(np.isinf(L), -1e300, L), r, bounds, greedy)
    return pool[list(combo)]


def leja_points_from_pool(pool: ComplexArray, k: int) -> List[int]:
    """Indices of a greedy Leja sequence on a bare point array."""
    score = np.zeros(pool.size)
    chosen = [int(np.argmax(np.abs(pool)))]
    for _ in range(1, k):
        with np.errstate(divide="ignore"):
            score += np.log(np.abs(pool - pool[chosen[-1]]))
        masked = score.copy()
        masked[chosen] = -np.inf
        chosen.append(int(np.argmax(masked)))
    return chosen


def vandermonde_product(points: Sequence[complex]) -> float:
    """``prod_{i<j} |z_i - z_j|``."""
    z = np.asarray(points, dtype=np.complex128)
    i, j = np.triu_indices(z.size, 1)
    return float(np.prod(np.abs(z[i] - z[j])))


@dataclass
class CapacityDiagnostics:
    """Cross-check between the two capacity estimators."""

    k_max: int
    deltas: List[float] = field(default_factory=list)
    extrapolated: float = 0.0
    energy_estimate: float = 0.0
    relative_gap: float = 0.0
    disagreement: bool = False
    fit: Tuple[float, float, float] = (0.0, 0.0, 0.0)
    polar: bool = False
    note: str = ""

    def to_dict(self) -> Dict[str, object]:
        return {
            "k_max": self.k_max,
            "extrapolated": self.extrapolated,
            "energy_estimate": self.energy_estimate,
            "relative_gap": self.relative_gap,
            "disagreement": self.disagreement,
            "fit": list(self.fit),
            "polar": self.polar,
            "note": self.note,
        }


def _capacity_from_leja(
    leja: LejaSequence,
    tail_fraction: float = DEFAULT_TAIL_FRACTION,
    disagreement: float = DEFAULT_DISAGREEMENT,
) -> Tuple[float, CapacityDiagnostics]:
    deltas = leja.kth_diameters
    orders = leja.orders
    k_max = len(leja)
    diagnostics = CapacityDiagnostics(k_max=k_max, deltas=[float(d) for d in deltas])
    first = max(2, int(math.ceil((1.0 - tail_fraction) * k_max)))
    tail = orders >= first
    if tail.sum() >= 4:
        k = orders[tail].astype(np.float64)
        design = np.column_stack([np.ones_like(k), np.log(k) / k, 1.0 / k])
        coef, *_ = np.linalg.lstsq(design, np.log(deltas[tail]), rcond=None)
        extrapolated = float(np.exp(coef[0]))
        diagnostics.fit = (float(coef[0]), float(coef[1]), float(coef[2]))
        if abs(coef[0] - math.log(deltas[-1])) > 0.5:
            diagnostics.note = "extrapolation unstable; using last k-th diameter"
            extrapolated = float(deltas[-1])
    else:
        extrapolated = float(deltas[-1])
        diagnostics.note = "too few orders for extrapolation"
    # pairwise distances of the points, not the running products behind delta_k
    energy_estimate = float(math.exp(-energy(DiscreteMeasure.counting(leja.points))))
    gap = abs(extrapolated - energy_estimate) / max(extrapolated, 1e-300)
    diagnostics.extrapolated = extrapolated
    diagnostics.energy_estimate = energy_estimate
    diagnostics.relative_gap = float(gap)
    diagnostics.disagreement = bool(gap > disagreement)
    if diagnostics.disagreement:
        logger.warning(
            "Capacity estimators disagree by %.1f%% (resolution too low?)", 100 * gap
        )
    return extrapolated, diagnostics


def capacity_estimate(
    K: SetDiscretization,
    k_max: int = 128,
    tail_fraction: float = DEFAULT_TAIL_FRACTION,
    disagreement: float = DEFAULT_DISAGREEMENT,
    refine: bool = False,
) -> Tuple[float, CapacityDiagnostics]:
    """Logarithmic capacity from the k-th diameters of a Leja sequence.

    The primary value extrapolates ``log delta_k = a + b log(k)/k + c/k`` over
    the tail of the sequence; the energy of the Leja counting measure is the
    cross-check. Polar sets return 0.
    """
    if K.is_polar:
        return 0.0, CapacityDiagnostics(k_max=0, polar=True)
    if K.size < k_max:
        raise PreconditionError(f"set has {K.size} nodes, fewer than k_max={k_max}")
    return _capacity_from_leja(leja_points(K, k_max, refine), tail_fraction, disagreement)


@dataclass(frozen=True, eq=False)
class GreenField:
    """Equilibrium atoms and capacity of a set; evaluates ``g_K(z, inf)``."""

    capacity: float
    equilibrium: DiscreteMeasure
    regular_flag: bool
    boundary_deviation: float
    leja: LejaSequence
    diagnostics: CapacityDiagnostics

    def __call__(self, z: Union[complex, ComplexArray]) -> Union[float, RealArray]:
        return green_infinity(self, z)


def _boundary_probes(K: SetDiscretization, atoms: ComplexArray) -> ComplexArray:
    """Points on K away from the atoms: curve midpoints plus non-atom nodes."""
    probes = []
    for comp in K.components:
        nodes = K.boundary_nodes[comp.start : comp.stop]
        if comp.curve and nodes.size > 1:
            ahead = np.roll(nodes, -1) if comp.closed else nodes[1:]
            base = nodes if comp.closed else nodes[:-1]
            probes.append(0.5 * (base + ahead))
        else:
            probes.append(nodes)
    candidates = np.concatenate(probes)
    if atoms.size:
        tree = cKDTree(np.column_stack([atoms.real, atoms.imag]))
        distance, _ = tree.query(np.column_stack([candidates.real, candidates.imag]))
        candidates = candidates[distance > 1e-9 * max(1.0, K.extent)]
    return candidates


def equilibrium_measure(
    K: SetDiscretization,
    k: int = DEFAULT_GREEN_ORDER,
    tol: float = DEFAULT_TOL,
    tail_fraction: float = DEFAULT_TAIL_FRACTION,
) -> GreenField:
    """Green field of ``K`` from ``k`` Leja points carrying weight ``1/k`` each."""
    if K.is_polar:
        raise DegenerateSetError("equilibrium measure needs a non-polar set")
    k = min(k, K.size)
    leja = leja_points(K, k)
    capacity, diagnostics = _capacity_from_leja(leja, tail_fraction)
    equilibrium = DiscreteMeasure.counting(leja.points)
    probes = _boundary_probes(K, equilibrium.atoms)
    if probes.size:
        raw = -np.asarray(log_potential(equilibrium, probes)) - math.log(capacity)
        deviation = float(np.max(np.abs(raw)))
        overshoot = float(np.max(raw))
    else:
        deviation = overshoot = 0.0
    regular = overshoot <= 10.0 * tol
    logger.debug(
        "Green field: cap=%.6g, k=%d, deviation=%.3g, regular=%s",
        capacity,
        k,
        deviation,
        regular,
    )
    return GreenField(capacity, equilibrium, regular, deviation, leja, diagnostics)


def green_infinity(G: GreenField, z: Union[complex, ComplexArray]) -> Union[float, RealArray]:
    """``max(0, -U(z) - log cap)``."""
    raw = -np.asarray(log_potential(G.equilibrium, z)) - math.log(G.capacity)
    values = np.maximum(raw, 0.0)
    return float(values) if np.ndim(z) == 0 else values


def bernstein_walsh_bound(
    sup_norm: float, degree: int, G: GreenField, z: Union[complex, ComplexArray]
) -> Union[float, RealArray]:
    """``|p(z)| <= ||p||_K exp(deg p * g_K(z, inf))`` for a polynomial ``p``."""
    values = sup_norm * np.exp(degree * np.asarray(green_infinity(G, z)))
    return float(values) if np.ndim(z) == 0 else values


class PoleGreenCache:
    """Green fields of Moebius images ``1/(K - a)``, cached per quantized pole.

    Internally locked; safe to share between worker threads.
    """

    def __init__(self, K: SetDiscretization, order: int, tol: float, maxsize: int = 64) -> None:
        self._K = K
        self._order = order
        self._tol = tol
        self._maxsize = maxsize
        self._entries: "OrderedDict[Tuple[int, int, int, float], GreenField]" = OrderedDict()
        self._lock = threading.Lock()
        self.hits = 0
        self.misses = 0

    def _key(self, a: complex) -> Tuple[int, int, int, float]:
        quantum = self._K.mesh_spacing / 4.0
        return (round(a.real / quantum), round(a.imag / quantum), self._order, self._tol)

    def get(self, a: complex) -> GreenField:
        key = self._key(a)
        with self._lock:
            if key in self._entries:
                self._entries.move_to_end(key)
                self.hits += 1
                return self._entries[key]
        image = map_set(self._K, lambda z: 1.0 / (z - a))
        field_ = equilibrium_measure(image, self._order, self._tol)
        with self._lock:
            self.misses += 1
            self._entries[key] = field_
            while len(self._entries) > self._maxsize:
                self._entries.popitem(last=False)
        return field_


_caches: "weakref.WeakKeyDictionary[SetDiscretization, Dict[Tuple[int, float], PoleGreenCache]]" = (
    weakref.WeakKeyDictionary()
)
_caches_lock = threading.Lock()


def pole_cache(K: SetDiscretization, order: int = DEFAULT_GREEN_ORDER, tol: float = DEFAULT_TOL) -> PoleGreenCache:
    """Shared pole cache of ``K`` for the given order and tolerance."""
    with _caches_lock:
        per_set = _caches.setdefault(K, {})
        if (order, tol) not in per_set:
            per_set[(order, tol)] = PoleGreenCache(K, order, tol)
        return per_set[(order, tol)]


def check_pole(K: SetDiscretization, a: complex) -> None:
    """Reject poles within three mesh spacings of ``K``."""
    distance = float(np.min(np.abs(K.boundary_nodes - a)))
    floor = 3.0 * K.mesh_spacing
    if distance < floor:
        raise ResolutionError("pole distance to K", distance, floor)


def green_field_with_pole(
    K: SetDiscretization, a: complex, order: int = DEFAULT_GREEN_ORDER, tol: float = DEFAULT_TOL
) -> GreenField:
    """Green field of ``eta_a(K)`` with ``eta_a(z) = 1/(z - a)``."""
    check_pole(K, a)
    return pole_cache(K, order, tol).get(complex(a))


def green_pole(
    K: SetDiscretization,
    a: complex,
    z: Union[complex, ComplexArray],
    order: int = DEFAULT_GREEN_ORDER,
    tol: float = DEFAULT_TOL,
) -> Union[float, RealArray]:
    """``g_K(z, a) = g_{eta_a(K)}(eta_a(z), inf)``."""
    G = green_field_with_pole(K, a, order, tol)
    z_arr = np.asarray(z, dtype=np.complex128)
    if np.any(z_arr == a):
        raise PreconditionError("Green function evaluated at its pole")
    values = green_infinity(G, 1.0 / (z_arr - a))
    return float(values) if np.ndim(z) == 0 else values


def leja_pole_configuration(P: SetDiscretization, m: int) -> ComplexArray:
    """``m`` poles in Leja order on ``P``, cycling with multiplicity if ``P`` is small."""
    if m <= 0:
        return np.zeros(0, dtype=np.complex128)
    distinct = min(m, P.size)
    order = leja_points(P, distinct).points
    return np.asarray([order[i % distinct] for i in range(m)], dtype=np.complex128)


@dataclass
class ProbeRow:
    index: int
    capacity: float
    capacity_gap: float
    green_gap: float


@dataclass
class ProbeReport:
    """Capacity and Green-function gaps along a family of subsets."""

    capacity: float
    rows: List[ProbeRow]
    capacity_decreasing: bool
    green_decreasing: bool
    co_moving: bool

    def table(self) -> List[Dict[str, float]]:
        return [
            {
                "j": row.index,
                "capacity": row.capacity,
                "capacity_gap": row.capacity_gap,
                "green_gap": row.green_gap,
            }
            for row in self.rows
        ]


def _nonincreasing(values: Sequence[float], noise: float) -> bool:
    return all(b <= a + noise for a, b in zip(values, values[1:]))


def green_convergence_probe(
    K: SetDiscretization,
    subsets: Sequence[SetDiscretization],
    P: SetDiscretization,
    grid: ComplexArray,
    k_max: int = 128,
    order: int = DEFAULT_GREEN_ORDER,
    max_poles: int = 8,
    noise: float = 2e-3,
    max_workers: int = 4,
) -> ProbeReport:
    """Tabulate ``cap(K_j)`` and ``sup |g_{K_j}(z, a) - g_K(z, a)|`` over a subset family.

    The supremum runs over the grid and up to ``max_poles`` Leja points of ``P``.
    """
    tree = cKDTree(np.column_stack([K.boundary_nodes.real, K.boundary_nodes.imag]))
    for j, sub in enumerate(subsets):
        distance, _ = tree.query(np.column_stack([sub.boundary_nodes.real, sub.boundary_nodes.imag]))
        if np.any(distance > 1e-12 * max(1.0, K.extent)):
            raise PreconditionError(f"subset {j} has nodes outside K")
    poles = leja_points(P, min(max_poles, P.size)).points
    grid = np.asarray(grid, dtype=np.complex128).ravel()
    cap_K, _ = capacity_estimate(K, min(k_max, K.size))
    reference = {complex(a): np.asarray(green_pole(K, a, grid, order)) for a in poles}

    def measure(j: int) -> ProbeRow:
        sub = subsets[j]
        cap_j, _ = capacity_estimate(sub, min(k_max, sub.size))
        gap = 0.0
        for a in poles:
            values = np.asarray(green_pole(sub, a, grid, order))
            gap = max(gap, float(np.max(np.abs(values - reference[complex(a)]))))
        return ProbeRow(j, cap_j, abs(cap_K - cap_j), gap)

    with ThreadPoolExecutor(max_workers=max_workers) as executor:
        rows = list(executor.map(measure, range(len(subsets))))
    cap_gaps = [row.capacity_gap for row in rows]
    green_gaps = [row.green_gap for row in rows]
    cap_dec = _nonincreasing(cap_gaps, noise)
    green_dec = _nonincreasing(green_gaps, noise)
    return ProbeReport(cap_K, rows, cap_dec, green_dec, cap_dec == green_dec)


def level_set_D_r(G: GreenField, r: float, grid: ComplexArray) -> BoolArray:
    """Mask of ``{g_K(z, inf) < log r}`` on a grid."""
    if not G.regular_flag:
        raise PreconditionError("level sets need a Green field flagged regular")
    if r <= 1.0:
        raise PreconditionError("level r must exceed 1")
    return np.asarray(np.asarray(green_infinity(G, grid)) < math.log(r))
