"""Discrete measures: construction from scene specs, L2 norms and ball masses."""

import csv
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Annotated, Callable, Dict, List, Literal, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy.spatial import cKDTree

from .errors import PreconditionError, ResolutionError
from .geometry import (
    CircleSpec,
    ComplexArray,
    CompactSetSpec,
    Pair,
    RealArray,
    SetDiscretization,
    as_complex,
    discretize,
)

logger = logging.getLogger(__name__)

_CHUNK = 512
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
_SILVER = math.sqrt(2.0) - 1.0


@dataclass(frozen=True, eq=False)
class DiscreteMeasure:
    """Finitely many atoms with positive weights.

    ``mesh`` is the spacing of the discretization the atoms came from; ball
    masses below three times this spacing are not resolved.
    """

    atoms: ComplexArray
    weights: RealArray
    mesh: float = 0.0
    total_mass: float = field(init=False)

    def __post_init__(self) -> None:
        atoms = np.asarray(self.atoms, dtype=np.complex128).ravel()
        weights = np.asarray(self.weights, dtype=np.float64).ravel()
        if atoms.shape != weights.shape:
            raise PreconditionError("atoms and weights differ in length")
        if np.any(weights <= 0) or not np.all(np.isfinite(weights)):
            raise PreconditionError("measure weights must be positive and finite")
        if not np.all(np.isfinite(atoms)):
            raise PreconditionError("measure atoms must be finite")
        atoms.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "total_mass", float(weights.sum()))

    @classmethod
    def empty(cls) -> "DiscreteMeasure":
        return cls(np.zeros(0, dtype=np.complex128), np.zeros(0))

    @classmethod
    def point_masses(
        cls, points: Sequence[complex], weights: Optional[Sequence[float]] = None
    ) -> "DiscreteMeasure":
        atoms = np.asarray(points, dtype=np.complex128)
        w = np.ones(atoms.size) if weights is None else np.asarray(weights, dtype=np.float64)
        return cls(atoms, w)

    @classmethod
    def counting(cls, points: Sequence[complex], total: float = 1.0) -> "DiscreteMeasure":
        """Equal weights summing to ``total`` (the normalized counting measure by default)."""
        atoms = np.asarray(points, dtype=np.complex128)
        return cls(atoms, np.full(atoms.size, total / atoms.size))

    @property
    def size(self) -> int:
        return int(self.atoms.size)

    def normalized(self) -> "DiscreteMeasure":
        """Probability measure with the same atoms."""
        if self.size == 0:
            raise PreconditionError("cannot normalize the zero measure")
        return DiscreteMeasure(self.atoms, self.weights / self.total_mass, self.mesh)

    def scaled(self, factor: float) -> "DiscreteMeasure":
        return DiscreteMeasure(self.atoms, self.weights * factor, self.mesh)


def combine(measures: Sequence[DiscreteMeasure]) -> DiscreteMeasure:
    """Sum of measures (atoms concatenated)."""
    if not measures:
        return DiscreteMeasure.empty()
    return DiscreteMeasure(
        np.concatenate([m.atoms for m in measures]),
        np.concatenate([m.weights for m in measures]),
        max(m.mesh for m in measures),
    )


def _center_of(spec: BaseModel) -> complex:
    center = getattr(spec, "center", None)
    return as_complex(center) if center is not None else 0j


def uniform_density(z: ComplexArray, center: complex) -> RealArray:
    return np.ones(z.shape)


def bump_density(z: ComplexArray, center: complex) -> RealArray:
    """``exp(-1/(1-(theta/pi)^2))`` in the angle about ``center``; zero at theta = pi."""
    x = np.angle(z - center) / np.pi
    inside = np.abs(x) < 1.0
    values = np.zeros(z.shape)
    values[inside] = np.exp(-1.0 / (1.0 - x[inside] ** 2))
    return values


DENSITIES: Dict[str, Callable[[ComplexArray, complex], RealArray]] = {
    "uniform": uniform_density,
    "bump": bump_density,
}


class _MeasureSpecBase(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    coef: float = Field(1.0, gt=0, description="Multiplier applied to the realized part")


class ArclengthMeasureSpec(_MeasureSpecBase):
    """Density times arc length on a curve."""

    kind: Literal["arclength"] = "arclength"
    on: CompactSetSpec = Field(..., description="Curve carrying the measure")
    density: Literal["uniform", "bump"] = Field("uniform", description="Density id")
    scale: float = Field(1.0, gt=0, description="Normalization constant")


class AtomSpec(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    point: Pair
    weight: float = Field(..., gt=0)


class AtomicMeasureSpec(_MeasureSpecBase):
    """Explicit point masses."""

    kind: Literal["atomic"] = "atomic"
    atoms: List[AtomSpec] = Field(..., min_length=1)


class MixtureMeasureSpec(_MeasureSpecBase):
    """Sum of parts, each scaled by its own ``coef``."""

    kind: Literal["mixture"] = "mixture"
    parts: List["MeasureSpec"] = Field(..., min_length=1)


class MuCMeasureSpec(_MeasureSpecBase):
    """Circle arclength measure plus summable point masses dense in an annulus."""

    kind: Literal["mu_c"] = "mu_c"
    seed: int = Field(0, description="Offset of the low-discrepancy sequence")
    atoms: int = Field(64, ge=0, description="Number J of point masses kept")
    ratio: float = Field(0.5, gt=0, lt=1, description="Geometric weight ratio q")
    r_in: float = Field(0.5, gt=0)
    r_out: float = Field(1.0, gt=0)


class BumpMeasureSpec(_MeasureSpecBase):
    """Bump density ``exp(-1/(1-(theta/pi)^2)) ds`` on a circle."""

    kind: Literal["example3"] = "example3"
    on: CompactSetSpec = Field(default_factory=lambda: CircleSpec(radius=1.0))


MeasureSpec = Annotated[
    Union[
        ArclengthMeasureSpec,
        AtomicMeasureSpec,
        MixtureMeasureSpec,
        MuCMeasureSpec,
        BumpMeasureSpec,
    ],
    Field(discriminator="kind"),
]
MixtureMeasureSpec.model_rebuild()


def check_support(atoms: ComplexArray, K: SetDiscretization) -> None:
    """Reject atoms farther than one mesh spacing from ``K`` and off its cells."""
    if atoms.size == 0:
        return
    tree = cKDTree(np.column_stack([K.boundary_nodes.real, K.boundary_nodes.imag]))
    distances, _ = tree.query(np.column_stack([atoms.real, atoms.imag]))
    near = distances <= K.mesh_spacing * (1.0 + 1e-9)
    in_cells = K.fill_grid.lookup(K.fill_grid.occupied, atoms)
    off = ~(near | in_cells)
    if off.any():
        first = atoms[np.argmax(off)]
        raise PreconditionError(
            f"{int(off.sum())} atom(s) lie off the support, e.g. {first:.6g}"
        )


def _arclength(on: BaseModel, density: str, factor: float, K: SetDiscretization) -> DiscreteMeasure:
    carrier = discretize(on, K.resolution)  # type: ignore[arg-type]
    values = DENSITIES[density](carrier.boundary_nodes, _center_of(on))
    weights = factor * values * carrier.quad_weights
    keep = weights > 0
    return DiscreteMeasure(carrier.boundary_nodes[keep], weights[keep], K.mesh_spacing)


def realize(spec: BaseModel, K: SetDiscretization) -> DiscreteMeasure:
    """Realize a measure spec as a discrete measure supported on ``K``.

    Args:
        spec: Any measure spec.
        K: Discretized support; curve parts are sampled at its resolution.

    Returns:
        Measure with atoms on ``K`` and the mesh of ``K``.
    """
    measure = _realize(spec, K)
    check_support(measure.atoms, K)
    return measure


def _realize(spec: BaseModel, K: SetDiscretization) -> DiscreteMeasure:
    if isinstance(spec, ArclengthMeasureSpec):
        return _arclength(spec.on, spec.density, spec.coef * spec.scale, K)
    if isinstance(spec, BumpMeasureSpec):
        return _arclength(spec.on, "bump", spec.coef, K)
    if isinstance(spec, AtomicMeasureSpec):
        return DiscreteMeasure(
            np.array([as_complex(a.point) for a in spec.atoms], dtype=np.complex128),
            np.array([spec.coef * a.weight for a in spec.atoms]),
            K.mesh_spacing,
        )
    if isinstance(spec, MixtureMeasureSpec):
        return combine([_realize(part, K) for part in spec.parts]).scaled(spec.coef)
    if isinstance(spec, MuCMeasureSpec):
        measure, certificate = mu_c_generator(
            spec.seed,
            n_atoms=spec.atoms,
            ratio=spec.ratio,
            resolution=K.resolution,
            r_in=spec.r_in,
            r_out=spec.r_out,
        )
        if not certificate.certified:
            logger.warning("mu_c truncation not certified: %s", "; ".join(certificate.reasons))
        return DiscreteMeasure(measure.atoms, measure.weights * spec.coef, K.mesh_spacing)
    raise PreconditionError(f"unsupported measure spec {type(spec).__name__}")


def _aligned(mu: DiscreteMeasure, values: Sequence[complex]) -> np.ndarray:
    f = np.asarray(values)
    if f.shape != mu.atoms.shape:
        raise PreconditionError(
            f"{f.size} function values for a measure with {mu.size} atoms"
        )
    return f


def l2_norm(mu: DiscreteMeasure, f_values: Sequence[complex]) -> float:
    """``sqrt(sum w_i |f_i|^2)``."""
    f = _aligned(mu, f_values)
    return float(math.sqrt(np.dot(mu.weights, np.abs(f) ** 2)))


def inner_product(mu: DiscreteMeasure, f_values: Sequence[complex], g_values: Sequence[complex]) -> complex:
    """``sum w_i f_i conj(g_i)``."""
    f = _aligned(mu, f_values)
    g = _aligned(mu, g_values)
    return complex(np.sum(mu.weights * f * np.conj(g)))


def _check_radius(mu: DiscreteMeasure, r: float) -> None:
    floor = 3.0 * mu.mesh
    if r < floor:
        raise ResolutionError("r", r, floor)


def ball_mass(mu: DiscreteMeasure, z: complex, r: float) -> float:
    """Mass of the closed disk of radius ``r`` about ``z``."""
    _check_radius(mu, r)
    inside = np.abs(mu.atoms - z) <= r * (1.0 + 1e-12)
    return float(mu.weights[inside].sum())


def ball_masses(
    mu: DiscreteMeasure, centers: ComplexArray, radii: Sequence[float]
) -> RealArray:
    """Ball masses for every radius (rows) and center (columns)."""
    radii_arr = np.asarray(radii, dtype=np.float64)
    for r in radii_arr:
        _check_radius(mu, float(r))
    centers = np.asarray(centers, dtype=np.complex128)
    out = np.zeros((radii_arr.size, centers.size))
    for start in range(0, centers.size, _CHUNK):
        block = centers[start : start + _CHUNK]
        distance = np.abs(block[:, None] - mu.atoms[None, :])
        for i, r in enumerate(radii_arr):
            out[i, start : start + block.size] = (distance <= r * (1.0 + 1e-12)) @ mu.weights
    return out


def pushforward(
    f: Callable[[ComplexArray], ComplexArray],
    mu: DiscreteMeasure,
    mesh: Optional[float] = None,
) -> DiscreteMeasure:
    """Image measure: atoms mapped through ``f``, weights unchanged."""
    with np.errstate(divide="ignore", invalid="ignore"):
        images = np.asarray(f(mu.atoms), dtype=np.complex128)
    if not np.all(np.isfinite(images)):
        raise PreconditionError("map has a pole at an atom of the measure")
    return DiscreteMeasure(images, mu.weights, mu.mesh if mesh is None else mesh)


@dataclass
class MuCCertificate:
    """Numerical check of the summability assumptions on a truncated mu_c."""

    coefficients: List[float]
    points: List[Tuple[float, float]]
    exponents: List[int]
    terms: List[float]
    conditions: Dict[str, bool]
    truncation_slack: float
    certified: bool
    reasons: List[str] = field(default_factory=list)

    def to_dict(self) -> Dict[str, object]:
        return {
            "coefficients": self.coefficients,
            "points": self.points,
            "exponents": self.exponents,
            "terms": self.terms,
            "conditions": self.conditions,
            "truncation_slack": self.truncation_slack,
            "certified": self.certified,
            "reasons": self.reasons,
        }


def dense_sequence(seed: int, count: int, r_in: float = 0.5, r_out: float = 1.0) -> ComplexArray:
    """Deterministic low-discrepancy spiral, area-uniform in the annulus."""
    offset = np.random.default_rng(seed).random(2)
    j = np.arange(1, count + 1)
    u = np.mod(offset[0] + j * _GOLDEN, 1.0)
    v = np.mod(offset[1] + j * _SILVER, 1.0)
    radius = np.sqrt(r_in**2 + v * (r_out**2 - r_in**2))
    return radius * np.exp(2j * np.pi * u)


def mu_c_generator(
    seed: int,
    n_atoms: int = 64,
    ratio: float = 0.5,
    k_max: int = 20,
    exponent: Callable[[int], int] = lambda k: k * k,
    resolution: int = 256,
    tol: float = 1e-3,
    r_in: float = 0.5,
    r_out: float = 1.0,
) -> Tuple[DiscreteMeasure, MuCCertificate]:
    """Build ``(1/4pi) ds`` on the unit circle plus ``(1/2) sum c_j delta_{z_j}``.

    Args:
        seed: Offset of the dense sequence.
        n_atoms: Number J of point masses kept.
        ratio: Weight ratio q, giving ``c_j = (1-q) q^(j-1)`` (``2^-j`` for q = 1/2).
        k_max: Last k at which the assumptions are checked.
        exponent: The sequence ``k -> n_k``.
        resolution: Nodes on the circle.
        tol: Allowed distance of the liminf term from 1.

    Returns:
        The truncated measure and its certificate.
    """
    circle = discretize(CircleSpec(radius=1.0), resolution)
    continuous = DiscreteMeasure(
        circle.boundary_nodes, circle.quad_weights / (4.0 * np.pi), circle.mesh_spacing
    )
    j = np.arange(1, n_atoms + 1)
    c = (1.0 - ratio) * ratio ** (j - 1)
    points = dense_sequence(seed, n_atoms, r_in, r_out)
    atomic = DiscreteMeasure(points, 0.5 * c) if n_atoms else DiscreteMeasure.empty()
    measure = combine([continuous, atomic])

    ks = np.arange(1, k_max + 1)
    n = np.array([exponent(int(k)) for k in ks])
    moduli = np.abs(points)
    terms = []
    for k, nk in zip(ks, n):
        tail = float(np.sum(c[k:] * moduli[k:] ** (2 * nk)))
        terms.append((1.0 + tail) ** (1.0 / (2 * nk)))
    slack = (1.0 + ratio**n_atoms) ** (1.0 / (2 * n[-1])) - 1.0
    tail_terms = np.array(terms[max(0, 3 * k_max // 4) :])
    conditions = {
        "liminf_term_is_one": bool(tail_terms.min() - 1.0 <= tol and slack <= tol),
        "k_at_most_n_k": bool(np.all(ks <= n)),
        "limsup_k_over_n_k_below_one": bool(ks[-1] / n[-1] < 1.0 and np.all(np.diff((ks / n)[k_max // 2 :]) <= 0)),
    }
    reasons = [name for name, ok in conditions.items() if not ok]
    if n_atoms <= k_max:
        reasons.append(f"truncation J={n_atoms} does not exceed k_max={k_max}")
    certificate = MuCCertificate(
        coefficients=[float(x) for x in c],
        points=[(float(z.real), float(z.imag)) for z in points],
        exponents=[int(x) for x in n],
        terms=[float(t) for t in terms],
        conditions=conditions,
        truncation_slack=float(slack),
        certified=not reasons,
        reasons=reasons,
    )
    logger.debug("mu_c: J=%d, certified=%s", n_atoms, certificate.certified)
    return measure, certificate


def measure_to_csv(mu: DiscreteMeasure, path: Path) -> Path:
    """Write ``(re, im, weight)`` rows."""
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["re", "im", "weight"])
        for z, w in zip(mu.atoms, mu.weights):
            writer.writerow([repr(float(z.real)), repr(float(z.imag)), repr(float(w))])
    return path
