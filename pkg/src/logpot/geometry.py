"""Compact sets in the complex plane.

Sets are described declaratively by pydantic specs (the ``set``/``poles``
entries of a scene file) and turned into a :class:`SetDiscretization`:
boundary nodes with arc-length quadrature weights plus a fill grid on
which the polynomial hull is the complement of the unbounded component.
"""

import logging
import math
from dataclasses import dataclass
from typing import Annotated, Callable, List, Literal, Optional, Sequence, Tuple, Union

import numpy as np
from numpy.typing import NDArray
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from scipy import ndimage
from scipy.optimize import linear_sum_assignment
from scipy.spatial import cKDTree

from .errors import DegenerateSetError, PreconditionError, ResolutionError

logger = logging.getLogger(__name__)

ComplexArray = NDArray[np.complex128]
RealArray = NDArray[np.float64]
BoolArray = NDArray[np.bool_]
Pair = Tuple[float, float]
ComplexMap = Callable[[ComplexArray], ComplexArray]

MIN_RESOLUTION = 16
_CELLS_ACROSS_MIN = 64
_CELLS_ACROSS_MAX = 512
_DEDUP_RTOL = 1e-12


def as_complex(pair: Sequence[float]) -> complex:
    """Convert a ``[re, im]`` pair from a scene file to a complex number."""
    return complex(float(pair[0]), float(pair[1]))


def as_pair(z: complex) -> Pair:
    """Convert a complex number to the ``[re, im]`` scene representation."""
    return (float(z.real), float(z.imag))


@dataclass(frozen=True)
class _Piece:
    """One connected piece of a discretized set before assembly."""

    nodes: ComplexArray
    weights: RealArray
    closed: bool
    curve: bool


Region = Callable[[ComplexArray], BoolArray]


class _SetSpecBase(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    def pieces(self, resolution: int) -> List[_Piece]:
        raise NotImplementedError

    def regions(self) -> List[Region]:
        """Filled two-dimensional parts, as membership predicates."""
        return []

    def is_polar(self) -> bool:
        return False


def _circle_piece(center: complex, radius: float, n: int, start: float = 0.0) -> _Piece:
    theta = start + 2.0 * np.pi * np.arange(n) / n
    nodes = center + radius * np.exp(1j * theta)
    weights = np.full(n, 2.0 * np.pi * radius / n)
    return _Piece(nodes, weights, closed=True, curve=True)


def _trapezoid_weights(n: int, length: float) -> RealArray:
    weights = np.full(n, length / (n - 1))
    weights[0] *= 0.5
    weights[-1] *= 0.5
    return weights


class CircleSpec(_SetSpecBase):
    """Circle ``|z - center| = radius``."""

    kind: Literal["circle"] = "circle"
    center: Pair = Field((0.0, 0.0), description="Center as [re, im]")
    radius: float = Field(..., gt=0, description="Radius")

    def pieces(self, resolution: int) -> List[_Piece]:
        return [_circle_piece(as_complex(self.center), self.radius, resolution)]


class ArcSpec(_SetSpecBase):
    """Circular arc traversed counterclockwise between two angles."""

    kind: Literal["arc"] = "arc"
    center: Pair = Field((0.0, 0.0), description="Center as [re, im]")
    radius: float = Field(..., gt=0, description="Radius")
    angles: Pair = Field(..., description="Start and end angle in radians")

    @field_validator("angles")
    @classmethod
    def validate_angles(cls, v: Pair) -> Pair:
        """Angle interval length must lie in (0, 2*pi]."""
        length = v[1] - v[0]
        if not 0.0 < length <= 2.0 * np.pi + 1e-12:
            raise ValueError("angle interval length must lie in (0, 2*pi]")
        return v

    @property
    def length(self) -> float:
        return self.radius * (self.angles[1] - self.angles[0])

    def pieces(self, resolution: int) -> List[_Piece]:
        start, stop = self.angles
        center = as_complex(self.center)
        if stop - start >= 2.0 * np.pi - 1e-12:
            return [_circle_piece(center, self.radius, resolution, start)]
        theta = np.linspace(start, stop, resolution)
        nodes = center + self.radius * np.exp(1j * theta)
        return [
            _Piece(nodes, _trapezoid_weights(resolution, self.length), False, True)
        ]


class AnnulusSpec(_SetSpecBase):
    """Annulus ``r_in <= |z - center| <= r_out``, or just its two boundary circles."""

    kind: Literal["annulus"] = "annulus"
    center: Pair = Field((0.0, 0.0), description="Center as [re, im]")
    r_in: float = Field(..., ge=0, description="Inner radius")
    r_out: float = Field(..., gt=0, description="Outer radius")
    boundary_only: bool = Field(True, description="Keep only the boundary circles")

    @model_validator(mode="after")
    def validate_radii(self) -> "AnnulusSpec":
        """Inner radius must be strictly smaller than the outer one."""
        if self.r_in >= self.r_out:
            raise ValueError("r_in must be smaller than r_out")
        return self

    def pieces(self, resolution: int) -> List[_Piece]:
        center = as_complex(self.center)
        rings = [_circle_piece(center, self.r_out, resolution)]
        if self.r_in > 0:
            rings.append(_circle_piece(center, self.r_in, resolution))
        return rings

    def regions(self) -> List[Region]:
        if self.boundary_only:
            return []
        center = as_complex(self.center)

        def inside(z: ComplexArray) -> BoolArray:
            d = np.abs(z - center)
            return np.asarray((d >= self.r_in) & (d <= self.r_out))

        return [inside]


class SegmentSpec(_SetSpecBase):
    """Straight segment between two endpoints."""

    kind: Literal["segment"] = "segment"
    start: Pair = Field(..., description="First endpoint as [re, im]")
    end: Pair = Field(..., description="Second endpoint as [re, im]")

    @model_validator(mode="after")
    def validate_endpoints(self) -> "SegmentSpec":
        """Endpoints must differ."""
        if as_complex(self.start) == as_complex(self.end):
            raise ValueError("segment endpoints coincide")
        return self

    def pieces(self, resolution: int) -> List[_Piece]:
        a, b = as_complex(self.start), as_complex(self.end)
        t = np.linspace(0.0, 1.0, resolution)
        nodes = a + (b - a) * t
        weights = _trapezoid_weights(resolution, abs(b - a))
        return [_Piece(nodes.astype(np.complex128), weights, False, True)]


class LemniscateSpec(_SetSpecBase):
    """Level curve ``|p(z)| = level`` of a polynomial (ascending coefficients)."""

    kind: Literal["lemniscate"] = "lemniscate"
    coefficients: List[Pair] = Field(
        ..., min_length=2, description="Coefficients c0, c1, ... as [re, im] pairs"
    )
    level: float = Field(..., gt=0, description="Level of |p|")
    filled: bool = Field(False, description="Include the enclosed region")

    @field_validator("coefficients")
    @classmethod
    def validate_degree(cls, v: List[Pair]) -> List[Pair]:
        """The leading coefficient must not vanish."""
        if as_complex(v[-1]) == 0:
            raise ValueError("leading coefficient must be nonzero")
        return v

    def _coeffs(self) -> ComplexArray:
        return np.array([as_complex(c) for c in self.coefficients], dtype=np.complex128)

    def pieces(self, resolution: int) -> List[_Piece]:
        coeffs = self._coeffs()
        degree = len(coeffs) - 1
        theta = 2.0 * np.pi * np.arange(resolution + 1) / resolution
        tracks = np.empty((resolution + 1, degree), dtype=np.complex128)
        for j, angle in enumerate(theta):
            shifted = coeffs.copy()
            shifted[0] -= self.level * np.exp(1j * angle)
            roots = np.polynomial.polynomial.polyroots(shifted)
            if j == 0:
                tracks[0] = roots[np.lexsort((roots.imag, roots.real))]
                continue
            _, order = linear_sum_assignment(np.abs(tracks[j - 1][:, None] - roots))
            tracks[j] = roots[order]

        derivative = np.polynomial.polynomial.polyder(coeffs)
        slope = np.abs(np.polynomial.polynomial.polyval(tracks[:-1], derivative))
        if slope.min() < 1e-9 * max(1.0, self.level):
            raise DegenerateSetError("lemniscate level passes through a critical point")

        # Branch b continues as branch perm[b] after a full turn.
        perm = [
            int(np.argmin(np.abs(tracks[0] - tracks[-1][b]))) for b in range(degree)
        ]
        pieces = []
        seen: set = set()
        for first in range(degree):
            if first in seen:
                continue
            cycle = []
            b = first
            while b not in seen:
                seen.add(b)
                cycle.append(b)
                b = perm[b]
            nodes = np.concatenate([tracks[:-1, b] for b in cycle])
            weights = np.concatenate(
                [self.level / slope[:, b] * (2.0 * np.pi / resolution) for b in cycle]
            )
            pieces.append(_Piece(nodes, weights, closed=True, curve=True))
        return pieces

    def regions(self) -> List[Region]:
        if not self.filled:
            return []
        coeffs = self._coeffs()

        def inside(z: ComplexArray) -> BoolArray:
            values = np.polynomial.polynomial.polyval(z, coeffs)
            return np.asarray(np.abs(values) <= self.level)

        return [inside]


class PointsSpec(_SetSpecBase):
    """Finite point set."""

    kind: Literal["points"] = "points"
    points: List[Pair] = Field(..., min_length=1, description="Points as [re, im]")

    def pieces(self, resolution: int) -> List[_Piece]:
        return [
            _Piece(
                np.array([as_complex(p)], dtype=np.complex128),
                np.ones(1),
                closed=False,
                curve=False,
            )
            for p in self.points
        ]

    def is_polar(self) -> bool:
        return True


class UnionSpec(_SetSpecBase):
    """Finite union of other set specs."""

    kind: Literal["union"] = "union"
    parts: List["CompactSetSpec"] = Field(..., min_length=1, description="Members")

    def pieces(self, resolution: int) -> List[_Piece]:
        return [piece for part in self.parts for piece in part.pieces(resolution)]

    def regions(self) -> List[Region]:
        return [region for part in self.parts for region in part.regions()]

    def is_polar(self) -> bool:
        return all(part.is_polar() for part in self.parts)


SetSpec = Union[
    CircleSpec, ArcSpec, AnnulusSpec, SegmentSpec, LemniscateSpec, PointsSpec, UnionSpec
]
CompactSetSpec = Annotated[SetSpec, Field(discriminator="kind")]
UnionSpec.model_rebuild()


@dataclass(frozen=True, eq=False)
class Component:
    """Contiguous node range forming one polyline or one isolated point."""

    start: int
    stop: int
    closed: bool
    curve: bool


@dataclass(frozen=True, eq=False)
class FillGrid:
    """Square-cell raster of a set.

    Cell ``(row, col)`` is centered at ``origin + cell * (col + 1j * row)``.
    ``hull`` is ``occupied`` with every bounded complement component filled.
    """

    origin: complex
    cell: float
    occupied: BoolArray
    hull: BoolArray

    @property
    def shape(self) -> Tuple[int, int]:
        return (int(self.occupied.shape[0]), int(self.occupied.shape[1]))

    def centers(self, mask: Optional[BoolArray] = None) -> ComplexArray:
        """Centers of all cells, or of the cells selected by ``mask``."""
        rows, cols = np.nonzero(mask) if mask is not None else np.indices(self.shape)
        return (self.origin + self.cell * (cols + 1j * rows)).ravel()

    def locate(self, z: ComplexArray) -> Tuple[NDArray[np.intp], NDArray[np.intp], BoolArray]:
        """Cell indices of points and whether they fall inside the frame."""
        offset = (np.asarray(z, dtype=np.complex128) - self.origin) / self.cell
        cols = np.floor(offset.real + 0.5).astype(np.intp)
        rows = np.floor(offset.imag + 0.5).astype(np.intp)
        inside = (rows >= 0) & (rows < self.shape[0]) & (cols >= 0) & (cols < self.shape[1])
        return rows, cols, inside

    def lookup(self, grid: BoolArray, z: ComplexArray) -> BoolArray:
        rows, cols, inside = self.locate(z)
        result = np.zeros(rows.shape, dtype=bool)
        result[inside] = grid[rows[inside], cols[inside]]
        return result


@dataclass(frozen=True, eq=False)
class SetDiscretization:
    """Numerical carrier of a compact set.

    Attributes:
        boundary_nodes: Pairwise distinct boundary points.
        quad_weights: Positive arc-length quadrature weights (1 per isolated point).
        fill_grid: Raster with occupied cells and the polynomial hull.
        mesh_spacing: Largest gap between neighboring nodes along a curve.
        components: Node ranges of the connected pieces.
        resolution: Resolution the set was discretized at.
        polar: True for finite point sets.
        spec: Originating spec, when there is one.
    """

    boundary_nodes: ComplexArray
    quad_weights: RealArray
    fill_grid: FillGrid
    mesh_spacing: float
    components: Tuple[Component, ...]
    resolution: int
    polar: bool = False
    spec: Optional[SetSpec] = None

    @property
    def size(self) -> int:
        return int(self.boundary_nodes.size)

    @property
    def total_length(self) -> float:
        return float(self.quad_weights.sum())

    @property
    def extent(self) -> float:
        """Diagonal of the bounding box of the nodes."""
        z = self.boundary_nodes
        return float(math.hypot(np.ptp(z.real), np.ptp(z.imag)))

    @property
    def is_polar(self) -> bool:
        return self.polar or self.size < 2

    def subset(self, mask: BoolArray) -> "SetDiscretization":
        """Discretization restricted to the selected nodes.

        Runs of consecutive kept nodes inside a curve stay connected; the
        result inherits the parent's mesh spacing and resolution.
        """
        mask = np.asarray(mask, dtype=bool)
        if mask.shape != self.boundary_nodes.shape:
            raise PreconditionError("subset mask does not match the node count")
        if not mask.any():
            raise PreconditionError("subset is empty")
        pieces: List[_Piece] = []
        for comp in self.components:
            kept = np.flatnonzero(mask[comp.start : comp.stop]) + comp.start
            if kept.size == 0:
                continue
            if not comp.curve:
                pieces.extend(
                    _Piece(self.boundary_nodes[[i]], self.quad_weights[[i]], False, False)
                    for i in kept
                )
                continue
            full = kept.size == comp.stop - comp.start
            breaks = np.flatnonzero(np.diff(kept) > 1) + 1
            runs = np.split(kept, breaks)
            if comp.closed and not full and len(runs) > 1:
                if runs[0][0] == comp.start and runs[-1][-1] == comp.stop - 1:
                    runs = [np.concatenate([runs[-1], runs[0]])] + runs[1:-1]
            for run in runs:
                pieces.append(
                    _Piece(
                        self.boundary_nodes[run],
                        self.quad_weights[run],
                        closed=comp.closed and full,
                        curve=run.size > 1,
                    )
                )
        return _assemble(
            pieces,
            [],
            resolution=self.resolution,
            polar=self.polar,
            mesh_hint=self.mesh_spacing,
        )


def _densify(nodes: ComplexArray, closed: bool, step: float) -> ComplexArray:
    if nodes.size < 2:
        return nodes
    path = np.append(nodes, nodes[0]) if closed else nodes
    a, b = path[:-1], path[1:]
    counts = np.maximum(1, np.ceil(np.abs(b - a) / step).astype(np.intp))
    seg = np.repeat(np.arange(a.size), counts)
    starts = np.cumsum(counts) - counts
    frac = (np.arange(seg.size) - np.repeat(starts, counts)) / np.repeat(counts, counts)
    return np.append(a[seg] + (b[seg] - a[seg]) * frac, path[-1])


def _build_grid(
    pieces: Sequence[_Piece], regions: Sequence[Region], mesh: float
) -> FillGrid:
    all_nodes = np.concatenate([p.nodes for p in pieces])
    lo = complex(all_nodes.real.min(), all_nodes.imag.min())
    hi = complex(all_nodes.real.max(), all_nodes.imag.max())
    span = max(hi.real - lo.real, hi.imag - lo.imag)
    if span == 0.0:
        span = 1.0
    cell = min(max(mesh, span / _CELLS_ACROSS_MAX), span / _CELLS_ACROSS_MIN)
    margin = max(4.0 * cell, 0.05 * span)
    count = int(math.ceil((span + 2.0 * margin) / cell)) | 1
    mid = 0.5 * (lo + hi)
    origin = mid - 0.5 * (count - 1) * cell * (1 + 1j)

    occupied = np.zeros((count, count), dtype=bool)
    grid = FillGrid(origin, cell, occupied, occupied)
    for piece in pieces:
        samples = _densify(piece.nodes, piece.closed, 0.25 * cell) if piece.curve else piece.nodes
        rows, cols, inside = grid.locate(samples)
        occupied[rows[inside], cols[inside]] = True
    if regions:
        centers = grid.centers().reshape(occupied.shape)
        for region in regions:
            occupied |= region(centers)
    hull = ndimage.binary_fill_holes(occupied)
    return FillGrid(origin, cell, occupied, np.asarray(hull, dtype=bool))


def _assemble(
    pieces: Sequence[_Piece],
    regions: Sequence[Region],
    resolution: int,
    polar: bool,
    spec: Optional[SetSpec] = None,
    mesh_hint: float = 0.0,
) -> SetDiscretization:
    if not pieces:
        raise DegenerateSetError("set has no nodes")
    gaps = [
        float(np.abs(np.diff(np.append(p.nodes, p.nodes[0]) if p.closed else p.nodes)).max())
        for p in pieces
        if p.curve and p.nodes.size > 1
    ]
    mesh = max(gaps) if gaps else mesh_hint
    grid = _build_grid(pieces, regions, mesh)
    if mesh == 0.0:
        mesh = grid.cell

    nodes = np.concatenate([p.nodes for p in pieces]).astype(np.complex128)
    weights = np.concatenate([p.weights for p in pieces]).astype(np.float64)
    if not np.all(np.isfinite(nodes)):
        raise DegenerateSetError("set has non-finite nodes")
    scale = max(1.0, float(np.abs(nodes).max()))
    keep = np.ones(nodes.size, dtype=bool)
    for i, j in sorted(cKDTree(np.column_stack([nodes.real, nodes.imag])).query_pairs(_DEDUP_RTOL * scale)):
        if keep[i] and keep[j]:
            weights[i] += weights[j]
            keep[j] = False
    if not keep.all():
        logger.debug("Merged %d coincident nodes", int((~keep).sum()))

    components = []
    offset = 0
    position = 0
    for piece in pieces:
        count = int(keep[position : position + piece.nodes.size].sum())
        position += piece.nodes.size
        if count:
            components.append(Component(offset, offset + count, piece.closed, piece.curve))
            offset += count
    nodes, weights = nodes[keep], weights[keep]
    if np.any(weights <= 0):
        raise DegenerateSetError("non-positive quadrature weight")
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return SetDiscretization(
        boundary_nodes=nodes,
        quad_weights=weights,
        fill_grid=grid,
        mesh_spacing=float(mesh),
        components=tuple(components),
        resolution=resolution,
        polar=polar,
        spec=spec,
    )


def discretize(spec: SetSpec, resolution: int) -> SetDiscretization:
    """Discretize a set spec.

    Args:
        spec: Any compact set spec.
        resolution: Nodes per curve piece (per branch for lemniscates).

    Returns:
        Deterministic discretization of the set.
    """
    if resolution < MIN_RESOLUTION:
        raise PreconditionError(f"resolution must be at least {MIN_RESOLUTION}")
    result = _assemble(
        spec.pieces(resolution),
        spec.regions(),
        resolution=resolution,
        polar=spec.is_polar(),
        spec=spec,
    )
    logger.debug(
        "Discretized %s: %d nodes, h=%.3g, grid %s",
        getattr(spec, "kind", "set"),
        result.size,
        result.mesh_spacing,
        result.fill_grid.shape,
    )
    return result


def refine(K: SetDiscretization, factor: int = 4) -> SetDiscretization:
    """Rediscretize ``K`` from its spec at ``factor`` times its resolution."""
    if K.spec is None:
        logger.debug("Set has no spec; refinement keeps the original nodes")
        return K
    return discretize(K.spec, factor * K.resolution)


def from_points(points: Sequence[complex], resolution: int = MIN_RESOLUTION) -> SetDiscretization:
    """Polar discretization of a finite list of points."""
    spec = PointsSpec(points=[as_pair(complex(p)) for p in points])
    return discretize(spec, max(resolution, MIN_RESOLUTION))


def map_set(K: SetDiscretization, f: ComplexMap) -> SetDiscretization:
    """Discretization of ``f(K)`` built from mapped nodes.

    Curve weights become image chord lengths (trapezoidal); coincident
    images are merged.
    """
    images = np.asarray(f(K.boundary_nodes), dtype=np.complex128)
    if not np.all(np.isfinite(images)):
        raise PreconditionError("map is not finite at every node")
    pieces = []
    for comp in K.components:
        nodes = images[comp.start : comp.stop]
        if comp.curve and nodes.size > 1:
            path = np.append(nodes, nodes[0]) if comp.closed else nodes
            chords = np.abs(np.diff(path))
            weights = np.zeros(nodes.size)
            weights[: chords.size] += 0.5 * chords
            if comp.closed:
                weights[1:] += 0.5 * chords[:-1]
                weights[0] += 0.5 * chords[-1]
            else:
                weights[1:] += 0.5 * chords
        else:
            weights = K.quad_weights[comp.start : comp.stop].copy()
        pieces.append(_Piece(nodes, weights, comp.closed, comp.curve))
    return _assemble(pieces, [], resolution=K.resolution, polar=K.polar)


def hull_indicator(K: SetDiscretization, z: Union[complex, ComplexArray]) -> Union[bool, BoolArray]:
    """Whether ``z`` lies in the polynomial hull of ``K``.

    Points outside the fill grid frame are outside the hull.
    """
    values = K.fill_grid.lookup(K.fill_grid.hull, np.atleast_1d(z))
    return bool(values[0]) if np.ndim(z) == 0 else values


def set_distance(K: SetDiscretization, P: SetDiscretization) -> float:
    """Smallest node-to-node distance between two sets."""
    tree = cKDTree(np.column_stack([P.boundary_nodes.real, P.boundary_nodes.imag]))
    distances, _ = tree.query(np.column_stack([K.boundary_nodes.real, K.boundary_nodes.imag]))
    return float(np.min(distances))


def epsilon_neighborhood(
    K: SetDiscretization, epsilon: float, use_hull: bool = False
) -> SetDiscretization:
    """Closed epsilon-neighborhood of ``K`` (of its hull with ``use_hull``).

    The fill grid is the Euclidean dilation of the occupied cells; boundary
    nodes are the centers of the cells on the dilated boundary.
    """
    floor = 2.0 * K.mesh_spacing
    if epsilon < floor:
        raise ResolutionError("epsilon", epsilon, floor)
    grid = K.fill_grid
    pad = int(math.ceil(epsilon / grid.cell)) + 3
    base = np.pad(grid.hull if use_hull else grid.occupied, pad)
    distance = ndimage.distance_transform_edt(~base) * grid.cell
    dilated = np.asarray(distance <= epsilon)
    origin = grid.origin - pad * grid.cell * (1 + 1j)
    hull = np.asarray(ndimage.binary_fill_holes(dilated), dtype=bool)
    new_grid = FillGrid(origin, grid.cell, dilated, hull)

    rim = dilated & ~ndimage.binary_erosion(dilated, border_value=0)
    nodes = new_grid.centers(rim)
    weights = np.full(nodes.size, grid.cell)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return SetDiscretization(
        boundary_nodes=nodes,
        quad_weights=weights,
        fill_grid=new_grid,
        mesh_spacing=grid.cell,
        components=(Component(0, nodes.size, closed=False, curve=False),),
        resolution=K.resolution,
        polar=False,
    )


def connected_components(mask: BoolArray) -> int:
    """Number of 8-connected components of a cell mask."""
    _, count = ndimage.label(mask, structure=np.ones((3, 3), dtype=bool))
    return int(count)
