"""Scene builders shared by the experiments."""

from typing import Optional

from ..config import Scene, ToolkitSettings, Workspace, prepare
from ..geometry import AnnulusSpec, CircleSpec, PointsSpec, SetSpec, UnionSpec
from ..measures import ArclengthMeasureSpec, MixtureMeasureSpec


def circle(radius: float = 1.0) -> CircleSpec:
    return CircleSpec(radius=radius)


def annulus(filled: bool = False) -> AnnulusSpec:
    """``1/2 <= |z| <= 1``, or its two boundary circles."""
    return AnnulusSpec(r_in=0.5, r_out=1.0, boundary_only=not filled)


def two_circles() -> UnionSpec:
    return UnionSpec(parts=[circle(1.0), circle(0.5)])


def origin() -> PointsSpec:
    return PointsSpec(points=[(0.0, 0.0)])


def arclength(radius: float = 1.0, coef: float = 1.0) -> ArclengthMeasureSpec:
    """``coef * ds`` on the centered circle of the given radius."""
    return ArclengthMeasureSpec(on=circle(radius), coef=coef)


def half_and_half() -> MixtureMeasureSpec:
    """``1/2 ds`` on the unit circle plus ``1/2 ds`` on the circle of radius 1/2."""
    return MixtureMeasureSpec(parts=[arclength(1.0, 0.5), arclength(0.5, 0.5)])


def load(
    settings: ToolkitSettings,
    compact: SetSpec,
    resolution: int,
    measure: Optional[object] = None,
    poles: Optional[SetSpec] = None,
) -> Workspace:
    """Realize a pre-registered scene through the same path as scene files."""
    scene = Scene.model_validate(
        {
            "set": compact,
            "poles": poles,
            "measure": measure,
            "resolution": resolution,
        }
    )
    return prepare(scene, settings)
