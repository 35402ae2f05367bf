"""Configuration: toolkit settings and scene files."""

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, List, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, ValidationInfo, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from .errors import PreconditionError, SceneError
from .geometry import MIN_RESOLUTION, CompactSetSpec, SetDiscretization, discretize, set_distance
from .measures import DiscreteMeasure, MeasureSpec, realize

logger = logging.getLogger(__name__)


class Tolerances(BaseModel):
    """Thresholds that turn numerical results into verdicts."""

    model_config = ConfigDict(extra="forbid")

    disagreement: float = Field(
        0.10, gt=0, lt=1, description="Relative gap between capacity estimators that is flagged"
    )
    lambda_pass: float = Field(
        0.02, gt=0, lt=1, description="Lambda* passes within this fraction of cap(K)"
    )
    lambda_fail: float = Field(
        0.10, gt=0, lt=1, description="Lambda* fails beyond this fraction of cap(K)"
    )
    mass_rtol: float = Field(
        0.02, ge=0, lt=1, description="Relative slack on ball-mass thresholds"
    )
    rate_gap: float = Field(
        0.05, gt=0, description="Allowed difference between L2 and sup decay rates"
    )
    trend_confidence: float = Field(
        0.99, gt=0.5, lt=1, description="One-sided confidence of the growth test"
    )
    trend_min_slope: float = Field(
        0.01, ge=0, description="Smallest log-growth per degree counted as geometric"
    )

    @field_validator("lambda_fail")
    @classmethod
    def validate_fail(cls, v: float, info: ValidationInfo) -> float:
        """The fail threshold lies beyond the pass threshold."""
        passing = info.data.get("lambda_pass")
        if passing is not None and v < passing:
            raise ValueError("lambda_fail must not be smaller than lambda_pass")
        return v


class ToolkitSettings(BaseSettings):
    """Defaults for every command, read from ``LOGPOT_*`` environment variables."""

    model_config = SettingsConfigDict(env_prefix="LOGPOT_", env_nested_delimiter="__")

    resolution: int = Field(512, ge=MIN_RESOLUTION, description="Nodes per curve piece")
    seed: int = Field(0, description="Seed for every stochastic choice")
    tol: float = Field(1e-2, gt=0, description="Green-function tolerance")
    k_max: int = Field(128, ge=2, description="Leja order for capacity estimates")
    green_order: int = Field(512, ge=2, description="Leja order for equilibrium measures")
    tail_fraction: float = Field(0.5, gt=0, le=1, description="Tail used by the extrapolation fit")
    max_workers: int = Field(4, ge=1, description="Worker threads for sweeps")
    output_dir: Path = Field(Path("out"), description="Directory for reports")
    tolerances: Tolerances = Field(default_factory=Tolerances)

    def with_overrides(self, **overrides: Any) -> "ToolkitSettings":
        """Copy with every non-None override applied (and validated)."""
        updates = {k: v for k, v in overrides.items() if v is not None}
        if not updates:
            return self
        return ToolkitSettings(**(self.model_dump() | updates))


class Scene(BaseModel):
    """Scene file: the set ``K``, optional pole set ``P``, a measure and overrides."""

    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    compact: CompactSetSpec = Field(..., alias="set", description="The compact set K")
    poles: Optional[CompactSetSpec] = Field(None, description="Pole set P, disjoint from K")
    measure: Optional[MeasureSpec] = Field(None, description="Measure on K")
    resolution: Optional[int] = Field(None, ge=MIN_RESOLUTION)
    seed: Optional[int] = None
    tolerances: Optional[Tolerances] = None

    def canonical(self) -> str:
        """Stable JSON text used for hashing."""
        return json.dumps(
            self.model_dump(mode="json", by_alias=True, exclude_none=True),
            sort_keys=True,
            separators=(",", ":"),
        )


def load_scene(path: Path) -> Scene:
    """Read and validate a scene file.

    Raises:
        SceneError: Unreadable JSON or schema violation, with its location.
    """
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError as exc:
        raise SceneError(f"scene file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise SceneError(f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    return parse_scene(data)


def parse_scene(data: Any) -> Scene:
    """Validate an already decoded scene."""
    try:
        return Scene.model_validate(data)
    except ValidationError as exc:
        first = exc.errors()[0]
        location = _location(data, first["loc"])
        message = first["msg"]
        if exc.error_count() > 1:
            message += f" (and {exc.error_count() - 1} more)"
        raise SceneError(message, location) from exc


def _location(data: Any, loc: Any) -> List[Union[str, int]]:
    """Error location in the input document, without tagged-union discriminators."""
    out: List[Union[str, int]] = []
    node = data
    tag_skipped = False
    for part in loc:
        if isinstance(node, dict) and not tag_skipped and part == node.get("kind"):
            tag_skipped = True
            continue
        out.append(part)
        tag_skipped = False
        try:
            node = node[part]
        except (KeyError, IndexError, TypeError):
            node = None
    return out


@dataclass(frozen=True, eq=False)
class Workspace:
    """A scene realized at its effective settings."""

    scene: Scene
    settings: ToolkitSettings
    K: SetDiscretization
    P: Optional[SetDiscretization]
    mu: Optional[DiscreteMeasure]

    def require_measure(self) -> DiscreteMeasure:
        if self.mu is None:
            raise SceneError("this command needs a measure", ["measure"])
        return self.mu

    def require_poles(self) -> SetDiscretization:
        if self.P is None:
            raise SceneError("this command needs a pole set", ["poles"])
        return self.P


def effective_settings(scene: Scene, settings: ToolkitSettings) -> ToolkitSettings:
    """Scene values override the settings."""
    result = settings.with_overrides(resolution=scene.resolution, seed=scene.seed)
    if scene.tolerances is not None:
        merged = result.tolerances.model_copy(
            update=scene.tolerances.model_dump(exclude_unset=True)
        )
        result = result.model_copy(update={"tolerances": merged})
    return result


def prepare(scene: Scene, settings: ToolkitSettings) -> Workspace:
    """Discretize ``K`` and ``P`` and realize the measure.

    Raises:
        SceneError: ``P`` meets ``K``, or the measure is off ``K``.
    """
    effective = effective_settings(scene, settings)
    K = discretize(scene.compact, effective.resolution)
    P = None
    if scene.poles is not None:
        P = discretize(scene.poles, effective.resolution)
        if set_distance(K, P) <= 0.5 * K.mesh_spacing:
            raise SceneError("pole set intersects K", ["poles"])
    mu = None
    if scene.measure is not None:
        try:
            mu = realize(scene.measure, K)
        except PreconditionError as exc:
            raise SceneError(str(exc), ["measure"]) from exc
    logger.debug("Prepared scene: %d nodes on K, resolution %d", K.size, effective.resolution)
    return Workspace(scene, effective, K, P, mu)


_settings: Optional[ToolkitSettings] = None


def get_settings() -> ToolkitSettings:
    """Global settings instance (read from the environment once)."""
    global _settings
    if _settings is None:
        _settings = ToolkitSettings()
    return _settings
