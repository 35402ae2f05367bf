"""Pytest configuration and shared fixtures."""

import json
import shutil
import tempfile
from pathlib import Path
from typing import Any, Callable, Dict, Generator

import numpy as np
import pytest

from logpot.config import ToolkitSettings
from logpot.geometry import AnnulusSpec, CircleSpec, SetDiscretization, discretize, from_points
from logpot.measures import DiscreteMeasure


@pytest.fixture
def temp_dir() -> Generator[Path, None, None]:
    """Create a temporary directory for testing.

    Yields:
        Path to temporary directory
    """
    temp_path = Path(tempfile.mkdtemp())
    yield temp_path
    shutil.rmtree(temp_path, ignore_errors=True)


@pytest.fixture
def settings(temp_dir: Path) -> ToolkitSettings:
    """Default settings writing reports below the temporary directory."""
    return ToolkitSettings(output_dir=temp_dir / "out")


def arclength_measure(K: SetDiscretization) -> DiscreteMeasure:
    """``ds`` on every node of ``K``."""
    return DiscreteMeasure(K.boundary_nodes, K.quad_weights, K.mesh_spacing)


@pytest.fixture
def unit_circle() -> SetDiscretization:
    """Unit circle at 256 nodes."""
    return discretize(CircleSpec(radius=1.0), 256)


@pytest.fixture
def circle_ds(unit_circle: SetDiscretization) -> DiscreteMeasure:
    """Arc length on the unit circle (total mass 2 pi)."""
    return arclength_measure(unit_circle)


@pytest.fixture
def annulus_boundary() -> SetDiscretization:
    """Both boundary circles of ``1/2 <= |z| <= 1`` at 256 nodes each."""
    return discretize(AnnulusSpec(r_in=0.5, r_out=1.0), 256)


@pytest.fixture
def origin() -> SetDiscretization:
    """Pole set ``P = {0}``."""
    return from_points([0j])


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)


@pytest.fixture
def scene_file(temp_dir: Path) -> Callable[..., Path]:
    """Write a scene dictionary to a JSON file and return its path."""

    def write(data: Dict[str, Any], name: str = "scene.json") -> Path:
        path = temp_dir / name
        path.write_text(json.dumps(data), encoding="utf-8")
        return path

    return write


@pytest.fixture
def circle_scene() -> Dict[str, Any]:
    """Unit circle with arc length."""
    return {
        "set": {"kind": "circle", "radius": 1.0},
        "measure": {"kind": "arclength", "on": {"kind": "circle", "radius": 1.0}},
        "resolution": 128,
    }


@pytest.fixture
def annulus_scene() -> Dict[str, Any]:
    """Annulus boundary, ds on the outer circle, ``P = {0}``."""
    return {
        "set": {"kind": "annulus", "r_in": 0.5, "r_out": 1.0},
        "poles": {"kind": "points", "points": [[0.0, 0.0]]},
        "measure": {"kind": "arclength", "on": {"kind": "circle", "radius": 1.0}},
        "resolution": 128,
    }
