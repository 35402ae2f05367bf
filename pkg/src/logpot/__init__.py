"""logpot - logarithmic potential toolkit.

Numerical checks of Bernstein-Markov properties for polynomials and
rational functions: capacities, Green functions, Bergman functions, the
mass-density criterion and overconvergence of best L2 approximations.
"""

# Version is maintained in pyproject.toml only
try:
    from importlib.metadata import version

    __version__ = version("logpot")
except Exception:
    # Fallback for source checkouts that are not installed
    import tomllib
    from pathlib import Path

    try:
        pyproject_path = Path(__file__).parent.parent.parent / "pyproject.toml"
        with open(pyproject_path, "rb") as f:
            __version__ = tomllib.load(f).get("project", {}).get("version", "unknown")
    except (OSError, tomllib.TOMLDecodeError):
        __version__ = "unknown"

__license__ = "MIT"

__all__ = [
    "__version__",
    "__license__",
    "ToolkitSettings",
    "get_settings",
    "Scene",
    "load_scene",
    "prepare",
    "LogpotError",
    "PreconditionError",
]

# Import key components for easier access
from logpot.config import Scene, ToolkitSettings, get_settings, load_scene, prepare
from logpot.errors import LogpotError, PreconditionError
