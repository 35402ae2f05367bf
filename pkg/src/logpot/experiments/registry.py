"""Experiment registry with automatic discovery."""

import importlib
import logging
import pkgutil
import types
from pathlib import Path
from typing import Dict, List, Optional, Type

from rich.console import Console

from .base import Experiment

console = Console()
logger = logging.getLogger(__name__)


class ExperimentRegistry:
    """Registry for managing and discovering experiments."""

    def __init__(self) -> None:
        self._experiments: Dict[str, Experiment] = {}

    def register(self, experiment_class: Type[Experiment]) -> None:
        """Register an experiment class under its id.

        Args:
            experiment_class: The experiment class to register
        """
        instance = experiment_class()
        self._experiments[instance.id] = instance

    def get(self, experiment_id: str) -> Optional[Experiment]:
        """Get an experiment by id.

        Args:
            experiment_id: The experiment id

        Returns:
            The experiment or None if not found
        """
        return self._experiments.get(experiment_id)

    def get_all(self) -> List[Experiment]:
        """All registered experiments, ordered by id."""
        return [self._experiments[key] for key in sorted(self._experiments)]

    def ids(self) -> List[str]:
        return sorted(self._experiments)

    def auto_discover(self, package_path: Optional[Path] = None) -> None:
        """Import every module of the experiments package and register its experiments.

        Args:
            package_path: Optional path to the experiments package
        """
        if self._experiments:
            return

        if package_path is None:
            package_path = Path(__file__).parent

        failed = 0
        for module_info in pkgutil.iter_modules([str(package_path)]):
            if module_info.name in ("base", "registry", "__init__"):
                continue
            try:
                module = importlib.import_module(f".{module_info.name}", package="logpot.experiments")
            except Exception as e:
                console.print(f"[yellow]Warning: Failed to load experiment module {module_info.name}:[/yellow] {e}")
                failed += 1
                continue

            for attr_name in dir(module):
                attr = getattr(module, attr_name)
                if (
                    isinstance(attr, type)
                    and not isinstance(attr, types.GenericAlias)  # py3.10: list[int] passes isinstance(type)
                    and issubclass(attr, Experiment)
                    and attr is not Experiment
                    and not getattr(attr, "__abstractmethods__", None)
                ):
                    try:
                        self.register(attr)
                    except Exception as e:
                        console.print(f"[yellow]Warning: Failed to register experiment {attr_name}:[/yellow] {e}")
                        failed += 1

        logger.debug("Discovered %d experiments (%d failed)", len(self._experiments), failed)


# Global registry instance
_registry = ExperimentRegistry()


def get_experiment_registry() -> ExperimentRegistry:
    """Get the global experiment registry, discovering experiments on first use."""
    _registry.auto_discover()
    return _registry
