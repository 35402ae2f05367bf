"""Reproduction experiments.

Each module in this package defines one :class:`Experiment`; the registry
imports them on first use.
"""

from .base import CriterionResult, Experiment, ExperimentOutcome, Outcome
from .registry import ExperimentRegistry, get_experiment_registry

__all__ = [
    "CriterionResult",
    "Experiment",
    "ExperimentOutcome",
    "Outcome",
    "ExperimentRegistry",
    "get_experiment_registry",
]
