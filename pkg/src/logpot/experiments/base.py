"""Base classes for reproduction experiments."""

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional

from ..config import ToolkitSettings
from ..reports import Row


class Outcome(str, Enum):
    """Result of one acceptance check."""

    PASS = "pass"
    FAIL = "fail"
    MEASURED = "measured"


@dataclass
class CriterionResult:
    """One named check of an experiment."""

    name: str
    outcome: Outcome
    detail: str = ""
    value: Optional[float] = None

    @classmethod
    def check(cls, name: str, ok: bool, detail: str = "", value: Optional[float] = None) -> "CriterionResult":
        return cls(name, Outcome.PASS if ok else Outcome.FAIL, detail, value)

    @classmethod
    def measured(cls, name: str, detail: str = "", value: Optional[float] = None) -> "CriterionResult":
        """A quantity that is reported but not judged."""
        return cls(name, Outcome.MEASURED, detail, value)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "outcome": self.outcome.value,
            "detail": self.detail,
            "value": self.value,
        }


@dataclass
class ExperimentOutcome:
    """Everything an experiment produced."""

    results: Dict[str, Any] = field(default_factory=dict)
    tables: Dict[str, List[Row]] = field(default_factory=dict)
    criteria: List[CriterionResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.outcome is not Outcome.FAIL for c in self.criteria)

    def verdicts(self) -> Dict[str, str]:
        return {c.name: c.outcome.value for c in self.criteria}


class Experiment(ABC):
    """A pre-registered scene plus the checks run on it.

    Experiments pin their own scene and resolution; from the settings they
    take the seed, worker count, Green-function parameters and tolerances.
    """

    @property
    @abstractmethod
    def id(self) -> str:
        """Identifier used on the command line (``ex1a``, ``bw``, ...)."""

    @property
    @abstractmethod
    def title(self) -> str:
        """One-line title for listings."""

    @property
    def description(self) -> str:
        return ""

    @abstractmethod
    def run(self, settings: ToolkitSettings) -> ExperimentOutcome:
        """Run the experiment.

        Args:
            settings: Effective toolkit settings.

        Returns:
            Tables, results and the outcome of every check.
        """
