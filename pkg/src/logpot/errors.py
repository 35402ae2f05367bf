"""Exception hierarchy for logpot.

Operations raise these when an input is rejected. Numerical warnings
(estimator disagreement, ill-conditioning) are reported in diagnostics
instead and never raised.
"""

from typing import Optional, Sequence, Union


class LogpotError(Exception):
    """Base class for all logpot errors."""


class PreconditionError(LogpotError, ValueError):
    """An operation's input violates its precondition."""


class DegenerateSetError(PreconditionError):
    """A set specification is degenerate, or polar where non-polar is required."""


class ResolutionError(PreconditionError):
    """A requested scale lies below what the discretization resolves."""

    def __init__(self, quantity: str, value: float, floor: float) -> None:
        self.quantity = quantity
        self.value = value
        self.floor = floor
        super().__init__(
            f"{quantity}={value:.6g} is below the resolution floor {floor:.6g}"
        )


class RankDeficiencyError(PreconditionError):
    """The measure does not induce a norm on the requested polynomial space."""

    def __init__(self, degree: int, column: int) -> None:
        self.degree = degree
        self.column = column
        super().__init__(
            f"L2 seminorm is degenerate on polynomials of degree {degree} "
            f"(collapse at column {column}); the measure has too few atoms"
        )


class SeparationError(LogpotError):
    """No separating map was found within the search budget."""

    def __init__(self, m_max: int, best_margin: float, best_m: Optional[int]) -> None:
        self.m_max = m_max
        self.best_margin = best_margin
        self.best_m = best_m
        super().__init__(
            f"no separating map for m <= {m_max}; best margin {best_margin:.4g}"
            f" at m={best_m}"
        )


class SceneError(PreconditionError):
    """A scene file is malformed."""

    def __init__(self, message: str, location: Sequence[Union[str, int]] = ()) -> None:
        self.location = tuple(location)
        where = ".".join(str(part) for part in self.location)
        super().__init__(f"{where}: {message}" if where else message)


class ExpressionError(PreconditionError):
    """A function expression falls outside the supported grammar."""
