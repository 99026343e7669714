"""Exception types and the shared enumeration budget.

Every refusal in this package is loud: operations that would silently
truncate raise GradeOverflow, and enumerations that would run away raise
BudgetExceeded once they pass the configured number of partial states.
"""

from __future__ import annotations

import os

ENV_BUDGET = "PATTERN_FORGE_BUDGET"
DEFAULT_BUDGET = 1_000_000


class PatternForgeError(Exception):
    """Base class for every error raised deliberately by this package."""


class SchemaError(PatternForgeError, ValueError):
    """A serialized payload does not match the expected schema/version."""


class BudgetExceeded(PatternForgeError, RuntimeError):
    """An enumeration passed its partial-state budget and was aborted."""


class GradeOverflow(PatternForgeError, RuntimeError):
    """A graded operation would need objects above the grade bound."""


class CoherenceError(PatternForgeError, RuntimeError):
    """Canonical transports failed to glue; the input data is inconsistent."""


def current_budget(explicit: int | None = None) -> int:
    """Budget for backtracking enumerations.

    Explicit argument wins, then the PATTERN_FORGE_BUDGET env var, then the
    package default of one million partial states.
    """
    if explicit is not None:
        return int(explicit)
    raw = os.environ.get(ENV_BUDGET)
    if raw is not None:
        try:
            return int(raw)
        except ValueError as exc:
            raise SchemaError(f"{ENV_BUDGET} must be an integer, got {raw!r}") from exc
    return DEFAULT_BUDGET


class BudgetMeter:
    """Counts partial states and raises once the budget is exhausted."""

    __slots__ = ("budget", "used", "label")

    def __init__(self, budget: int | None = None, label: str = "enumeration"):
        self.budget = current_budget(budget)
        self.used = 0
        self.label = label

    def tick(self, n: int = 1) -> None:
        self.used += n
        if self.used > self.budget:
            raise BudgetExceeded(
                f"{self.label} exceeded budget of {self.budget} partial states"
            )
