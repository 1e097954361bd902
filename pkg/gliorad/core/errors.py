"""
Exceptions raised across gliorad.

Each class derives from a builtin so existing `except ValueError` or
`except RuntimeError` handlers keep working.
"""


class ConfigurationError(ValueError):
    """Invalid geometry, tissue, bounds or run-config field."""

    def __init__(self, message: str, field_path: str | None = None):
        self.field_path = field_path
        prefix = f"{field_path}: " if field_path else ""
        super().__init__(f"{prefix}{message}")


class InfeasibleBudgetError(ConfigurationError):
    """The admissible set is empty: the bound 0 < budget / M <= |Omega| * T fails."""


class SolverError(RuntimeError):
    """A Newton or linear solve did not converge."""

    def __init__(
        self,
        message: str,
        residual: float | None = None,
        iterations: int | None = None,
        time_index: int | None = None,
    ):
        self.residual = residual
        self.iterations = iterations
        self.time_index = time_index
        super().__init__(message)

    def at_time(self, time_index: int) -> "SolverError":
        """Return a copy tagged with the time index where the step failed."""
        return SolverError(
            f"step {time_index} -> {time_index + 1}: {self}",
            residual=self.residual,
            iterations=self.iterations,
            time_index=time_index,
        )


class OptimizationError(RuntimeError):
    """The optimizer could not continue; the underlying failure is the __cause__."""

    def __init__(self, message: str, iteration: int | None = None):
        self.iteration = iteration
        super().__init__(message)
