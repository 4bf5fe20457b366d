"""Exception types shared across the package.

Every error carries an ``exit_code`` used by the command line interface:
2 for configuration problems, 3 for numerical-convergence failures and
4 for grid/containment failures.
"""


class SimulationError(Exception):
    """Base class for all package errors."""

    exit_code = 1


class ConfigError(SimulationError):
    """Invalid configuration file, option value or rejected input."""

    exit_code = 2


class TooLargeError(ConfigError):
    """Problem size exceeds the combinatorial guard of the brute-force path."""


class ConvergenceError(SimulationError):
    """A numerical procedure failed to reach its accuracy target."""

    exit_code = 3


class InstabilityError(ConvergenceError):
    """Non-finite amplitudes appeared during time stepping."""

    def __init__(self, step, message=None):
        self.step = step
        super().__init__(message or f"non-finite amplitude at step {step}")


class NumericalConsistencyError(ConvergenceError):
    """A quantity left the range allowed by its exact-arithmetic identity."""


class NeedsMoreLevelsError(ConvergenceError):
    """Thermal enumeration ran out of single-particle levels."""

    def __init__(self, required, available, message=None):
        self.required = required
        self.available = available
        super().__init__(
            message
            or f"need at least {required} levels, only {available} available"
        )


class GridError(SimulationError):
    """Grid-related failure (mismatch, leakage, undersampling)."""

    exit_code = 4


class GridMismatchError(GridError):
    """Operands live on different grids or in different representations."""


class ContainmentError(GridError):
    """State amplitude reached the position-space boundary of the grid."""


class ResolutionError(GridError):
    """State has significant weight at the edge of the momentum lattice."""
