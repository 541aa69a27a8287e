"""Exception hierarchy for palmcluster."""


class PalmClusterError(Exception):
    """Base class for every error raised by this package."""

    exit_code = 1


class DomainError(PalmClusterError, ValueError):
    """A closed-form formula was evaluated outside its domain."""

    exit_code = 2


class ConvergenceError(PalmClusterError, ArithmeticError):
    """A numeric inversion failed to converge."""

    exit_code = 3


class DegenerateInput(PalmClusterError, ValueError):
    """Geometric input is degenerate (too few points, collinear, ...)."""

    exit_code = 4


class WindowTooSmall(PalmClusterError):
    """The conditioning structure does not fit in the simulation window."""

    exit_code = 5


class GuardViolation(PalmClusterError):
    """A counted cell depends on points outside the simulated region."""

    exit_code = 6


class InsufficientData(PalmClusterError, ValueError):
    exit_code = 7


class DegenerateTheta(PalmClusterError, ZeroDivisionError):
    exit_code = 8
