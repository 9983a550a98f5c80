"""Exception types shared across the package."""


class QmemError(Exception):
    """Base class for all package-specific errors."""


class StateValidationError(QmemError, ValueError):
    """A quantum-state value violates its defining invariants."""


class DimensionMismatchError(QmemError, ValueError):
    """Operands have incompatible Hilbert-space dimensions."""


class SystemModelError(QmemError, ValueError):
    """A level system or one of its transitions is ill-formed."""


class ScheduleError(QmemError, ValueError):
    """A pulse or pulse schedule violates its timing/addressability rules."""


class IntegrationError(QmemError, RuntimeError):
    """A propagator failed (step underflow, non-finite values)."""


class ScenarioError(QmemError, ValueError):
    """A scenario file could not be parsed or validated.

    `line` is the 1-based line number the problem was detected on, or None
    when the error is not tied to a specific line.
    """

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
