"""Exception hierarchy shared by all modules."""


class MinMoveError(Exception):
    """Base class for all package errors."""


class DomainError(MinMoveError, ValueError):
    """An argument lies outside the mathematical domain (non-finite, t <= -t0, ...)."""


class ConfigurationError(MinMoveError, ValueError):
    """Inconsistent or invalid problem/grid/solver configuration."""


class UnsupportedOperation(MinMoveError):
    """The requested operation is not defined for this input (e.g. thinned trajectory)."""


class NonFiniteEnergy(MinMoveError, ArithmeticError):
    """A trial point produced a non-finite energy."""


class NonConvergence(MinMoveError):
    """The minimizer hit its iteration budget.

    Attributes
    ----------
    report : SolveReport
        State of the solver when it gave up.
    step : int or None
        Time-step index, filled in by the stepper.
    """

    def __init__(self, message, report=None, step=None):
        super().__init__(message)
        self.report = report
        self.step = step
