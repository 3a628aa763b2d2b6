"""Exception types raised across the toolkit."""


class IlluminationError(Exception):
    """Base class for every error raised by this package."""


class ParameterError(IlluminationError, ValueError):
    """An input lies outside its physical or numerical domain."""


class NonPhysicalStateError(IlluminationError, ValueError):
    """A covariance matrix violates the uncertainty relation."""


class TruncationError(IlluminationError, ValueError):
    """A Fock-space truncation lost more weight than the tolerance allows."""


class OracleBudgetError(IlluminationError, RuntimeError):
    """Cutoff escalation would exceed the dense-matrix budget."""


class ConvergenceError(IlluminationError, RuntimeError):
    """An iterative method or series failed to converge."""


class ChernoffEvaluationError(IlluminationError, ArithmeticError):
    """Q_s evaluated to NaN or infinity."""
