"""Exception hierarchy shared by every covx module."""


class CovxError(Exception):
    """Base class for all covx errors."""


class DimensionError(CovxError, ValueError):
    """Operand shapes do not match the declared factorization."""


class ContractViolation(CovxError, ValueError):
    """An input breaks an operation's precondition (non-PSD, infeasible, ...)."""


class UnsupportedCombination(CovxError, TypeError):
    """Two representations of incompatible group kinds were combined."""


class DecompositionError(CovxError, RuntimeError):
    """Numerical isotypic splitting failed after the retry budget."""

    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = dict(residuals or {})


class ProjectionError(CovxError, RuntimeError):
    """Alternating projections stalled above the feasibility tolerance."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class ParseError(CovxError, ValueError):
    """A matrix / representation / channel file could not be parsed."""
