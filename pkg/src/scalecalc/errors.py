"""Exception hierarchy shared by every module of the package."""


class ScaleCalcError(Exception):
    """Base class for all errors raised by scalecalc."""


class ParameterError(ScaleCalcError, ValueError):
    """A numeric parameter is outside its valid range (e.g. eps <= 0)."""


class DomainError(ScaleCalcError, ValueError):
    """A stencil or integration range leaves the domain of a curve."""


class ParseError(ScaleCalcError, ValueError):
    """Malformed expression text. ``position`` is the 0-based offset of the offending token."""

    def __init__(self, message, position=None):
        self.position = position
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)


class EvalError(ScaleCalcError, ArithmeticError):
    """Expression evaluation hit a singularity or produced a non-finite value."""


class UnsupportedError(ScaleCalcError):
    """Operation not supported for this expression (e.g. differentiating through abs)."""


class PreconditionError(ScaleCalcError, ValueError):
    """Inputs violate a documented precondition, such as boundary values."""


class DegenerateConstraintError(ScaleCalcError, ArithmeticError):
    """The constraint residual vanishes, so no multiplier can be estimated."""
