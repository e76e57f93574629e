"""Exception hierarchy shared by every expcone module."""

from __future__ import annotations


class ExpconeError(Exception):
    """Base class for all library errors."""


class DomainError(ExpconeError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ParameterError(ExpconeError, ValueError):
    """A scheme or routine was configured with invalid parameters."""


class EvaluationError(ExpconeError, ArithmeticError):
    """A user callback or formula produced a non-finite value."""


class ComputationError(ExpconeError, ArithmeticError):
    """A numerical procedure failed to produce a trustworthy result."""


class UnsupportedError(ExpconeError, NotImplementedError):
    """The requested construct exists in theory but is not implemented."""


class SolverError(ExpconeError, RuntimeError):
    """An LP or MIP routine broke down numerically."""


class ProcedureError(ExpconeError, RuntimeError):
    """A multi-step procedure (such as Best Scale) could not complete."""


class EmissionError(ExpconeError, ValueError):
    """A model cannot be written in the requested file format."""


class IngestionError(ExpconeError, ValueError):
    """Input data could not be turned into a model."""


class PrecisionWarning(UserWarning):
    """A computation is likely to lose the accuracy its certificate promises."""
