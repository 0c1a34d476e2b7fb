"""Exception types shared across the package."""


class QFrameError(Exception):
    """Base class for all errors raised by qframe."""


class ContextMismatchError(QFrameError, ValueError):
    """Two operands live in different algebra contexts."""


class PreconditionError(QFrameError, ValueError):
    """An operation was called outside its documented domain."""


class NoncommutingError(PreconditionError):
    """Logical connectives were requested for noncommuting effects."""

    def __init__(self, message: str, commutator_norm: float):
        super().__init__(message)
        self.commutator_norm = commutator_norm


class BrokenEnsembleError(QFrameError, ArithmeticError):
    """An ensemble produced a clearly negative variance."""


class ParseError(QFrameError, ValueError):
    """Malformed JSON input."""
