"""Exception hierarchy.

Every error carries an ``exit_code`` so the command line can map failures onto
its documented codes without a lookup table.
"""

from __future__ import annotations


class SonineError(Exception):
    """Base class for all errors raised by the package."""

    exit_code = 4


class InvalidArgument(SonineError, ValueError):
    exit_code = 2


class OutOfRange(InvalidArgument):
    pass


class ParseError(InvalidArgument):
    """Malformed input document; ``line``/``column`` are 1-based when known."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)
        self.line = line
        self.column = column


class Unsupported(SonineError):
    exit_code = 3


class UnsupportedKernel(Unsupported):
    pass


class NumericalFailure(SonineError):
    exit_code = 4


class SingularMatrix(NumericalFailure):
    """Cholesky factorization failed; ``minor`` is the order of the first
    leading minor that is not positive."""

    def __init__(self, message: str, minor: int | None = None):
        super().__init__(message)
        self.minor = minor


class SingularLeadingMoment(NumericalFailure):
    pass


class SingularTransform(NumericalFailure):
    def __init__(self, message: str, p: float, direction=None):
        super().__init__(message)
        self.p = p
        self.direction = direction


class NumericOverflow(NumericalFailure):
    def __init__(self, message: str, location=None):
        super().__init__(message)
        self.location = location


class CallbackError(NumericalFailure):
    def __init__(self, message: str, step: int):
        super().__init__(message)
        self.step = step
