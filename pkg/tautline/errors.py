"""Exceptions raised by tautline."""

from typing import Optional


class TautlineError(Exception):
    """Base class for every error raised on purpose by this package."""


class DomainMismatchError(TautlineError, ValueError):
    """Two operands live on different intervals."""


class InvalidSignalError(TautlineError, ValueError):
    """A signal, function or measure violates its construction invariants."""


class ParameterError(TautlineError, ValueError):
    """A numeric parameter is out of range (lambda <= 0, bad tolerance, ...)."""


class InfeasibleTubeError(TautlineError, ValueError):
    """The obstacles cross, or a pinned end value lies outside them."""

    def __init__(self, node: float, reason: str):
        self.node = node
        self.reason = reason
        super().__init__(f"infeasible tube at x={node!r}: {reason}")


class ConvergenceError(TautlineError, RuntimeError):
    """An iterative oracle hit its sweep cap or stopped decreasing its objective."""


class SignalFormatError(TautlineError, ValueError):
    """A signal file could not be parsed."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
