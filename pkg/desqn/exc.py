# This module is part of desqn and is released under the
# 3-Clause BSD License: https://opensource.org/license/bsd-3-clause/

"""Exceptions thrown throughout the desqn package."""

__all__ = [
    "DesqnError",
    "InvalidRangeError",
    "InvalidProbabilityError",
    "NonSquareMatrixError",
    "NoConvergenceError",
    "DimensionMismatchError",
    "DegenerateMatrixError",
    "InvalidDimensionError",
    "EmptyBatchError",
    "ArchitectureMismatchError",
    "ShapeMismatchError",
    "NonFiniteGradientError",
    "InvalidTransitionError",
    "InsufficientDataError",
    "InvalidActionError",
    "EpisodeTerminatedError",
    "UnknownTaskError",
    "InvalidConfigError",
]

from typing import Sequence, Tuple, Union

# ------------------------------------------------------------------


def _shape_str(shape: Union[int, Sequence[int]]) -> str:
    if isinstance(shape, int):
        return "(%i,)" % shape
    return "(%s)" % ", ".join(str(i) for i in shape)


class DesqnError(Exception):
    """Base class for all package exceptions."""


# { Numerics


class InvalidRangeError(DesqnError, ValueError):
    """Thrown if a sampling range is empty, that is ``lo >= hi``."""

    def __init__(self, lo: float, hi: float) -> None:
        super().__init__("Invalid range [%r, %r): lower bound must be below upper bound" % (lo, hi))
        self.lo = lo
        self.hi = hi


class InvalidProbabilityError(DesqnError, ValueError):
    """Thrown if a probability lies outside of ``[0, 1]``."""

    def __init__(self, name: str, value: float) -> None:
        super().__init__("%s must lie in [0, 1], got %r" % (name, value))
        self.value = value


class NonSquareMatrixError(DesqnError, ValueError):
    """Thrown if an operation needing a square matrix received another shape."""

    def __init__(self, shape: Tuple[int, ...]) -> None:
        super().__init__("Matrix must be square, got shape %s" % _shape_str(shape))
        self.shape = shape


class NoConvergenceError(DesqnError):
    """Thrown if an iterative method ran out of iterations before meeting its
    tolerance.

    The best estimate obtained so far is available as :attr:`estimate`.
    """

    def __init__(self, estimate: float, iterations: int, tol: float) -> None:
        super().__init__(
            "No convergence to tol=%g after %i iterations, best estimate %r" % (tol, iterations, estimate)
        )
        self.estimate = estimate
        self.iterations = iterations
        self.tol = tol


class DimensionMismatchError(DesqnError, ValueError):
    """Thrown if a vector or matrix operand does not have the expected length."""

    def __init__(self, what: str, expected: Union[int, Sequence[int]], got: Union[int, Sequence[int]]) -> None:
        super().__init__("%s: expected %s, got %s" % (what, _shape_str(expected), _shape_str(got)))
        self.expected = expected
        self.got = got


# } END numerics

# { Reservoir and readout


class DegenerateMatrixError(DesqnError):
    """Thrown if no usable recurrent matrix could be drawn within the retry limit."""

    def __init__(self, attempts: int, radius: float) -> None:
        super().__init__(
            "Sparsified recurrent matrix stayed degenerate (spectral radius %g) after %i attempts" % (radius, attempts)
        )
        self.attempts = attempts
        self.radius = radius


class InvalidDimensionError(DesqnError, ValueError):
    """Thrown if a network layer was requested with a non-positive size."""


class EmptyBatchError(DesqnError, ValueError):
    """Thrown if a training batch holds no samples."""


class ArchitectureMismatchError(DesqnError):
    """Thrown if parameters are copied between readouts of different shape or kind."""


# } END reservoir and readout

# { Optimizers


class ShapeMismatchError(DesqnError, ValueError):
    """Thrown if gradients, parameters and optimizer buffers disagree in shape."""


class NonFiniteGradientError(DesqnError, FloatingPointError):
    """Thrown if a gradient holds NaN or infinite entries.

    :attr:`name` names the offending parameter tensor.
    """

    def __init__(self, name: str) -> None:
        super().__init__("Gradient of %r contains non-finite values" % name)
        self.name = name


# } END optimizers

# { Replay memory


class InvalidTransitionError(DesqnError, ValueError):
    """Thrown if a transition violates the reward clip set or its vectors disagree in
    length."""


class InsufficientDataError(DesqnError):
    """Thrown if more transitions are requested than the memory holds."""

    def __init__(self, requested: int, available: int) -> None:
        super().__init__("Requested %i transitions but only %i are stored" % (requested, available))
        self.requested = requested
        self.available = available


# } END replay memory

# { Environments


class InvalidActionError(DesqnError, ValueError):
    """Thrown if an action index lies outside of the task's action set."""

    def __init__(self, action: int, n_actions: int) -> None:
        super().__init__("Action %r is not in range(%i)" % (action, n_actions))
        self.action = action
        self.n_actions = n_actions


class EpisodeTerminatedError(DesqnError):
    """Thrown if an environment is stepped after its episode ended, without a reset."""


class UnknownTaskError(DesqnError, KeyError):
    """Thrown if a task name is not registered."""

    def __init__(self, name: str, known: Sequence[str]) -> None:
        super().__init__("Unknown task %r, expected one of: %s" % (name, ", ".join(known)))
        self.name = name

    def __str__(self) -> str:
        # KeyError would otherwise quote the whole message.
        return str(self.args[0])


# } END environments


class InvalidConfigError(DesqnError, ValueError):
    """Thrown if a configuration record or configuration file holds invalid values."""
