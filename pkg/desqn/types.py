# This module is part of desqn and is released under the
# 3-Clause BSD License: https://opensource.org/license/bsd-3-clause/

"""Type aliases shared across the package."""

import os
from typing import Any, Literal, NoReturn, Tuple, Union

import numpy as np
import numpy.typing as npt

PathLike = Union[str, "os.PathLike[str]"]
"""A :class:`str` (Unicode) based file or directory path."""

Matrix = npt.NDArray[np.float64]
"""A two-dimensional float64 array, row-major."""

Vector = npt.NDArray[np.float64]
"""A one-dimensional float64 array."""

SeededRng = np.random.Generator
"""A numpy random generator. Each one is owned by exactly one logical run component,
see :func:`desqn.numerics.rng_streams`."""

ReadoutKind = Literal["mlp", "linear"]
"""The two Q-value heads: a one hidden layer ReLU network, or a single linear layer."""

OptimizerKind = Literal["sgd", "adam", "amsgrad"]

TaskName = Literal["cartpole", "mountaincar", "acrobot", "pendulum"]

PendulumReward = Literal["printed", "squared"]
"""How the pendulum's shaped reward treats the angular velocity term, before clipping.

* ``printed``: ``-theta**2 - 0.1 * theta_dot - 0.0012 * tau**2``
* ``squared``: ``-theta**2 - 0.1 * theta_dot**2 - 0.001 * tau**2``, the reference
  simulator's cost.
"""

READOUT_KINDS: Tuple[ReadoutKind, ...] = ("mlp", "linear")
OPTIMIZER_KINDS: Tuple[OptimizerKind, ...] = ("amsgrad", "sgd", "adam")
TASK_NAMES: Tuple[TaskName, ...] = ("cartpole", "mountaincar", "acrobot", "pendulum")

CLIPPED_REWARDS = (-1.0, 0.0, 1.0)
"""The clip set every emitted and stored reward belongs to."""


def assert_never(inp: NoReturn, raise_error: bool = True, exc: Union[Exception, None] = None) -> None:
    """For use in exhaustive checking of a literal in if/else chains.

    A call to this function should only be reached if not all members are handled, or
    if an attempt is made to pass non-members through the chain.

    :param raise_error:
        If ``True``, will also raise :exc:`ValueError` with a general "unhandled
        literal" message, or the exception object passed as `exc`.
    """
    if raise_error:
        if exc is None:
            raise ValueError(f"An unhandled literal ({inp!r}) in an if/else chain was found")
        else:
            raise exc


def is_clipped_reward(value: Any) -> bool:
    """:return: ``True`` if `value` is exactly one of -1, 0 or 1"""
    try:
        return float(value) in CLIPPED_REWARDS
    except (TypeError, ValueError):
        return False
