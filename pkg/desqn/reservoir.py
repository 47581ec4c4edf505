# This module is part of desqn and is released under the
# 3-Clause BSD License: https://opensource.org/license/bsd-3-clause/

"""The fixed random recurrent network (reservoir) of an echo state network."""

__all__ = ["ReservoirConfig", "Reservoir", "build_reservoir", "reservoir_step", "reset_state", "run_sequence"]

from dataclasses import dataclass
import logging

import numpy as np

from desqn.exc import DegenerateMatrixError, DimensionMismatchError, InvalidConfigError
from desqn.numerics import sparsify, spectral_radius, uniform_matrix

# typing ----------------------------------------------------------------

from typing import Optional

from desqn.types import Matrix, SeededRng, Vector

# ------------------------------------------------------------------------

_logger = logging.getLogger(__name__)

DEGENERATE_RADIUS = 1e-12
"""Sparsified matrices with a spectral radius below this cannot be normalized."""

MAX_DRAWS = 10


@dataclass(frozen=True)
class ReservoirConfig:
    """Shape and scaling of a reservoir.

    `g` scales the recurrent term at step time. The stored recurrent matrix always has
    spectral radius 1, so `g` is the effective spectral radius.
    """

    n_i: int
    n_x: int = 50
    p: float = 0.1
    g: float = 0.9
    input_scale: float = 1.0
    bias_scale: float = 0.2

    def __post_init__(self) -> None:
        if self.n_x < 1 or self.n_i < 1:
            raise InvalidConfigError("n_x and n_i must be at least 1, got n_x=%r, n_i=%r" % (self.n_x, self.n_i))
        if not 0.0 < self.p <= 1.0:
            raise InvalidConfigError("Connection probability p must lie in (0, 1], got %r" % self.p)
        if not self.g >= 0.0:
            raise InvalidConfigError("Gain g must be non-negative, got %r" % self.g)
        if not (self.input_scale > 0.0 and self.bias_scale > 0.0):
            raise InvalidConfigError("input_scale and bias_scale must be positive")


class Reservoir:
    """Echo state reservoir with state update ``x <- tanh(g W_rec x + W_in u + b)``.

    The weights never change after construction; only the state :attr:`x` evolves.
    """

    __slots__ = ("w_rec", "w_in", "b", "g", "x")

    def __init__(self, w_rec: Matrix, w_in: Matrix, b: Vector, g: float, x: Optional[Vector] = None) -> None:
        n_x = w_rec.shape[0]
        if w_rec.shape != (n_x, n_x):
            raise DimensionMismatchError("w_rec", (n_x, n_x), w_rec.shape)
        if w_in.ndim != 2 or w_in.shape[0] != n_x:
            raise DimensionMismatchError("w_in rows", n_x, w_in.shape[0])
        if b.shape != (n_x,):
            raise DimensionMismatchError("b", n_x, b.shape)

        self.w_rec = w_rec
        self.w_in = w_in
        self.b = b
        self.g = float(g)
        self.x = np.zeros(n_x) if x is None else np.array(x, dtype=np.float64)
        for arr in (self.w_rec, self.w_in, self.b):
            arr.setflags(write=False)

    def __repr__(self) -> str:
        return "<%s n_x=%i n_i=%i g=%g>" % (type(self).__name__, self.n_x, self.n_i, self.g)

    @property
    def n_x(self) -> int:
        return self.w_rec.shape[0]

    @property
    def n_i(self) -> int:
        return self.w_in.shape[1]

    def with_gain(self, g: float) -> "Reservoir":
        """:return: A reservoir sharing our weights, with another gain and a zero state"""
        return Reservoir(self.w_rec, self.w_in, self.b, g)

    def step(self, u: Vector) -> Vector:
        """Advance the state by one input.

        :return:
            A copy of the new state.
        """
        u = np.asarray(u, dtype=np.float64)
        if u.shape != (self.n_i,):
            raise DimensionMismatchError("reservoir input", self.n_i, u.shape)
        self.x = np.tanh(self.g * (self.w_rec @ self.x) + self.w_in @ u + self.b)
        return self.x.copy()

    def reset(self) -> None:
        self.x = np.zeros(self.n_x)


def build_reservoir(cfg: ReservoirConfig, rng: SeededRng) -> Reservoir:
    """Draw a reservoir.

    ``W`` is uniform on ``[-1, 1)``, sparsified with keep probability ``p`` and divided
    by its spectral radius. Input weights and biases are uniform on their symmetric
    ranges. The state starts at zero.

    :raise DegenerateMatrixError:
        If :data:`MAX_DRAWS` consecutive draws of ``W`` had no usable spectral radius.
    """
    radius = 0.0
    for attempt in range(1, MAX_DRAWS + 1):
        w = sparsify(uniform_matrix(cfg.n_x, cfg.n_x, -1.0, 1.0, rng), cfg.p, rng)
        radius = spectral_radius(w)
        if radius >= DEGENERATE_RADIUS:
            break
        _logger.warning("Recurrent matrix draw %i is degenerate (radius %g), drawing again", attempt, radius)
    else:
        raise DegenerateMatrixError(MAX_DRAWS, radius)
    # END for each draw

    w_rec = w / radius
    w_in = uniform_matrix(cfg.n_x, cfg.n_i, -cfg.input_scale, cfg.input_scale, rng)
    b = uniform_matrix(1, cfg.n_x, -cfg.bias_scale, cfg.bias_scale, rng)[0]
    return Reservoir(w_rec, w_in, b, cfg.g)


def reservoir_step(r: Reservoir, u: Vector) -> Vector:
    """Functional alias of :meth:`Reservoir.step`."""
    return r.step(u)


def reset_state(r: Reservoir) -> None:
    """Set the reservoir state back to the zero vector."""
    r.reset()


def run_sequence(r: Reservoir, inputs: Matrix) -> Matrix:
    """Feed the rows of `inputs` through the reservoir in order.

    :return:
        The states after each input, one row per input.
    """
    inputs = np.atleast_2d(np.asarray(inputs, dtype=np.float64))
    states = np.empty((inputs.shape[0], r.n_x))
    for t, u in enumerate(inputs):
        states[t] = r.step(u)
    return states
