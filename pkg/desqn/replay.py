# This module is part of desqn and is released under the
# 3-Clause BSD License: https://opensource.org/license/bsd-3-clause/

"""Fixed-capacity replay memory of reservoir-augmented transitions."""

__all__ = ["Transition", "TransitionBatch", "ReplayMemory", "push", "sample"]

import numpy as np

from desqn.exc import InsufficientDataError, InvalidTransitionError
from desqn.types import is_clipped_reward

# typing ----------------------------------------------------------------

from typing import Iterator, List, NamedTuple, Optional, Sequence

from desqn.types import Matrix, SeededRng, Vector

# ------------------------------------------------------------------------


class Transition(NamedTuple):
    """One step of experience: observation and reservoir state before and after the
    action, the clipped reward and whether bootstrapping stops here."""

    o: Vector
    x: Vector
    a: int
    r: float
    o_next: Vector
    x_next: Vector
    terminal: bool

    def validate(self) -> None:
        """:raise InvalidTransitionError: If the reward is not clipped or lengths differ"""
        if not is_clipped_reward(self.r):
            raise InvalidTransitionError("Reward %r is not in the clip set {-1, 0, 1}" % (self.r,))
        if np.shape(self.o) != np.shape(self.o_next):
            raise InvalidTransitionError(
                "Observation lengths differ: %s vs %s" % (np.shape(self.o), np.shape(self.o_next))
            )
        if np.shape(self.x) != np.shape(self.x_next):
            raise InvalidTransitionError(
                "Reservoir state lengths differ: %s vs %s" % (np.shape(self.x), np.shape(self.x_next))
            )


class TransitionBatch(NamedTuple):
    """Column-wise stacked transitions, one row per sample."""

    o: Matrix
    x: Matrix
    a: np.ndarray
    r: Vector
    o_next: Matrix
    x_next: Matrix
    terminal: np.ndarray

    @classmethod
    def from_transitions(cls, transitions: Sequence[Transition]) -> "TransitionBatch":
        return cls(
            o=np.stack([t.o for t in transitions]).astype(np.float64),
            x=np.stack([t.x for t in transitions]).astype(np.float64),
            a=np.array([t.a for t in transitions], dtype=np.intp),
            r=np.array([t.r for t in transitions], dtype=np.float64),
            o_next=np.stack([t.o_next for t in transitions]).astype(np.float64),
            x_next=np.stack([t.x_next for t in transitions]).astype(np.float64),
            terminal=np.array([t.terminal for t in transitions], dtype=bool),
        )

    @property
    def size(self) -> int:
        return len(self.a)

    @property
    def inputs(self) -> Matrix:
        """:return: Readout inputs ``concat(o, x)`` at time t"""
        return np.concatenate([self.o, self.x], axis=1)

    @property
    def next_inputs(self) -> Matrix:
        """:return: Readout inputs ``concat(o_next, x_next)`` at time t + 1"""
        return np.concatenate([self.o_next, self.x_next], axis=1)

    def transitions(self) -> List[Transition]:
        return [
            Transition(
                self.o[i],
                self.x[i],
                int(self.a[i]),
                float(self.r[i]),
                self.o_next[i],
                self.x_next[i],
                bool(self.terminal[i]),
            )
            for i in range(self.size)
        ]


class ReplayMemory:
    """Ring buffer of at most :attr:`capacity` transitions.

    Storage is allocated on the first push, when vector lengths become known. Once
    full, each push overwrites the oldest transition. Vectors are copied in, so later
    changes to the caller's arrays (such as a live reservoir state) never reach the
    memory.
    """

    __slots__ = ("capacity", "_size", "_cursor", "_o", "_x", "_a", "_r", "_o_next", "_x_next", "_terminal")

    def __init__(self, capacity: int = 10000) -> None:
        if capacity < 1:
            raise ValueError("Replay capacity must be at least 1, got %r" % capacity)
        self.capacity = capacity
        self._size = 0
        self._cursor = 0
        self._o: Optional[Matrix] = None
        self._x: Optional[Matrix] = None
        self._o_next: Optional[Matrix] = None
        self._x_next: Optional[Matrix] = None
        self._a = np.zeros(capacity, dtype=np.intp)
        self._r = np.zeros(capacity)
        self._terminal = np.zeros(capacity, dtype=bool)

    def __len__(self) -> int:
        return self._size

    def __repr__(self) -> str:
        return "<%s %i/%i>" % (type(self).__name__, self._size, self.capacity)

    def _allocate(self, n_obs: int, n_x: int) -> None:
        self._o = np.zeros((self.capacity, n_obs))
        self._o_next = np.zeros((self.capacity, n_obs))
        self._x = np.zeros((self.capacity, n_x))
        self._x_next = np.zeros((self.capacity, n_x))

    def push(self, t: Transition) -> None:
        """Store `t`, evicting the oldest transition if the memory is full.

        :raise InvalidTransitionError:
            If `t` breaks the clip set, or its vectors do not match those stored so far.
        """
        t.validate()
        o = np.asarray(t.o, dtype=np.float64)
        x = np.asarray(t.x, dtype=np.float64)
        if self._o is None:
            self._allocate(o.size, x.size)
        assert self._o is not None and self._x is not None
        assert self._o_next is not None and self._x_next is not None
        if o.shape != self._o.shape[1:] or x.shape != self._x.shape[1:]:
            raise InvalidTransitionError(
                "Transition has o%s, x%s, memory stores o%s, x%s"
                % (o.shape, x.shape, self._o.shape[1:], self._x.shape[1:])
            )

        i = self._cursor
        self._o[i] = o
        self._x[i] = x
        self._a[i] = t.a
        self._r[i] = t.r
        self._o_next[i] = t.o_next
        self._x_next[i] = t.x_next
        self._terminal[i] = t.terminal
        self._cursor = (i + 1) % self.capacity
        self._size = min(self._size + 1, self.capacity)

    def _gather(self, idx: np.ndarray) -> TransitionBatch:
        assert self._o is not None and self._x is not None
        assert self._o_next is not None and self._x_next is not None
        return TransitionBatch(
            o=self._o[idx],
            x=self._x[idx],
            a=self._a[idx],
            r=self._r[idx],
            o_next=self._o_next[idx],
            x_next=self._x_next[idx],
            terminal=self._terminal[idx],
        )

    def sample(self, n: int, rng: SeededRng) -> TransitionBatch:
        """Draw `n` transitions uniformly, with replacement.

        The returned arrays are copies; the memory is left unchanged.

        :raise InsufficientDataError:
            If fewer than `n` transitions are stored.
        """
        if n > self._size or n < 1:
            raise InsufficientDataError(n, self._size)
        return self._gather(rng.integers(0, self._size, size=n))

    def contents(self) -> TransitionBatch:
        """:return: All stored transitions, oldest first"""
        if self._o is None:
            empty = np.zeros((0, 0))
            return TransitionBatch(empty, empty, self._a[:0], self._r[:0], empty, empty, self._terminal[:0])
        if self._size < self.capacity:
            idx = np.arange(self._size)
        else:
            idx = (np.arange(self.capacity) + self._cursor) % self.capacity
        return self._gather(idx)

    def __iter__(self) -> Iterator[Transition]:
        return iter(self.contents().transitions())


def push(mem: ReplayMemory, t: Transition) -> None:
    mem.push(t)


def sample(mem: ReplayMemory, n: int, rng: SeededRng) -> List[Transition]:
    """:return: `n` uniformly drawn transitions, as a list"""
    return mem.sample(n, rng).transitions()
