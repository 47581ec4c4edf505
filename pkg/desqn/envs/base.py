# This module is part of desqn and is released under the
# 3-Clause BSD License: https://opensource.org/license/bsd-3-clause/

"""Environment base class and the records shared by all tasks."""

__all__ = ["EnvConfig", "EnvSpec", "EnvState", "StepResult", "Environment", "reference_trajectory"]

import abc
from dataclasses import dataclass

import numpy as np

from desqn.exc import EpisodeTerminatedError, InvalidActionError, InvalidConfigError

# typing ----------------------------------------------------------------

from typing import ClassVar, List, NamedTuple, Sequence, Tuple

from desqn.types import PendulumReward, SeededRng, TaskName, Vector

PhysicalState = Tuple[float, ...]

# ------------------------------------------------------------------------

MAX_STEPS = 200


@dataclass(frozen=True)
class EnvConfig:
    """Switches for the task variants.

    :param full_observation:
        Debug flag; append the hidden velocities, scaled to about ``[-1, 1]``, to the
        observation. This turns the task back into a fully observable one.
    """

    mountaincar_actions: int = 3
    acrobot_actions: int = 2
    full_observation: bool = False
    pendulum_reward: PendulumReward = "printed"

    def __post_init__(self) -> None:
        if self.mountaincar_actions not in (2, 3) or self.acrobot_actions not in (2, 3):
            raise InvalidConfigError(
                "Action counts must be 2 or 3, got mountaincar_actions=%r, acrobot_actions=%r"
                % (self.mountaincar_actions, self.acrobot_actions)
            )
        if self.pendulum_reward not in ("printed", "squared"):
            raise InvalidConfigError("pendulum_reward must be 'printed' or 'squared', got %r" % self.pendulum_reward)


class EnvSpec(NamedTuple):
    name: TaskName
    n_obs: int
    n_actions: int
    max_steps: int = MAX_STEPS


class EnvState(NamedTuple):
    """Hidden physical state of a task, plus the step counter.

    The meaning of :attr:`variables` is given by the task's ``state_names``.
    """

    variables: PhysicalState
    steps: int


class StepResult(NamedTuple):
    """Outcome of one environment tick.

    :attr:`goal` marks the task's own success event: the cart-pole survived, the car
    or the acrobot tip reached its goal, the pendulum earned a +1.
    """

    observation: Vector
    reward: float
    terminal: bool
    steps_elapsed: int
    goal: bool


class Environment(abc.ABC):
    """A partially observable control task.

    Subclasses provide pure physics (:meth:`_advance`), the observation map and the
    clipped reward. This base class owns episode bookkeeping: the step counter, the
    200 step limit and the terminal flag.
    """

    name: ClassVar[TaskName]
    state_names: ClassVar[Tuple[str, ...]]

    def __init__(self, cfg: EnvConfig = EnvConfig()) -> None:
        self.cfg = cfg
        self.state: PhysicalState = tuple(0.0 for _ in self.state_names)
        self.steps = 0
        self.done = True

    def __repr__(self) -> str:
        return "<%s steps=%i state=%s>" % (type(self).__name__, self.steps, self.state)

    # { Interface

    @property
    @abc.abstractmethod
    def n_actions(self) -> int:
        ...

    @abc.abstractmethod
    def _initial_state(self, rng: SeededRng) -> PhysicalState:
        ...

    @abc.abstractmethod
    def _advance(self, state: PhysicalState, action: int) -> PhysicalState:
        """:return: The physical state one tick after applying `action` in `state`"""

    @abc.abstractmethod
    def _observe(self, state: PhysicalState) -> List[float]:
        ...

    @abc.abstractmethod
    def _velocities(self, state: PhysicalState) -> List[float]:
        """:return: The hidden velocities, scaled for the debug full observation"""

    @abc.abstractmethod
    def _outcome(self, before: PhysicalState, after: PhysicalState, action: int, steps: int) -> Tuple[float, bool, bool]:
        """:return: Tuple of (clipped reward, terminated by the task, goal event),
        ignoring the step limit unless the task's reward depends on it"""

    # } END interface

    @property
    def spec(self) -> EnvSpec:
        return EnvSpec(self.name, len(self.observe()), self.n_actions)

    @property
    def n_obs(self) -> int:
        return len(self.observe())

    def observe(self) -> Vector:
        values = self._observe(self.state)
        if self.cfg.full_observation:
            values.extend(self._velocities(self.state))
        return np.array(values, dtype=np.float64)

    def check_action(self, action: int) -> int:
        if not (isinstance(action, (int, np.integer)) and 0 <= action < self.n_actions):
            raise InvalidActionError(action, self.n_actions)
        return int(action)

    def reset(self, rng: SeededRng) -> Vector:
        """Draw a new initial state and start a new episode.

        :return:
            The first observation.
        """
        self.state = self._initial_state(rng)
        self.steps = 0
        self.done = False
        return self.observe()

    def set_state(self, variables: Sequence[float], steps: int = 0) -> Vector:
        """Start an episode from the given physical state.

        :return:
            The observation of that state.
        """
        if len(variables) != len(self.state_names):
            raise ValueError("%s state has %i variables, got %i" % (self.name, len(self.state_names), len(variables)))
        self.state = tuple(float(v) for v in variables)
        self.steps = steps
        self.done = False
        return self.observe()

    def snapshot(self) -> EnvState:
        return EnvState(self.state, self.steps)

    def step(self, action: int) -> StepResult:
        """Advance one tick.

        :raise InvalidActionError:
            If `action` is not a valid index.

        :raise EpisodeTerminatedError:
            If the episode already ended; call :meth:`reset` first.
        """
        action = self.check_action(action)
        if self.done:
            raise EpisodeTerminatedError("%s episode ended after %i steps, reset first" % (self.name, self.steps))

        before = self.state
        self.state = self._advance(before, action)
        self.steps += 1
        reward, terminated, goal = self._outcome(before, self.state, action, self.steps)
        # Time-limit truncation counts as terminal too.
        self.done = terminated or self.steps >= MAX_STEPS
        return StepResult(self.observe(), reward, self.done, self.steps, goal)

    def episode_completed(self, last: StepResult, rewards: Sequence[float], window: int) -> bool:
        """Decide whether the finished episode counts as a task completion.

        :param rewards:
            All clipped rewards of the episode, in order.

        :param window:
            Only used by tasks without an explicit goal.
        """
        return last.goal


def reference_trajectory(env: Environment, actions: Sequence[int]) -> List[EnvState]:
    """Roll the task's physics forward from the current state of `env`.

    Episode bookkeeping (termination, the step limit) is ignored, and `env` itself is
    left untouched.

    :return:
        The hidden states, starting with the current one, one more than `actions`.
    """
    state = env.state
    trajectory = [EnvState(state, env.steps)]
    for i, action in enumerate(actions, start=1):
        state = env._advance(state, env.check_action(action))
        trajectory.append(EnvState(state, env.steps + i))
    return trajectory
