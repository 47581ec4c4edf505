# This module is part of desqn and is released under the
# 3-Clause BSD License: https://opensource.org/license/bsd-3-clause/

"""The deep echo state Q-network agent.

Each observation drives the reservoir; the readout sees ``concat(o, x)``. Transitions
carry the reservoir state on both ends, so plain uniform replay trains a recurrent
policy without backpropagation through time. The main readout is trained every step
with Double DQN targets from a target readout that is synchronized every few
episodes.
"""

__all__ = [
    "AgentConfig",
    "Agent",
    "EpisodeReport",
    "EpisodeTrace",
    "RunReport",
    "epsilon_at",
]

from dataclasses import dataclass, field
import logging
import math

import numpy as np

from desqn.envs import EnvConfig
from desqn.exc import DimensionMismatchError, InvalidConfigError, NonFiniteGradientError
from desqn.optim import OptimConfig, Optimizer
from desqn.readout import init_readout
from desqn.replay import ReplayMemory, Transition, TransitionBatch
from desqn.reservoir import ReservoirConfig, build_reservoir
from desqn.types import READOUT_KINDS

# typing ----------------------------------------------------------------

from typing import List, NamedTuple, Optional, Sequence, Tuple, Union

from desqn.envs import Environment, EnvState
from desqn.numerics import RunStreams
from desqn.readout import Readout
from desqn.reservoir import Reservoir
from desqn.types import Matrix, ReadoutKind, SeededRng, Vector

# ------------------------------------------------------------------------

_logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class AgentConfig:
    """Every hyperparameter of a training run.

    The epsilon schedule multiplies by ``(epsilon_floor / epsilon_start) **
    (1 / epsilon_decay_episodes)`` after each episode, reaching the floor exactly at
    episode `epsilon_decay_episodes`.
    """

    gamma: float = 0.99
    epsilon_start: float = 0.5
    epsilon_floor: float = 0.01
    epsilon_decay_episodes: int = 400
    batch_size: int = 256
    memory_capacity: int = 10000
    target_sync_every: int = 2
    max_episodes: int = 500
    success_streak: int = 10
    readout: ReadoutKind = "mlp"
    n_hidden: int = 250
    reset_reservoir_each_episode: bool = True
    pendulum_success_window: int = 50
    reservoir: ReservoirConfig = field(default_factory=lambda: ReservoirConfig(n_i=1))
    optim: OptimConfig = field(default_factory=OptimConfig)
    env: EnvConfig = field(default_factory=EnvConfig)

    def __post_init__(self) -> None:
        if not 0.0 <= self.gamma <= 1.0:
            raise InvalidConfigError("gamma must lie in [0, 1], got %r" % self.gamma)
        if not 0.0 < self.epsilon_floor <= self.epsilon_start <= 1.0:
            raise InvalidConfigError(
                "Need 0 < epsilon_floor <= epsilon_start <= 1, got %r and %r" % (self.epsilon_floor, self.epsilon_start)
            )
        if self.readout not in READOUT_KINDS:
            raise InvalidConfigError("Unknown readout %r, expected one of %s" % (self.readout, READOUT_KINDS))
        counts = {
            "epsilon_decay_episodes": self.epsilon_decay_episodes,
            "batch_size": self.batch_size,
            "memory_capacity": self.memory_capacity,
            "target_sync_every": self.target_sync_every,
            "max_episodes": self.max_episodes,
            "success_streak": self.success_streak,
            "n_hidden": self.n_hidden,
            "pendulum_success_window": self.pendulum_success_window,
        }
        for name, value in counts.items():
            if not (isinstance(value, int) and value >= 1):
                raise InvalidConfigError("%s must be a positive integer, got %r" % (name, value))
        if self.batch_size > self.memory_capacity:
            raise InvalidConfigError(
                "batch_size %i exceeds memory_capacity %i, training could never start"
                % (self.batch_size, self.memory_capacity)
            )

    @property
    def epsilon_decay(self) -> float:
        return (self.epsilon_floor / self.epsilon_start) ** (1.0 / self.epsilon_decay_episodes)


def epsilon_at(cfg: AgentConfig, episodes_done: int) -> float:
    """:return: Epsilon after `episodes_done` completed episodes"""
    if episodes_done >= cfg.epsilon_decay_episodes:
        return cfg.epsilon_floor
    return cfg.epsilon_start * cfg.epsilon_decay**episodes_done


class EpisodeReport(NamedTuple):
    episode: int
    steps: int
    total_reward: float
    epsilon: float
    """Epsilon in effect during the episode."""
    loss_mean: float
    """Mean training loss over the episode's steps; NaN if no step trained."""
    completed: bool


class RunReport(NamedTuple):
    episodes: List[EpisodeReport]
    success: bool
    success_episode: Optional[int]
    diverged: bool = False
    """The readout's gradients became non-finite and the run was stopped early."""


class EpisodeTrace(NamedTuple):
    """Per-step record of one greedy episode, one entry per step."""

    states: List[EnvState]
    observations: Matrix
    reservoir_states: Matrix
    actions: List[int]
    rewards: List[float]


class Agent:
    """Reservoir, main and target readouts, optimizer and replay memory of one run.

    The agent is strictly single-threaded and owns all of its mutable state.
    """

    __slots__ = (
        "cfg",
        "n_actions",
        "reservoir",
        "main_net",
        "target_net",
        "optimizer",
        "memory",
        "epsilon",
        "episode",
        "streak",
    )

    def __init__(self, cfg: AgentConfig, n_actions: int, streams: RunStreams) -> None:
        self.cfg = cfg
        self.n_actions = n_actions
        self.reservoir: Reservoir = build_reservoir(cfg.reservoir, streams.reservoir)
        d_in = cfg.reservoir.n_i + cfg.reservoir.n_x
        self.main_net: Readout = init_readout(cfg.readout, d_in, cfg.n_hidden, n_actions, streams.readout)
        self.target_net: Readout = self.main_net.clone()
        self.optimizer = Optimizer(cfg.optim, self.main_net)
        self.memory = ReplayMemory(cfg.memory_capacity)
        self.epsilon = cfg.epsilon_start
        self.episode = 0
        self.streak = 0

    def __repr__(self) -> str:
        return "<%s readout=%s episode=%i epsilon=%.5f memory=%i>" % (
            type(self).__name__,
            self.cfg.readout,
            self.episode,
            self.epsilon,
            len(self.memory),
        )

    # { Acting

    def readout_input(self, o: Vector, x: Vector) -> Vector:
        return np.concatenate([o, x])

    def observe(self, o: Vector) -> Vector:
        """Drive the reservoir with `o`.

        :return:
            The new reservoir state, a copy.
        """
        o = np.asarray(o, dtype=np.float64)
        if o.shape != (self.cfg.reservoir.n_i,):
            raise DimensionMismatchError("observation", self.cfg.reservoir.n_i, o.shape)
        return self.reservoir.step(o)

    def greedy_action(self, o: Vector, x: Vector) -> int:
        """:return: The action with the highest main-network Q-value; ties go to the
        lowest index"""
        return int(np.argmax(self.main_net.forward(self.readout_input(o, x))))

    def select_action(self, o: Vector, x: Vector, rng: SeededRng, epsilon: Optional[float] = None) -> int:
        eps = self.epsilon if epsilon is None else epsilon
        if rng.random() < eps:
            return int(rng.integers(self.n_actions))
        return self.greedy_action(o, x)

    def act(self, o: Vector, rng: SeededRng) -> Tuple[int, Vector]:
        """Step the reservoir with `o`, then choose an epsilon-greedy action.

        :return:
            Tuple of (action, reservoir state); the state is the one the action was
            chosen with, and the one to store.
        """
        x = self.observe(o)
        return self.select_action(o, x, rng), x

    # } END acting

    # { Learning

    def compute_targets(self, batch: Union[TransitionBatch, Sequence[Transition]]) -> Vector:
        """Double DQN targets: the main readout picks the next action, the target
        readout values it.

        Terminal transitions get their reward as target, without bootstrapping.
        """
        if not isinstance(batch, TransitionBatch):
            batch = TransitionBatch.from_transitions(batch)
        next_inputs = batch.next_inputs
        a_main = np.argmax(self.main_net.forward(next_inputs), axis=1)
        q_target = self.target_net.forward(next_inputs)[np.arange(batch.size), a_main]
        return np.where(batch.terminal, batch.r, batch.r + self.cfg.gamma * q_target)

    def train_step(self, rng: SeededRng) -> Optional[float]:
        """Train the main readout on one sampled batch.

        :return:
            The batch loss before the update, or ``None`` while the memory holds fewer
            than ``batch_size`` transitions.
        """
        if len(self.memory) < self.cfg.batch_size:
            return None
        batch = self.memory.sample(self.cfg.batch_size, rng)
        targets = self.compute_targets(batch)
        loss, grads = self.main_net.loss_and_grads(batch.inputs, batch.a, targets)
        self.optimizer.step(grads)
        return loss

    def sync_target(self) -> None:
        self.main_net.copy_to(self.target_net)

    # } END learning

    # { Episodes

    def _begin_episode(self, env: Environment, rng: SeededRng) -> Vector:
        o = env.reset(rng)
        if self.cfg.reset_reservoir_each_episode:
            self.reservoir.reset()
        return o

    def run_episode(self, env: Environment, streams: RunStreams) -> EpisodeReport:
        """Play and learn from one episode, then advance the schedules.

        Epsilon decays once the episode ended, and the target readout is synchronized
        after every `target_sync_every`-th episode.
        """
        epsilon = self.epsilon
        o = self._begin_episode(env, streams.env)
        x = self.observe(o)
        rewards: List[float] = []
        losses: List[float] = []
        while True:
            a = self.select_action(o, x, streams.policy)
            result = env.step(a)
            x_next = self.observe(result.observation)
            self.memory.push(Transition(o, x, a, result.reward, result.observation, x_next, result.terminal))
            rewards.append(result.reward)
            loss = self.train_step(streams.replay)
            if loss is not None:
                losses.append(loss)
            if result.terminal:
                break
            o, x = result.observation, x_next
        # END while episode runs

        self.episode += 1
        completed = env.episode_completed(result, rewards, self.cfg.pendulum_success_window)
        self.streak = self.streak + 1 if completed else 0
        self.epsilon = epsilon_at(self.cfg, self.episode)
        if self.episode % self.cfg.target_sync_every == 0:
            self.sync_target()

        report = EpisodeReport(
            episode=self.episode,
            steps=result.steps_elapsed,
            total_reward=float(sum(rewards)),
            epsilon=epsilon,
            loss_mean=float(np.mean(losses)) if losses else math.nan,
            completed=completed,
        )
        _logger.debug("%s", report)
        return report

    def run_training(self, env: Environment, streams: RunStreams) -> RunReport:
        """Run episodes until `success_streak` consecutive completions, or until
        `max_episodes` episodes were played.

        A run whose gradients turn non-finite stops and counts as a failure; the episode
        in progress is not reported.
        """
        reports: List[EpisodeReport] = []
        while self.episode < self.cfg.max_episodes:
            try:
                reports.append(self.run_episode(env, streams))
            except NonFiniteGradientError as err:
                _logger.warning("%s: training diverged in episode %i: %s", env.name, self.episode + 1, err)
                return RunReport(reports, False, None, diverged=True)
            # END handle divergence
            if self.streak >= self.cfg.success_streak:
                _logger.info(
                    "%s: completed %i episodes in a row at episode %i", env.name, self.streak, self.episode
                )
                return RunReport(reports, True, self.episode)
        # END for each episode
        _logger.info("%s: no %i-streak within %i episodes", env.name, self.cfg.success_streak, self.episode)
        return RunReport(reports, False, None)

    def greedy_episode(self, env: Environment, streams: RunStreams) -> EpisodeTrace:
        """Play one episode with epsilon 0, without storing or learning anything."""
        o = self._begin_episode(env, streams.env)
        states = [env.snapshot()]
        observations = [o]
        xs: List[Vector] = []
        actions: List[int] = []
        rewards: List[float] = []
        done = False
        while not done:
            x = self.observe(o)
            a = self.greedy_action(o, x)
            result = env.step(a)
            xs.append(x)
            actions.append(a)
            rewards.append(result.reward)
            states.append(env.snapshot())
            o = result.observation
            observations.append(o)
            done = result.terminal
        # END while episode runs
        return EpisodeTrace(states, np.array(observations), np.array(xs), actions, rewards)

    # } END episodes
