# This module is part of desqn and is released under the
# 3-Clause BSD License: https://opensource.org/license/bsd-3-clause/

"""Single-link pendulum swing-up with discrete torque, observing the angle only."""

__all__ = ["Pendulum", "angle_normalize"]

import math

from desqn.envs.base import EnvConfig, Environment
from desqn.envs.constants import PendulumConstants, load_constants

# typing ----------------------------------------------------------------

from typing import List, Optional, Sequence, Tuple

from desqn.envs.base import PhysicalState, StepResult
from desqn.types import SeededRng

# ------------------------------------------------------------------------


def angle_normalize(x: float) -> float:
    """:return: `x` mapped into ``[-pi, pi)``"""
    return ((x + math.pi) % (2 * math.pi)) - math.pi


class Pendulum(Environment):
    """Swing the pendulum up and keep it there, with torque -1 (action 0) or +1
    (action 1), too weak to lift it directly.

    The angle is measured from upright. Observation: ``(cos theta, sin theta)``. The
    shaped reward of the current state and torque (see
    :data:`desqn.types.PendulumReward`) is clipped to -1 if at or below -1, else +1.
    Episodes only end at the step limit.

    :param torques:
        Override the torque of each action; for oracle tests only.
    """

    name = "pendulum"
    state_names = ("theta", "theta_dot")

    def __init__(self, cfg: EnvConfig = EnvConfig(), torques: Optional[Sequence[float]] = None) -> None:
        super().__init__(cfg)
        self.c = load_constants("pendulum", PendulumConstants)
        self.torques = tuple(torques) if torques is not None else (-self.c.torque, self.c.torque)

    @property
    def n_actions(self) -> int:
        return len(self.torques)

    def _initial_state(self, rng: SeededRng) -> PhysicalState:
        theta = float(rng.uniform(-self.c.init_theta_high, self.c.init_theta_high))
        theta_dot = float(rng.uniform(-self.c.init_theta_dot_high, self.c.init_theta_dot_high))
        return (theta, theta_dot)

    def _advance(self, state: PhysicalState, action: int) -> PhysicalState:
        c = self.c
        theta, theta_dot = state
        u = min(max(self.torques[action], -c.max_torque), c.max_torque)
        # Semi-implicit Euler: the angle moves with the new velocity.
        new_theta_dot = theta_dot + (
            3.0 * c.gravity / (2.0 * c.length) * math.sin(theta) + 3.0 / (c.mass * c.length**2) * u
        ) * c.dt
        new_theta_dot = min(max(new_theta_dot, -c.max_speed), c.max_speed)
        return (theta + new_theta_dot * c.dt, new_theta_dot)

    def _observe(self, state: PhysicalState) -> List[float]:
        return [math.cos(state[0]), math.sin(state[0])]

    def _velocities(self, state: PhysicalState) -> List[float]:
        return [state[1] / self.c.max_speed]

    def shaped_reward(self, state: PhysicalState, torque: float) -> float:
        """The unclipped reward of being in `state` while applying `torque`."""
        theta = angle_normalize(state[0])
        theta_dot = state[1]
        if self.cfg.pendulum_reward == "squared":
            return -(theta**2) - 0.1 * theta_dot**2 - 0.001 * torque**2
        return -(theta**2) - 0.1 * theta_dot - 0.0012 * torque**2

    def _outcome(self, before: PhysicalState, after: PhysicalState, action: int, steps: int) -> Tuple[float, bool, bool]:
        upright = self.shaped_reward(before, self.torques[action]) > self.c.reward_threshold
        return (1.0 if upright else -1.0), False, upright

    def episode_completed(self, last: StepResult, rewards: Sequence[float], window: int) -> bool:
        """The pendulum counts as swung up if every one of the last `window` rewards
        was +1."""
        if len(rewards) < window:
            return False
        return all(r == 1.0 for r in rewards[len(rewards) - window :])
