# This module is part of desqn and is released under the
# 3-Clause BSD License: https://opensource.org/license/bsd-3-clause/

"""Under-powered car in a valley, observing its position only."""

__all__ = ["MountainCar"]

import math

from desqn.envs.base import EnvConfig, Environment
from desqn.envs.constants import MountainCarConstants, load_constants

# typing ----------------------------------------------------------------

from typing import List, Tuple

from desqn.envs.base import PhysicalState
from desqn.types import SeededRng

# ------------------------------------------------------------------------


class MountainCar(Environment):
    """Drive the car up the right hill.

    With three actions (default) these are push left, coast and push right; with two,
    push left and push right. Observation: ``((position + 0.3) / 0.9)``. Reward: +1 on
    reaching the goal, -1 on every other step.
    """

    name = "mountaincar"
    state_names = ("position", "velocity")

    def __init__(self, cfg: EnvConfig = EnvConfig()) -> None:
        super().__init__(cfg)
        self.c = load_constants("mountaincar", MountainCarConstants)
        if cfg.mountaincar_actions == 3:
            self.directions: Tuple[float, ...] = (-1.0, 0.0, 1.0)
        else:
            self.directions = (-1.0, 1.0)

    @property
    def n_actions(self) -> int:
        return len(self.directions)

    def _initial_state(self, rng: SeededRng) -> PhysicalState:
        return (float(rng.uniform(self.c.init_low, self.c.init_high)), 0.0)

    def _advance(self, state: PhysicalState, action: int) -> PhysicalState:
        c = self.c
        position, velocity = state
        velocity += self.directions[action] * c.force + math.cos(3 * position) * (-c.gravity)
        velocity = min(max(velocity, -c.max_speed), c.max_speed)
        position += velocity
        position = min(max(position, c.min_position), c.max_position)
        if position == c.min_position and velocity < 0:
            velocity = 0.0
        return (position, velocity)

    def _observe(self, state: PhysicalState) -> List[float]:
        return [(state[0] + self.c.obs_shift) / self.c.obs_scale]

    def _velocities(self, state: PhysicalState) -> List[float]:
        return [state[1] / self.c.max_speed]

    def _outcome(self, before: PhysicalState, after: PhysicalState, action: int, steps: int) -> Tuple[float, bool, bool]:
        reached = after[0] >= self.c.goal_position and after[1] >= self.c.goal_velocity
        return (1.0 if reached else -1.0), reached, reached
