# This module is part of desqn and is released under the
# 3-Clause BSD License: https://opensource.org/license/bsd-3-clause/

"""Cart-pole balancing with cart velocity and pole angular velocity hidden."""

__all__ = ["CartPole"]

import math

from desqn.envs.base import MAX_STEPS, EnvConfig, Environment
from desqn.envs.constants import CartPoleConstants, load_constants

# typing ----------------------------------------------------------------

from typing import List, Tuple

from desqn.envs.base import PhysicalState
from desqn.types import SeededRng

# ------------------------------------------------------------------------


class CartPole(Environment):
    """Keep a pole upright for 200 steps by pushing the cart left (0) or right (1).

    Observation: ``(x / 4.8, theta / 0.418)``. The reward is 0 on every step but the
    last; the last step earns +1 if more than 195 steps were survived, else -1.
    """

    name = "cartpole"
    state_names = ("x", "x_dot", "theta", "theta_dot")

    def __init__(self, cfg: EnvConfig = EnvConfig()) -> None:
        super().__init__(cfg)
        self.c = load_constants("cartpole", CartPoleConstants)

    @property
    def n_actions(self) -> int:
        return 2

    def _initial_state(self, rng: SeededRng) -> PhysicalState:
        return tuple(float(v) for v in rng.uniform(-self.c.init_high, self.c.init_high, size=4))

    def _advance(self, state: PhysicalState, action: int) -> PhysicalState:
        c = self.c
        x, x_dot, theta, theta_dot = state
        force = c.force_mag if action == 1 else -c.force_mag
        total_mass = c.masspole + c.masscart
        polemass_length = c.masspole * c.length
        costheta = math.cos(theta)
        sintheta = math.sin(theta)

        temp = (force + polemass_length * theta_dot**2 * sintheta) / total_mass
        thetaacc = (c.gravity * sintheta - costheta * temp) / (
            c.length * (4.0 / 3.0 - c.masspole * costheta**2 / total_mass)
        )
        xacc = temp - polemass_length * thetaacc * costheta / total_mass

        # Explicit Euler: positions move with the old velocities.
        return (
            x + c.tau * x_dot,
            x_dot + c.tau * xacc,
            theta + c.tau * theta_dot,
            theta_dot + c.tau * thetaacc,
        )

    def _observe(self, state: PhysicalState) -> List[float]:
        return [state[0] / self.c.x_scale, state[2] / self.c.theta_scale]

    def _velocities(self, state: PhysicalState) -> List[float]:
        return [state[1] / self.c.x_dot_scale, state[3] / self.c.theta_dot_scale]

    def failed(self, state: PhysicalState) -> bool:
        x, _, theta, _ = state
        return x < -self.c.x_threshold or x > self.c.x_threshold or abs(theta) > self.c.theta_threshold

    def _outcome(self, before: PhysicalState, after: PhysicalState, action: int, steps: int) -> Tuple[float, bool, bool]:
        terminated = self.failed(after)
        if not (terminated or steps >= MAX_STEPS):
            return 0.0, False, False
        survived = steps > self.c.success_steps
        return (1.0 if survived else -1.0), terminated, survived
