# This module is part of desqn and is released under the
# 3-Clause BSD License: https://opensource.org/license/bsd-3-clause/

"""Two-link acrobot swing-up, observing link angles only."""

__all__ = ["Acrobot"]

import math

from desqn.envs.base import EnvConfig, Environment
from desqn.envs.constants import AcrobotConstants, load_constants

# typing ----------------------------------------------------------------

from typing import List, Tuple

from desqn.envs.base import PhysicalState
from desqn.types import SeededRng

_Derivative = Tuple[float, float, float, float]

# ------------------------------------------------------------------------


def wrap(x: float, lo: float, hi: float) -> float:
    """Wrap `x` into ``[lo, hi)`` by adding or removing whole periods."""
    diff = hi - lo
    while x > hi:
        x -= diff
    while x < lo:
        x += diff
    return x


def bound(x: float, lo: float, hi: float) -> float:
    return min(max(x, lo), hi)


class Acrobot(Environment):
    """Swing the tip of the lower link above the goal height by torquing the joint
    between the links.

    The default action set is {-1, +1} torque; with ``acrobot_actions = 3`` the zero
    torque action is added in the middle. Observation:
    ``(cos theta1, sin theta1, cos theta2, sin theta2)``. Reward: +1 once the tip
    height ``-cos(theta1) - cos(theta1 + theta2)`` exceeds 1, -1 otherwise.
    """

    name = "acrobot"
    state_names = ("theta1", "theta2", "theta1_dot", "theta2_dot")

    def __init__(self, cfg: EnvConfig = EnvConfig()) -> None:
        super().__init__(cfg)
        self.c = load_constants("acrobot", AcrobotConstants)
        t = self.c.torque
        if cfg.acrobot_actions == 3:
            self.torques: Tuple[float, ...] = (-t, 0.0, t)
        else:
            self.torques = (-t, t)

    @property
    def n_actions(self) -> int:
        return len(self.torques)

    def _initial_state(self, rng: SeededRng) -> PhysicalState:
        return tuple(float(v) for v in rng.uniform(-self.c.init_high, self.c.init_high, size=4))

    def _dsdt(self, s: _Derivative, torque: float) -> _Derivative:
        c = self.c
        m1, m2 = c.link_mass_1, c.link_mass_2
        l1 = c.link_length_1
        lc1, lc2 = c.link_com_pos_1, c.link_com_pos_2
        i1 = i2 = c.link_moi
        g = c.gravity
        theta1, theta2, dtheta1, dtheta2 = s

        d1 = m1 * lc1**2 + m2 * (l1**2 + lc2**2 + 2 * l1 * lc2 * math.cos(theta2)) + i1 + i2
        d2 = m2 * (lc2**2 + l1 * lc2 * math.cos(theta2)) + i2
        phi2 = m2 * lc2 * g * math.cos(theta1 + theta2 - math.pi / 2.0)
        phi1 = (
            -m2 * l1 * lc2 * dtheta2**2 * math.sin(theta2)
            - 2 * m2 * l1 * lc2 * dtheta2 * dtheta1 * math.sin(theta2)
            + (m1 * lc1 + m2 * l1) * g * math.cos(theta1 - math.pi / 2)
            + phi2
        )
        ddtheta2 = (torque + d2 / d1 * phi1 - m2 * l1 * lc2 * dtheta1**2 * math.sin(theta2) - phi2) / (
            m2 * lc2**2 + i2 - d2**2 / d1
        )
        ddtheta1 = -(d2 * ddtheta2 + phi1) / d1
        return (dtheta1, dtheta2, ddtheta1, ddtheta2)

    def _advance(self, state: PhysicalState, action: int) -> PhysicalState:
        c = self.c
        torque = self.torques[action]
        dt = c.dt
        y0 = (state[0], state[1], state[2], state[3])

        # One classical Runge-Kutta step over [0, dt], torque held constant.
        k1 = self._dsdt(y0, torque)
        k2 = self._dsdt(_axpy(dt / 2.0, k1, y0), torque)
        k3 = self._dsdt(_axpy(dt / 2.0, k2, y0), torque)
        k4 = self._dsdt(_axpy(dt, k3, y0), torque)
        y = tuple(y0[i] + dt / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]) for i in range(4))

        return (
            wrap(y[0], -math.pi, math.pi),
            wrap(y[1], -math.pi, math.pi),
            bound(y[2], -c.max_vel_1, c.max_vel_1),
            bound(y[3], -c.max_vel_2, c.max_vel_2),
        )

    def _observe(self, state: PhysicalState) -> List[float]:
        theta1, theta2 = state[0], state[1]
        return [math.cos(theta1), math.sin(theta1), math.cos(theta2), math.sin(theta2)]

    def _velocities(self, state: PhysicalState) -> List[float]:
        return [state[2] / self.c.max_vel_1, state[3] / self.c.max_vel_2]

    def tip_height(self, state: PhysicalState) -> float:
        return -math.cos(state[0]) - math.cos(state[1] + state[0])

    def _outcome(self, before: PhysicalState, after: PhysicalState, action: int, steps: int) -> Tuple[float, bool, bool]:
        reached = self.tip_height(after) > self.c.goal_height
        return (1.0 if reached else -1.0), reached, reached


def _axpy(a: float, x: _Derivative, y: _Derivative) -> _Derivative:
    return (y[0] + a * x[0], y[1] + a * x[1], y[2] + a * x[2], y[3] + a * x[3])
