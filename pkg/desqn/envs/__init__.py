# This module is part of desqn and is released under the
# 3-Clause BSD License: https://opensource.org/license/bsd-3-clause/

"""Partially observable classic control tasks: velocities are hidden, observations are
scaled to about ``[-1, 1]`` and rewards are clipped to ``{-1, 0, 1}``."""

__all__ = [
    "Acrobot",
    "CartPole",
    "EnvConfig",
    "EnvSpec",
    "EnvState",
    "Environment",
    "MAX_STEPS",
    "MountainCar",
    "Pendulum",
    "StepResult",
    "TASKS",
    "make_env",
    "reference_trajectory",
]

from desqn.exc import UnknownTaskError

from .acrobot import Acrobot
from .base import MAX_STEPS, EnvConfig, EnvSpec, EnvState, Environment, StepResult, reference_trajectory
from .cartpole import CartPole
from .mountaincar import MountainCar
from .pendulum import Pendulum

# typing ----------------------------------------------------------------

from typing import Dict, Type

# ------------------------------------------------------------------------

TASKS: Dict[str, Type[Environment]] = {
    CartPole.name: CartPole,
    MountainCar.name: MountainCar,
    Acrobot.name: Acrobot,
    Pendulum.name: Pendulum,
}


def make_env(name: str, cfg: EnvConfig = EnvConfig()) -> Environment:
    """:return: A fresh environment for the task called `name`

    :raise UnknownTaskError:
        If no such task is registered.
    """
    try:
        env_type = TASKS[name]
    except KeyError as e:
        raise UnknownTaskError(name, list(TASKS)) from e
    return env_type(cfg)
