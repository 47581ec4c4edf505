# This module is part of desqn and is released under the
# 3-Clause BSD License: https://opensource.org/license/bsd-3-clause/

"""Deep echo state Q-network: an echo state reservoir feeding a Double DQN readout,
with partially observable classic control tasks and the sweeps around them."""

__all__ = [
    "Agent",
    "AgentConfig",
    "DesqnError",
    "EnvConfig",
    "EpisodeReport",
    "LinearReadout",
    "MlpReadout",
    "OptimConfig",
    "ReplayMemory",
    "Reservoir",
    "ReservoirConfig",
    "RunReport",
    "Transition",
    "apply_overrides",
    "build_reservoir",
    "default_agent_config",
    "init_readout",
    "make_env",
    "rng_streams",
]

__version__ = "desqn"

from desqn.agent import Agent, AgentConfig, EpisodeReport, RunReport
from desqn.config import apply_overrides, default_agent_config
from desqn.envs import EnvConfig, make_env
from desqn.exc import DesqnError
from desqn.numerics import rng_streams
from desqn.optim import OptimConfig
from desqn.readout import LinearReadout, MlpReadout, init_readout
from desqn.replay import ReplayMemory, Transition
from desqn.reservoir import Reservoir, ReservoirConfig, build_reservoir
