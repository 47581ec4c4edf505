# This module is part of desqn and is released under the
# 3-Clause BSD License: https://opensource.org/license/bsd-3-clause/

__all__ = [
    "StubEnv",
    "TestBase",
    "TestCase",
    "SkipTest",
    "small_config",
    "with_rw_directory",
]

from functools import wraps
import logging
import shutil
import tempfile
import unittest

import numpy as np

from desqn.agent import AgentConfig
from desqn.envs import EnvConfig, Environment
from desqn.numerics import make_rng, stable_seed
from desqn.reservoir import ReservoirConfig

TestCase = unittest.TestCase
SkipTest = unittest.SkipTest

_logger = logging.getLogger(__name__)

# { Decorators


def with_rw_directory(func):
    """Create a temporary directory which can be written to, remove it if the
    test succeeds, but leave it otherwise to aid additional debugging."""

    @wraps(func)
    def wrapper(self, *args, **kwargs):
        path = tempfile.mkdtemp(prefix=func.__name__)
        keep = False
        try:
            return func(self, path, *args, **kwargs)
        except Exception:
            _logger.info(
                "%s %s.%s failed, output is at %r\n",
                "Test" if func.__name__.startswith("test_") else "Helper",
                type(self).__name__,
                func.__name__,
                path,
            )
            keep = True
            raise
        finally:
            if not keep:
                shutil.rmtree(path, ignore_errors=True)

    return wrapper


# } END decorators

# { Fixtures


def small_config(n_i: int = 1, **kwargs) -> AgentConfig:
    """An agent configuration small enough to train hundreds of steps in a test."""
    params = {
        "batch_size": 8,
        "memory_capacity": 64,
        "n_hidden": 8,
        "reservoir": ReservoirConfig(n_i=n_i, n_x=10, p=0.5),
    }
    params.update(kwargs)
    return AgentConfig(**params)


class StubEnv(Environment):
    """Episodes of fixed length whose completion is decided by `completes`, called with
    the 1-based episode index."""

    name = "stub"
    state_names = ("t",)

    def __init__(self, completes, length=3):
        super().__init__(EnvConfig())
        self.completes = completes
        self.length = length
        self.episodes = 0

    @property
    def n_actions(self):
        return 2

    def _initial_state(self, rng):
        self.episodes += 1
        return (0.0,)

    def _advance(self, state, action):
        return (state[0] + 1.0,)

    def _observe(self, state):
        return [state[0] / 10.0]

    def _velocities(self, state):
        return []

    def _outcome(self, before, after, action, steps):
        return -1.0, steps >= self.length, False

    def episode_completed(self, last, rewards, window):
        return bool(self.completes(self.episodes))


# } END fixtures


class TestBase(TestCase):
    """Base class providing default functionality to all tests such as:

    - Utility functions provided by the TestCase base of the unittest method such as::

        self.fail("todo")
        self.assertRaises(...)

    - A random generator per test, seeded from the test's id, so every test draws the
      same numbers on every run regardless of which other tests ran::

        self.rng.random()

    - Array assertions that report the largest deviation on failure.
    """

    def setUp(self):
        super().setUp()
        self.rng = make_rng(stable_seed(self.id()))

    def make_rng(self, *parts):
        """:return: A further generator, independent of :attr:`rng`"""
        return make_rng(stable_seed(self.id(), *parts))

    def assert_allclose(self, actual, desired, rtol=0.0, atol=1e-12, msg=""):
        np.testing.assert_allclose(actual, desired, rtol=rtol, atol=atol, err_msg=msg)

    def assert_array_equal(self, actual, desired, msg=""):
        np.testing.assert_array_equal(actual, desired, err_msg=msg)
