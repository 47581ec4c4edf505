# This module is part of desqn and is released under the
# 3-Clause BSD License: https://opensource.org/license/bsd-3-clause/

import math
import os.path as osp

import ddt
import numpy as np

from desqn.envs import (
    MAX_STEPS,
    TASKS,
    Acrobot,
    CartPole,
    EnvConfig,
    MountainCar,
    Pendulum,
    make_env,
    reference_trajectory,
)
from desqn.envs.constants import CartPoleConstants, load_constants
from desqn.envs.pendulum import angle_normalize
from desqn.exc import EpisodeTerminatedError, InvalidActionError, InvalidConfigError, UnknownTaskError
from desqn.types import CLIPPED_REWARDS

from test.lib import TestBase, with_rw_directory
from test.lib.oracles import (
    acrobot_rollout,
    cartpole_rollout,
    mountaincar_rollout,
    pendulum_energy,
    pendulum_rollout,
)


def _variables(trajectory):
    return [s.variables for s in trajectory]


@ddt.ddt
class TestTaskShapes(TestBase):
    @ddt.data(("cartpole", 2, 2), ("mountaincar", 1, 3), ("acrobot", 4, 2), ("pendulum", 2, 2))
    @ddt.unpack
    def test_spec(self, name, n_obs, n_actions):
        env = make_env(name)
        self.assertEqual(env.spec, (name, n_obs, n_actions, MAX_STEPS))
        self.assertEqual(env.reset(self.rng).shape, (n_obs,))

    @ddt.data(("cartpole", 4), ("mountaincar", 2), ("acrobot", 6), ("pendulum", 3))
    @ddt.unpack
    def test_full_observation_appends_velocities(self, name, n_obs):
        env = make_env(name, EnvConfig(full_observation=True))
        self.assertEqual(env.n_obs, n_obs)
        self.assertTrue(np.all(np.abs(env.reset(self.rng)) <= 1.0))

    def test_action_set_switches(self):
        self.assertEqual(make_env("mountaincar", EnvConfig(mountaincar_actions=2)).n_actions, 2)
        self.assertEqual(make_env("acrobot", EnvConfig(acrobot_actions=3)).n_actions, 3)

    @ddt.data({"mountaincar_actions": 4}, {"acrobot_actions": 1}, {"pendulum_reward": "cubic"})
    def test_invalid_env_config(self, kwargs):
        self.assertRaises(InvalidConfigError, EnvConfig, **kwargs)

    def test_unknown_task(self):
        with self.assertRaises(UnknownTaskError) as info:
            make_env("pong")
        self.assertIn("cartpole", str(info.exception))
        self.assertIsInstance(info.exception, KeyError)
        self.assertEqual(sorted(TASKS), ["acrobot", "cartpole", "mountaincar", "pendulum"])


class TestObservationMaps(TestBase):
    def test_cartpole(self):
        env = CartPole()
        obs = env.set_state((2.4, 1.0, 0.209, -1.0))
        self.assertAlmostEqual(obs[0], 0.5, delta=1e-15)
        self.assertAlmostEqual(obs[1], 0.5, delta=1e-15)

    def test_mountaincar(self):
        env = MountainCar()
        self.assertEqual(env.set_state((-0.3, 0.05))[0], 0.0)
        self.assertAlmostEqual(env.set_state((0.6, 0.0))[0], 1.0, delta=1e-15)
        self.assertAlmostEqual(env.set_state((-1.2, 0.0))[0], -1.0, delta=1e-15)

    def test_acrobot(self):
        env = Acrobot()
        obs = env.set_state((0.3, -1.2, 2.0, 3.0))
        self.assert_allclose(obs, [math.cos(0.3), math.sin(0.3), math.cos(-1.2), math.sin(-1.2)], atol=0.0)

    def test_pendulum(self):
        env = Pendulum()
        self.assert_allclose(env.set_state((0.7, 5.0)), [math.cos(0.7), math.sin(0.7)], atol=0.0)

    def test_maps_follow_hidden_state(self):
        for name in TASKS:
            env = make_env(name)
            env.reset(self.make_rng(name))
            for _ in range(50):
                result = env.step(int(self.rng.integers(env.n_actions)))
                self.assert_array_equal(result.observation, env.observe())
                if result.terminal:
                    break
            # END for each step
        # END for each task

    def test_reset_ranges(self):
        cartpole = CartPole()
        mountaincar = MountainCar()
        for i in range(100):
            obs = cartpole.reset(self.make_rng("cartpole", i))
            self.assertLessEqual(abs(obs[0]), 0.05 / 4.8)
            self.assertLessEqual(abs(obs[1]), 0.05 / 0.418)
            pos = mountaincar.reset(self.make_rng("mountaincar", i))[0]
            self.assertTrue(-1.0 / 3.0 - 1e-15 <= pos <= -1.0 / 9.0 + 1e-15)
            self.assertEqual(mountaincar.state[1], 0.0)
        # END for each reset

    def test_reset_is_deterministic(self):
        for name in TASKS:
            a, b = make_env(name), make_env(name)
            self.assert_array_equal(a.reset(self.make_rng(7)), b.reset(self.make_rng(7)))
            self.assertEqual(a.state, b.state)


class TestRewards(TestBase):
    def test_pendulum_upright_with_torque(self):
        env = Pendulum()
        env.set_state((0.0, 0.0))
        self.assertAlmostEqual(env.shaped_reward(env.state, 1.0), -0.0012)
        result = env.step(1)
        self.assertEqual(result.reward, 1.0)
        self.assertTrue(result.goal)
        self.assertFalse(result.terminal)

    def test_pendulum_hanging_down(self):
        env = Pendulum()
        env.set_state((math.pi, 0.0))
        self.assertEqual(env.step(0).reward, -1.0)

    def test_pendulum_angle_is_normalized(self):
        env = Pendulum()
        env.set_state((4.0 * math.pi, 0.0))
        self.assertEqual(env.step(0).reward, 1.0)
        self.assertAlmostEqual(angle_normalize(3.0 * math.pi / 2.0), -math.pi / 2.0)

    def test_pendulum_reward_variants(self):
        printed = Pendulum()
        squared = Pendulum(EnvConfig(pendulum_reward="squared"))
        for env in (printed, squared):
            env.set_state((0.0, 4.0))
        self.assertEqual(printed.step(1).reward, 1.0)
        self.assertEqual(squared.step(1).reward, -1.0)

    def test_pendulum_ends_at_step_limit_only(self):
        env = Pendulum()
        env.reset(self.rng)
        for step in range(1, MAX_STEPS + 1):
            result = env.step(int(self.rng.integers(2)))
            self.assertEqual(result.steps_elapsed, step)
            self.assertEqual(result.terminal, step == MAX_STEPS)

    def test_pendulum_completion_window(self):
        env = Pendulum()
        env.set_state((0.0, 0.0))
        result = env.step(0)
        self.assertTrue(env.episode_completed(result, [-1.0] * 150 + [1.0] * 50, 50))
        self.assertFalse(env.episode_completed(result, [-1.0] * 151 + [1.0] * 49, 50))
        self.assertFalse(env.episode_completed(result, [1.0] * 10, 50))

    def test_acrobot_hanging_down(self):
        env = Acrobot()
        env.set_state((0.0, 0.0, 0.0, 0.0))
        self.assertEqual(env.tip_height(env.state), -2.0)
        result = env.step(0)
        self.assertEqual(result.reward, -1.0)
        self.assertFalse(result.terminal)

    def test_acrobot_goal(self):
        env = Acrobot()
        env.set_state((math.pi, 0.0, 0.0, 0.0))
        result = env.step(1)
        self.assertGreater(env.tip_height(env.state), 1.0)
        self.assertEqual((result.reward, result.terminal, result.goal), (1.0, True, True))

    def test_cartpole_early_failure(self):
        env = CartPole()
        env.set_state((2.39, 1.0, 0.0, 0.0), steps=150)
        result = env.step(1)
        self.assertEqual((result.reward, result.terminal, result.goal), (-1.0, True, False))

    def test_cartpole_survival(self):
        env = CartPole()
        env.set_state((0.0, 0.0, 0.0, 0.0), steps=MAX_STEPS - 1)
        result = env.step(1)
        self.assertEqual((result.reward, result.terminal, result.goal), (1.0, True, True))
        self.assertEqual(result.steps_elapsed, MAX_STEPS)

    def test_cartpole_reward_is_zero_midway(self):
        env = CartPole()
        env.set_state((0.0, 0.0, 0.0, 0.0))
        self.assertEqual(env.step(0).reward, 0.0)

    def test_mountaincar_goal(self):
        env = MountainCar()
        env.set_state((0.49, 0.05))
        result = env.step(2)
        self.assertEqual((result.reward, result.terminal, result.goal), (1.0, True, True))

    def test_rewards_stay_in_clip_set(self):
        for name in TASKS:
            env = make_env(name)
            rng = self.make_rng(name)
            env.reset(rng)
            for _ in range(10000):
                result = env.step(int(rng.integers(env.n_actions)))
                self.assertIn(result.reward, CLIPPED_REWARDS)
                self.assertLessEqual(result.steps_elapsed, MAX_STEPS)
                if result.terminal:
                    env.reset(rng)
            # END for each step
        # END for each task


class TestEpisodeBookkeeping(TestBase):
    def test_step_before_reset(self):
        self.assertRaises(EpisodeTerminatedError, CartPole().step, 0)

    def test_step_after_terminal(self):
        env = MountainCar()
        env.reset(self.rng)
        for _ in range(MAX_STEPS):
            env.step(1)
        self.assertTrue(env.done)
        self.assertRaises(EpisodeTerminatedError, env.step, 1)
        env.reset(self.rng)
        self.assertEqual(env.step(1).steps_elapsed, 1)

    def test_invalid_action(self):
        env = Acrobot()
        env.reset(self.rng)
        for action in (2, -1, 0.0, "1"):
            with self.assertRaises(InvalidActionError):
                env.step(action)
        self.assertEqual(env.steps, 0)

    def test_numpy_integer_action(self):
        env = CartPole()
        env.reset(self.rng)
        self.assertEqual(env.step(np.int64(1)).steps_elapsed, 1)

    def test_same_actions_same_results(self):
        actions = self.rng.integers(0, 3, size=MAX_STEPS)
        streams = []
        for _ in range(2):
            env = MountainCar()
            env.reset(self.make_rng("start"))
            stream = []
            for a in actions:
                result = env.step(int(a))
                stream.append((tuple(result.observation), result.reward, result.terminal))
                if result.terminal:
                    break
            streams.append(stream)
        self.assertEqual(streams[0], streams[1])


class TestReferenceTrajectories(TestBase):
    def assert_matches(self, trajectory, oracle):
        self.assertEqual(len(trajectory), len(oracle))
        for step, (got, want) in enumerate(zip(_variables(trajectory), oracle)):
            self.assert_allclose(got, want, atol=1e-10, msg="step %i" % step)

    def test_cartpole_alternating(self):
        env = CartPole()
        env.set_state((0.01, -0.02, 0.03, 0.0))
        actions = [i % 2 for i in range(MAX_STEPS)]
        self.assert_matches(reference_trajectory(env, actions), cartpole_rollout(env.state, actions))

    def test_cartpole_random(self):
        env = CartPole()
        env.reset(self.rng)
        actions = [int(a) for a in self.rng.integers(0, 2, size=MAX_STEPS)]
        self.assert_matches(reference_trajectory(env, actions), cartpole_rollout(env.state, actions))

    def test_mountaincar_random(self):
        for n_actions in (3, 2):
            env = MountainCar(EnvConfig(mountaincar_actions=n_actions))
            env.reset(self.rng)
            actions = [int(a) for a in self.rng.integers(0, n_actions, size=MAX_STEPS)]
            self.assert_matches(
                reference_trajectory(env, actions), mountaincar_rollout(env.state, actions, n_actions)
            )

    def test_mountaincar_is_under_powered(self):
        env = MountainCar()
        env.set_state((-0.5, 0.0))
        actions = [2] * MAX_STEPS
        trajectory = _variables(reference_trajectory(env, actions))
        self.assert_matches(reference_trajectory(env, actions), mountaincar_rollout((-0.5, 0.0), actions))
        self.assertTrue(all(position < 0.5 for position, _ in trajectory))

        rewards = []
        while not env.done:
            rewards.append(env.step(2).reward)
        self.assertEqual(rewards, [-1.0] * MAX_STEPS)

    def test_acrobot_random(self):
        for torques in ((-1.0, 1.0), (-1.0, 0.0, 1.0)):
            env = Acrobot(EnvConfig(acrobot_actions=len(torques)))
            env.reset(self.rng)
            actions = [int(a) for a in self.rng.integers(0, len(torques), size=MAX_STEPS)]
            self.assert_matches(reference_trajectory(env, actions), acrobot_rollout(env.state, actions, torques))

    def test_acrobot_angles_stay_wrapped(self):
        env = Acrobot()
        env.set_state((3.0, -3.0, 12.0, -25.0))
        for theta1, theta2, dtheta1, dtheta2 in _variables(reference_trajectory(env, [1] * MAX_STEPS)):
            self.assertTrue(-math.pi <= theta1 <= math.pi and -math.pi <= theta2 <= math.pi)
            self.assertLessEqual(abs(dtheta1), 4 * math.pi)
            self.assertLessEqual(abs(dtheta2), 9 * math.pi)

    def test_pendulum_random(self):
        env = Pendulum()
        env.reset(self.rng)
        actions = [int(a) for a in self.rng.integers(0, 2, size=MAX_STEPS)]
        torques = [(-1.0, 1.0)[a] for a in actions]
        self.assert_matches(reference_trajectory(env, actions), pendulum_rollout(env.state, torques))

    def test_unforced_pendulum_energy(self):
        env = Pendulum(torques=(0.0,))
        env.set_state((math.pi / 2.0, 0.0))
        trajectory = _variables(reference_trajectory(env, [0] * MAX_STEPS))
        oracle = pendulum_rollout((math.pi / 2.0, 0.0), [0.0] * MAX_STEPS)
        self.assert_matches(reference_trajectory(env, [0] * MAX_STEPS), oracle)
        for got, want in zip(trajectory, oracle):
            drift = abs(pendulum_energy(got) - pendulum_energy(want))
            self.assertLess(drift, 0.01 * max(abs(pendulum_energy(want)), 1.0))

    def test_trajectory_leaves_env_untouched(self):
        env = CartPole()
        env.set_state((0.0, 0.1, 0.0, 0.1), steps=5)
        before = env.snapshot()
        trajectory = reference_trajectory(env, [0, 1, 1])
        self.assertEqual(env.snapshot(), before)
        self.assertEqual([s.steps for s in trajectory], [5, 6, 7, 8])
        self.assertRaises(InvalidActionError, reference_trajectory, env, [0, 2])


class TestConstants(TestBase):
    def test_packaged_constants(self):
        c = load_constants("cartpole", CartPoleConstants)
        self.assertEqual(c.success_steps, 195)
        self.assertIsInstance(c.success_steps, int)
        self.assertEqual(c.tau, 0.02)

    @with_rw_directory
    def test_missing_section(self, rw_dir):
        path = osp.join(rw_dir, "physics.ini")
        with open(path, "w") as fp:
            fp.write("[mountaincar]\nforce = 0.001\n")
        self.assertRaises(InvalidConfigError, load_constants, "cartpole", CartPoleConstants, path)

    @with_rw_directory
    def test_missing_and_unknown_keys(self, rw_dir):
        path = osp.join(rw_dir, "physics.ini")
        with open(path, "w") as fp:
            fp.write("[cartpole]\ngravity = 9.8\nwind = 3\n")
        with self.assertRaises(InvalidConfigError) as info:
            load_constants("cartpole", CartPoleConstants, path)
        self.assertIn("wind", str(info.exception))
        self.assertIn("tau", str(info.exception))
