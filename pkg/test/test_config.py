# This module is part of desqn and is released under the
# 3-Clause BSD License: https://opensource.org/license/bsd-3-clause/

import os.path as osp

import ddt

from desqn.agent import AgentConfig
from desqn.config import (
    ConfigFileParser,
    apply_overrides,
    default_agent_config,
    read_overrides,
    resolve_config,
)
from desqn.exc import InvalidConfigError, UnknownTaskError

from test.lib import TestBase, with_rw_directory


def _write(rw_dir, text, name="run.cfg"):
    path = osp.join(rw_dir, name)
    with open(path, "w", encoding="utf-8") as fp:
        fp.write(text)
    return path


@ddt.ddt
class TestConfigFile(TestBase):
    @with_rw_directory
    def test_headerless_file(self, rw_dir):
        path = _write(
            rw_dir,
            "# desk run\n"
            "g = 1.1\n"
            "lr = 0.002   ; faster\n"
            "optimizer = sgd\n"
            "max_episodes = 40\n"
            "reset_reservoir_each_episode = no\n",
        )
        self.assertEqual(
            read_overrides(path),
            {
                "g": 1.1,
                "lr": 0.002,
                "optimizer": "sgd",
                "max_episodes": 40,
                "reset_reservoir_each_episode": False,
            },
        )

    @with_rw_directory
    def test_sections_become_dotted_keys(self, rw_dir):
        path = _write(rw_dir, "[agent]\nreadout = linear\n[env]\nfull_observation = true\n[reservoir]\nn_x = 20\n")
        self.assertEqual(
            read_overrides(path),
            {"readout": "linear", "env.full_observation": True, "reservoir.n_x": 20},
        )

    @with_rw_directory
    def test_option_case_is_kept(self, rw_dir):
        parser = ConfigFileParser()
        parser.read_flat(_write(rw_dir, "Max_Episodes = 3\n"))
        self.assertEqual(parser.overrides(), {"Max_Episodes": 3})
        self.assertRaises(InvalidConfigError, apply_overrides, AgentConfig(), parser.overrides())

    @ddt.data(
        "[network]\ng = 1.0\n",
        "g = 1.0\ng = 1.2\n",
        "just some words\n",
    )
    @with_rw_directory
    def test_bad_files(self, rw_dir, text):
        self.assertRaises(InvalidConfigError, read_overrides, _write(rw_dir, text))

    def test_missing_file(self):
        self.assertRaises(OSError, read_overrides, osp.join(osp.dirname(__file__), "no-such.cfg"))


@ddt.ddt
class TestOverrides(TestBase):
    def test_flat_keys_find_their_record(self):
        cfg = apply_overrides(
            AgentConfig(),
            {"g": 1.3, "lr": 0.01, "kind": "adam", "full_observation": True, "batch_size": 32, "n_x": 20},
        )
        self.assertEqual(cfg.reservoir.g, 1.3)
        self.assertEqual(cfg.reservoir.n_x, 20)
        self.assertEqual((cfg.optim.kind, cfg.optim.lr), ("adam", 0.01))
        self.assertTrue(cfg.env.full_observation)
        self.assertEqual(cfg.batch_size, 32)

    def test_dotted_keys_and_alias(self):
        cfg = apply_overrides(AgentConfig(), {"reservoir.p": 0.2, "agent.gamma": 0.9, "optimizer": "sgd"})
        self.assertEqual((cfg.reservoir.p, cfg.gamma, cfg.optim.kind), (0.2, 0.9, "sgd"))

    def test_values_are_coerced(self):
        cfg = apply_overrides(AgentConfig(), {"g": 1, "max_episodes": "20", "gamma": "0.5", "reservoir.g": "0"})
        self.assertIsInstance(cfg.reservoir.g, float)
        self.assertEqual(cfg.reservoir.g, 0.0)
        self.assertEqual(cfg.max_episodes, 20)
        self.assertEqual(cfg.gamma, 0.5)

    def test_later_key_wins_with_warning(self):
        with self.assertLogs("desqn.config", "WARNING") as logs:
            cfg = apply_overrides(AgentConfig(), {"g": 1.0, "reservoir.g": 1.2})
        self.assertEqual(cfg.reservoir.g, 1.2)
        self.assertIn("reservoir.g", logs.output[0])

    def test_original_is_untouched(self):
        cfg = AgentConfig()
        apply_overrides(cfg, {"g": 0.1, "gamma": 0.5})
        self.assertEqual((cfg.reservoir.g, cfg.gamma), (0.9, 0.99))

    @ddt.data(
        {"nonsense": 1},
        {"reservoir": 3},
        {"network.g": 1.0},
        {"reservoir.lr": 0.1},
        {"max_episodes": 2.5},
        {"max_episodes": True},
        {"full_observation": 1},
        {"g": "fast"},
        {"g": -1.0},
        {"optimizer": "rmsprop"},
    )
    def test_invalid_overrides(self, overrides):
        self.assertRaises(InvalidConfigError, apply_overrides, AgentConfig(), overrides)


@ddt.ddt
class TestTaskDefaults(TestBase):
    @ddt.data(
        ("cartpole", "mlp", 2, 0.001),
        ("mountaincar", "mlp", 1, 0.005),
        ("mountaincar", "linear", 1, 0.01),
        ("acrobot", "mlp", 4, 0.001),
        ("pendulum", "linear", 2, 0.001),
    )
    @ddt.unpack
    def test_defaults(self, task, readout, n_i, lr):
        cfg = default_agent_config(task, readout)
        self.assertEqual((cfg.reservoir.n_i, cfg.optim.lr, cfg.readout), (n_i, lr, readout))

    def test_resolve_follows_readout_override(self):
        self.assertEqual(resolve_config("mountaincar", {"readout": "linear"}).optim.lr, 0.01)
        self.assertEqual(resolve_config("mountaincar", {"agent.readout": "linear"}).readout, "linear")

    def test_resolve_tracks_full_observation(self):
        cfg = resolve_config("cartpole", {"env.full_observation": True})
        self.assertEqual(cfg.reservoir.n_i, 4)

    def test_explicit_learning_rate_wins(self):
        self.assertEqual(resolve_config("mountaincar", {"lr": 0.02}).optim.lr, 0.02)

    def test_unknown_task(self):
        self.assertRaises(UnknownTaskError, resolve_config, "pong", {})
