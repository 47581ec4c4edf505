# This module is part of desqn and is released under the
# 3-Clause BSD License: https://opensource.org/license/bsd-3-clause/

"""Reading configuration files and applying overrides to an :class:`AgentConfig`.

A configuration file holds ``key = value`` lines. Lines before any section header
belong to the implicit ``[agent]`` section, where a key may name a field of any of the
records (``g = 1.1``) or address one explicitly (``reservoir.g = 1.1``). The sections
``[reservoir]``, ``[optim]`` and ``[env]`` address their record directly.
"""

__all__ = [
    "ConfigFileParser",
    "LEARNING_RATES",
    "apply_overrides",
    "default_agent_config",
    "read_overrides",
    "resolve_config",
]

import configparser as cp
import dataclasses
import logging

from desqn.agent import AgentConfig
from desqn.envs import EnvConfig, make_env
from desqn.exc import InvalidConfigError
from desqn.util import string_to_value

# typing -------------------------------------------------------

from typing import Any, Dict, Mapping, Tuple, Union

from desqn.types import PathLike, ReadoutKind

ConfigValue = Union[int, float, str, bool]

# -------------------------------------------------------------

_logger = logging.getLogger(__name__)

DEFAULT_SECTION = "agent"
RECORDS = ("reservoir", "optim", "env")
"""Nested records of :class:`AgentConfig`, in the order flat keys are resolved."""

ALIASES = {"optimizer": ("optim", "kind")}

LEARNING_RATES: Dict[Tuple[str, ReadoutKind], float] = {
    ("mountaincar", "mlp"): 0.005,
    ("mountaincar", "linear"): 0.01,
}
"""Learning rates differing from the optimizer default of 0.001, by task and readout."""


class ConfigFileParser(cp.RawConfigParser):
    """Parser for flat ``key = value`` configuration files.

    Option names are kept as written. Values come back typed, see
    :func:`desqn.util.string_to_value`.
    """

    def __init__(self) -> None:
        super().__init__(inline_comment_prefixes=("#", ";"), strict=True)

    def optionxform(self, optionstr: str) -> str:
        return optionstr

    def read_flat(self, path: PathLike) -> None:
        """Read `path`, supplying the ``[agent]`` header if the file starts without one.

        :raise OSError:
            If the file cannot be read.

        :raise InvalidConfigError:
            If the file cannot be parsed, or holds an unknown section.
        """
        with open(path, encoding="utf-8") as fp:
            text = fp.read()

        first = next((ln.strip() for ln in text.splitlines() if ln.strip() and ln.strip()[0] not in "#;"), "")
        if not first.startswith("["):
            text = "[%s]\n%s" % (DEFAULT_SECTION, text)
        try:
            self.read_string(text, source=str(path))
        except cp.Error as e:
            raise InvalidConfigError("Cannot parse configuration file %s: %s" % (path, e)) from e

        for section in self.sections():
            if section != DEFAULT_SECTION and section not in RECORDS:
                raise InvalidConfigError(
                    "Unknown section [%s] in %s, expected one of %s" % (section, path, (DEFAULT_SECTION,) + RECORDS)
                )
        # END for each section

    def get_value(self, section: str, option: str) -> ConfigValue:
        return string_to_value(self.get(section, option))

    def overrides(self) -> Dict[str, ConfigValue]:
        """:return: All options as override keys, dotted outside the ``[agent]`` section"""
        out: Dict[str, ConfigValue] = {}
        for section in self.sections():
            for option in self.options(section):
                key = option if section == DEFAULT_SECTION else "%s.%s" % (section, option)
                out[key] = self.get_value(section, option)
        # END for each section
        return out


def read_overrides(path: PathLike) -> Dict[str, ConfigValue]:
    parser = ConfigFileParser()
    parser.read_flat(path)
    return parser.overrides()


# { Overrides


def _field_map(record: Any) -> Dict[str, "dataclasses.Field[Any]"]:
    return {f.name: f for f in dataclasses.fields(record)}


def _resolve_key(cfg: AgentConfig, key: str) -> Tuple[str, str]:
    """:return: Tuple of (record, field name); the record is ``agent`` for top-level fields"""
    if key in ALIASES:
        return ALIASES[key]

    if "." in key:
        record, _, name = key.partition(".")
        if record == DEFAULT_SECTION:
            target = cfg
        elif record in RECORDS:
            target = getattr(cfg, record)
        else:
            raise InvalidConfigError("Unknown record %r in key %r" % (record, key))
        if name not in _field_map(target) or (record == DEFAULT_SECTION and name in RECORDS):
            raise InvalidConfigError("%s has no field %r" % (type(target).__name__, name))
        return record, name

    if key in _field_map(cfg) and key not in RECORDS:
        return DEFAULT_SECTION, key
    for record in RECORDS:
        if key in _field_map(getattr(cfg, record)):
            return record, key
    # END for each record
    raise InvalidConfigError("Unknown configuration key %r" % key)


def _coerce(key: str, f: "dataclasses.Field[Any]", value: Any) -> Any:
    if isinstance(value, str):
        value = string_to_value(value)
    if f.type is bool:
        if not isinstance(value, bool):
            raise InvalidConfigError("%s expects true or false, got %r" % (key, value))
        return value
    if f.type is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise InvalidConfigError("%s expects an integer, got %r" % (key, value))
        return value
    if f.type is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise InvalidConfigError("%s expects a number, got %r" % (key, value))
        return float(value)
    # Literal choices; the record validates the value itself.
    return str(value)


def apply_overrides(cfg: AgentConfig, overrides: Mapping[str, Any]) -> AgentConfig:
    """:return: A copy of `cfg` with every override applied

    :raise InvalidConfigError:
        If a key is unknown, a value has the wrong type, or the result is invalid.
    """
    updates: Dict[str, Dict[str, Any]] = {DEFAULT_SECTION: {}}
    updates.update((record, {}) for record in RECORDS)
    sources: Dict[Tuple[str, str], str] = {}

    for key, value in overrides.items():
        record, name = _resolve_key(cfg, key)
        target = cfg if record == DEFAULT_SECTION else getattr(cfg, record)
        if (record, name) in sources:
            _logger.warning("Configuration key %r overrides %r", key, sources[(record, name)])
        sources[(record, name)] = key
        updates[record][name] = _coerce(key, _field_map(target)[name], value)
    # END for each override

    nested = {record: dataclasses.replace(getattr(cfg, record), **updates[record]) for record in RECORDS}
    return dataclasses.replace(cfg, **updates[DEFAULT_SECTION], **nested)


# } END overrides


def default_agent_config(task: str, readout: ReadoutKind = "mlp", env: EnvConfig = EnvConfig()) -> AgentConfig:
    """:return: The default configuration for `task`, with the input dimension taken
    from the task and its tuned learning rate"""
    base = AgentConfig()
    n_obs = make_env(task, env).n_obs
    lr = LEARNING_RATES.get((task, readout), base.optim.lr)
    return dataclasses.replace(
        base,
        readout=readout,
        reservoir=dataclasses.replace(base.reservoir, n_i=n_obs),
        optim=dataclasses.replace(base.optim, lr=lr),
        env=env,
    )


def resolve_config(task: str, overrides: Mapping[str, Any]) -> AgentConfig:
    """Build the configuration of one run of `task`.

    The readout named in `overrides` picks the task defaults; all overrides are applied
    on top. The reservoir input dimension always follows the task's observation, so it
    tracks a ``full_observation`` override.
    """
    readout = overrides.get("readout", overrides.get("agent.readout", "mlp"))
    cfg = default_agent_config(task, readout)
    cfg = apply_overrides(cfg, overrides)
    n_obs = make_env(task, cfg.env).n_obs
    if cfg.reservoir.n_i != n_obs:
        cfg = dataclasses.replace(cfg, reservoir=dataclasses.replace(cfg.reservoir, n_i=n_obs))
    return cfg
