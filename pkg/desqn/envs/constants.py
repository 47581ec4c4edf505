# This module is part of desqn and is released under the
# 3-Clause BSD License: https://opensource.org/license/bsd-3-clause/

"""Loader for ``physics.ini``, the pinned physical constants of every task."""

__all__ = [
    "CONSTANTS_PATH",
    "CartPoleConstants",
    "MountainCarConstants",
    "AcrobotConstants",
    "PendulumConstants",
    "load_constants",
]

import configparser as cp
import functools
import os.path as osp

from desqn.exc import InvalidConfigError
from desqn.util import string_to_value

# typing ----------------------------------------------------------------

from typing import Any, Dict, NamedTuple, Type, TypeVar, Union

from desqn.types import PathLike

T_Constants = TypeVar("T_Constants", bound=tuple)

# ------------------------------------------------------------------------

CONSTANTS_PATH = osp.join(osp.dirname(__file__), "physics.ini")


class CartPoleConstants(NamedTuple):
    gravity: float
    masscart: float
    masspole: float
    length: float
    force_mag: float
    tau: float
    x_threshold: float
    theta_threshold: float
    init_high: float
    x_scale: float
    theta_scale: float
    x_dot_scale: float
    theta_dot_scale: float
    success_steps: int


class MountainCarConstants(NamedTuple):
    min_position: float
    max_position: float
    max_speed: float
    goal_position: float
    goal_velocity: float
    force: float
    gravity: float
    init_low: float
    init_high: float
    obs_shift: float
    obs_scale: float


class AcrobotConstants(NamedTuple):
    dt: float
    link_length_1: float
    link_mass_1: float
    link_mass_2: float
    link_com_pos_1: float
    link_com_pos_2: float
    link_moi: float
    gravity: float
    max_vel_1: float
    max_vel_2: float
    torque: float
    init_high: float
    goal_height: float


class PendulumConstants(NamedTuple):
    max_speed: float
    max_torque: float
    dt: float
    gravity: float
    mass: float
    length: float
    torque: float
    init_theta_high: float
    init_theta_dot_high: float
    reward_threshold: float


class _ConstantsParser(cp.RawConfigParser):
    def optionxform(self, optionstr: str) -> str:
        """Do not transform options in any way when writing."""
        return optionstr


@functools.lru_cache(maxsize=None)
def _read(path: str) -> Dict[str, Dict[str, Union[int, float, str, bool]]]:
    parser = _ConstantsParser()
    with open(path, encoding="utf-8") as fp:
        parser.read_file(fp, source=path)
    return {s: {k: string_to_value(v) for k, v in parser.items(s)} for s in parser.sections()}


def load_constants(task: str, record: Type[T_Constants], path: PathLike = CONSTANTS_PATH) -> T_Constants:
    """Read the `task` section of the constants file into `record`.

    Values are cast to the type annotated on the record's fields.

    :raise InvalidConfigError:
        If the section is missing, or keys are missing or unknown.
    """
    sections = _read(osp.abspath(path))
    try:
        section = sections[task]
    except KeyError as e:
        raise InvalidConfigError("Constants file %s has no section [%s]" % (path, task)) from e

    fields: Dict[str, Any] = getattr(record, "__annotations__")
    missing = set(fields) - set(section)
    unknown = set(section) - set(fields)
    if missing or unknown:
        raise InvalidConfigError(
            "Section [%s] of %s: missing keys %s, unknown keys %s" % (task, path, sorted(missing), sorted(unknown))
        )
    return record(**{name: fields[name](section[name]) for name in fields})
