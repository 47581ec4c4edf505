# This module is part of desqn and is released under the
# 3-Clause BSD License: https://opensource.org/license/bsd-3-clause/

__all__ = ["FLOAT_DIGITS", "string_to_value", "value_to_string", "format_float", "assure_directory_exists"]

import math
import os
import os.path as osp

# typing ---------------------------------------------------------

from typing import Union

from desqn.types import PathLike

# ---------------------------------------------------------------------

FLOAT_DIGITS = 9
"""Significant digits of every float written to result files."""


def string_to_value(valuestr: str) -> Union[int, float, str, bool]:
    """Type a configuration value: int, then float, then yes/no style booleans,
    otherwise the string itself."""
    if not isinstance(valuestr, str):
        raise TypeError("Invalid value type: configuration values are read as text", valuestr)

    for numtype in (int, float):
        try:
            return numtype(valuestr)
        except ValueError:
            continue
    # END for each numeric type

    flag = valuestr.strip().lower()
    if flag in ("false", "no", "off"):
        return False
    if flag in ("true", "yes", "on"):
        return True
    return valuestr


def value_to_string(value: Union[str, int, float, bool]) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format_float(value)
    return str(value)


def format_float(value: float) -> str:
    """:return: `value` with :data:`FLOAT_DIGITS` significant digits; ``nan`` and
    ``inf`` spelled out"""
    if math.isnan(value):
        return "nan"
    return "%.*g" % (FLOAT_DIGITS, value)


def assure_directory_exists(path: PathLike, is_file: bool = False) -> bool:
    """Make sure that the directory pointed to by path exists.

    :param is_file:
        If ``True``, `path` is assumed to be a file and handled correctly.
        Otherwise it must be a directory.

    :return:
        ``True`` if the directory was created, ``False`` if it already existed.
    """
    if is_file:
        path = osp.dirname(path)
    # END handle file
    if path and not osp.isdir(path):
        os.makedirs(path, exist_ok=True)
        return True
    return False
