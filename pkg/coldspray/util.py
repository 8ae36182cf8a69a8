#!/usr/bin/env python3

""" Utility methods for Cold Loop. """

# Copyright 2024 Cold Loop contributors
#
# This file is part of Cold Loop.
#
# Cold Loop is free software: you can redistribute it and/or modify it under
# the terms of the GNU General Public License as published by the Free Software
# Foundation, either version 3 of the License, or (at your option) any later
# version.
#
# Cold Loop is distributed in the hope that it will be useful, but WITHOUT ANY
# WARRANTY; without even the implied warranty of MERCHANTABILITY or FITNESS FOR
# A PARTICULAR PURPOSE. See the GNU General Public License for more details.
#
# You should have received a copy of the GNU General Public License along with
# Cold Loop. If not, see <https://www.gnu.org/licenses/>.

# Standard library imports
import os

# Local imports
from .error import ColdSprayError

def lookup_env_var(env_var: str) -> str | None:
    """ Lookup environment variable and return as string. """
    env_var_value = os.getenv(env_var)
    if env_var_value is None:
        return None
    return env_var_value

def parse_float(value: str, line_no: int, what: str) -> float:
    """ Parse a float from a text file, naming the line on failure. """
    try:
        return float(value.strip())
    except ValueError as ex:
        raise ColdSprayError(f'Unable to parse {what} "{value}" on line {line_no}.') from ex

def parse_int(value: str, line_no: int, what: str) -> int:
    """ Parse an integer from a text file, naming the line on failure. """
    try:
        return int(value.strip())
    except ValueError as ex:
        raise ColdSprayError(f'Unable to parse {what} "{value}" on line {line_no}.') from ex

def format_float(value: float) -> str:
    """ Format a float so that it parses back to the same value. """
    return repr(float(value))

def ensure_dir(path: str) -> None:
    """ Create directory if it doesn't exist. """
    try:
        os.makedirs(path, exist_ok=True)
    except OSError as ex:
        raise ColdSprayError(f'Could not create directory {path}.\n{str(ex)}') from ex
