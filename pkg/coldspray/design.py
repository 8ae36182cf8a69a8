#!/usr/bin/env python3

""" This file contains the DesignPoint class and the design bounds. """

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
from enum import Enum
import math

# 3rd party imports
import numpy as np
# pylint: disable=no-name-in-module
from pydantic import BaseModel, ConfigDict, model_validator

# Local imports
from .error import BoundsError

DESIGN_NAMES: tuple[str, str, str] = ('v', 'r', 'theta')

class BoundPolicy(str, Enum):
    """ What to do with an out-of-bounds design. """
    CLAMP = "clamp"
    REJECT = "reject"

class DesignPoint(BaseModel):
    """ Impact speed v (Å/ps), particle radius r (Å), impact angle theta (degrees). """

    model_config = ConfigDict(frozen=True)

    v: float
    r: float
    theta: float

    def as_array(self) -> np.ndarray:
        """ (v, r, theta) as an array. """
        return np.array([self.v, self.r, self.theta])

    @staticmethod
    def from_array(values: np.ndarray) -> "DesignPoint":
        """ Design from a (v, r, theta) array. """
        return DesignPoint(v=float(values[0]), r=float(values[1]), theta=float(values[2]))

    def velocity(self) -> np.ndarray:
        """ Particle velocity vector (v sin theta, 0, -v cos theta), Å/ps. """
        angle: float = math.radians(self.theta)
        return np.array([self.v * math.sin(angle), 0.0, -self.v * math.cos(angle)])

    def cache_key(self, seed: int) -> tuple[float, float, float, int]:
        """ Key for result caching, rounded to 1e-6. """
        return (round(self.v, 6), round(self.r, 6), round(self.theta, 6), seed)

    def __str__(self) -> str:
        return f'(v={self.v:.4f} Å/ps, r={self.r:.4f} Å, theta={self.theta:.4f}°)'

class DesignBounds(BaseModel):
    """ Box bounds of the design space. """

    v: tuple[float, float] = (3.0, 12.0)
    r: tuple[float, float] = (10.0, 20.0)
    theta: tuple[float, float] = (0.0, 30.0)

    @model_validator(mode="after")
    def check_intervals(self) -> "DesignBounds":
        """ Every interval must be non-empty. """
        for name in DESIGN_NAMES:
            (low, high) = getattr(self, name)
            if not low < high:
                raise ValueError(f"design bound {name} = ({low}, {high}) is empty")
        return self

    @property
    def lower(self) -> np.ndarray:
        """ Lower bounds as (v, r, theta). """
        return np.array([self.v[0], self.r[0], self.theta[0]])

    @property
    def upper(self) -> np.ndarray:
        """ Upper bounds as (v, r, theta). """
        return np.array([self.v[1], self.r[1], self.theta[1]])

    def contains(self, design: DesignPoint) -> bool:
        """ True if every coordinate lies within its interval. """
        values = design.as_array()
        return bool(np.all(values >= self.lower) and np.all(values <= self.upper))

def clamp_or_reject(design: DesignPoint, bounds: DesignBounds,
    policy: BoundPolicy = BoundPolicy.REJECT) -> DesignPoint:
    """ Project design onto the bounds, or reject it. """

    if bounds.contains(design):
        return design
    if policy == BoundPolicy.REJECT:
        raise BoundsError(
            f'Design {design} lies outside bounds v={bounds.v}, r={bounds.r}, ' + \
            f'theta={bounds.theta}.')
    return DesignPoint.from_array(np.clip(design.as_array(), bounds.lower, bounds.upper))
