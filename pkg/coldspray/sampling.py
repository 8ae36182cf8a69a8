#!/usr/bin/env python3

""" Latin hypercube sampling and unit-cube scaling. """

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

# 3rd party imports
import numpy as np

# Local imports
from .error import ColdSprayError

def latin_hypercube(n: int, dims: int, seed: int | np.random.Generator) -> np.ndarray:
    """ n points in [0, 1)^dims, one per stratum [k/n, (k+1)/n) along every dimension. """
    if n < 1 or dims < 1:
        raise ColdSprayError(f'Latin hypercube needs n >= 1 and dims >= 1, got {n}, {dims}')
    rng = np.random.default_rng(seed)
    samples = np.empty((n, dims))
    for d in range(dims):
        samples[:, d] = (rng.permutation(n) + rng.random(n)) / n
    # Guard the open upper edge against round-up.
    return np.minimum(samples, np.nextafter(1.0, 0.0))

def normalize(points: np.ndarray, lower: np.ndarray, upper: np.ndarray) -> np.ndarray:
    """ Physical units to the unit cube. """
    return (np.asarray(points) - lower) / (upper - lower)

def denormalize(unit: np.ndarray, lower: np.ndarray, upper: np.ndarray) -> np.ndarray:
    """ Unit cube to physical units. """
    return lower + np.asarray(unit) * (upper - lower)
