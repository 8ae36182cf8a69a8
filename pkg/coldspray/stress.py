#!/usr/bin/env python3

""" This file contains the per-atom virial stress and Von Mises stress. """

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
from dataclasses import dataclass

# 3rd party imports
import numpy as np

# Local imports
from .eam import EAMPotential
from .forces import ForceResult, compute_forces
from .lattice import AtomSystem
from .units import MVV2E

# Component order in the stored arrays.
COMPONENTS: tuple[str, ...] = ('xx', 'yy', 'zz', 'xy', 'yz', 'zx')
_ROWS = np.array([0, 1, 2, 0, 1, 2])
_COLS = np.array([0, 1, 2, 1, 2, 0])

@dataclass
class StressTensor:
    """ Symmetric stress tensor(s) stored as six components [xx, yy, zz, xy, yz, zx].

    components has shape (6,) for a single tensor or (n, 6) for one per atom.
    Per-atom values are stress times volume, eV.
    """

    components: np.ndarray

    @staticmethod
    def from_values(sxx: float = 0.0, syy: float = 0.0, szz: float = 0.0,
        txy: float = 0.0, tyz: float = 0.0, tzx: float = 0.0) -> "StressTensor":
        """ Single tensor from named components. """
        return StressTensor(np.array([sxx, syy, szz, txy, tyz, tzx], dtype=np.float64))

    @property
    def sxx(self) -> np.ndarray:
        return self.components[..., 0]

    @property
    def syy(self) -> np.ndarray:
        return self.components[..., 1]

    @property
    def szz(self) -> np.ndarray:
        return self.components[..., 2]

    @property
    def txy(self) -> np.ndarray:
        return self.components[..., 3]

    @property
    def tyz(self) -> np.ndarray:
        return self.components[..., 4]

    @property
    def tzx(self) -> np.ndarray:
        return self.components[..., 5]

    def as_matrix(self) -> np.ndarray:
        """ Full 3x3 matrix form. """
        matrix = np.zeros(self.components.shape[:-1] + (3, 3))
        matrix[..., _ROWS, _COLS] = self.components
        matrix[..., _COLS, _ROWS] = self.components
        return matrix

def virial_from_forces(system: AtomSystem, result: ForceResult) -> StressTensor:
    """ Per-atom virial from an existing force evaluation.

    Each atom gets half of (r_j - r_i) outer f_ij over its pairs, minus
    m v outer v.
    """

    count: int = system.n_atoms
    # Pair term is the same for both atoms of a pair.
    outer = 0.5 * result.pair_vectors[:, _ROWS] * result.pair_forces[:, _COLS]
    components = np.zeros((count, 6))
    for k in range(6):
        components[:, k] = np.bincount(result.first, weights=outer[:, k], minlength=count) + \
            np.bincount(result.second, weights=outer[:, k], minlength=count)

    # Kinetic term.
    velocities = system.velocities
    kinetic = system.masses[:, None] * velocities[:, _ROWS] * velocities[:, _COLS] * MVV2E
    return StressTensor(components - kinetic)

def virial_stress(system: AtomSystem, potential: EAMPotential) -> StressTensor:
    """ Per-atom virial stress tensors in stress times volume units, eV. """
    return virial_from_forces(system, compute_forces(system, potential))

def system_stress(system: AtomSystem, potential: EAMPotential) -> StressTensor:
    """ Sum of per-atom tensors divided by the box volume, eV/Å^3. """
    per_atom = virial_stress(system, potential)
    return StressTensor(per_atom.components.sum(axis=0) / system.box.volume)

def von_mises(stress: StressTensor) -> np.ndarray:
    """ Von Mises equivalent stress, one value per tensor. """
    normal = 0.5 * ((stress.sxx - stress.syy) ** 2 + (stress.syy - stress.szz) ** 2 +
        (stress.szz - stress.sxx) ** 2)
    shear = 3.0 * (stress.txy ** 2 + stress.tyz ** 2 + stress.tzx ** 2)
    return np.sqrt(normal + shear)
