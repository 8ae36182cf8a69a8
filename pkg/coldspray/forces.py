#!/usr/bin/env python3

""" This file contains the EAM force and energy evaluation. """

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
from typing import Protocol

# 3rd party imports
import numpy as np

# Local imports
from .eam import EAMPotential
from .error import ColdSprayError
from .lattice import AtomSystem
from .neighbors import DEFAULT_SKIN, NeighborList, build_neighbor_list

@dataclass
class ForceResult:
    """ Forces and energies for one configuration.

    pair_forces[k] is the force on atom first[k] due to atom second[k]; the
    force on second[k] is its negative. pair_vectors[k] is r_second - r_first
    under the minimum image convention.
    """

    forces: np.ndarray
    potential_energy: float
    density: np.ndarray
    first: np.ndarray
    second: np.ndarray
    pair_vectors: np.ndarray
    pair_forces: np.ndarray

class ForceField(Protocol):
    """ Anything that turns a configuration into forces. """

    def __call__(self, system: AtomSystem) -> ForceResult:
        ...

def compute_forces(system: AtomSystem, potential: EAMPotential,
    neighbors: NeighborList | None = None) -> ForceResult:
    """ EAM forces (eV/Å), total potential energy (eV), and per-atom electron density.

    Forces are the exact negative gradient of the spline-interpolated energy.
    Accumulation runs over pairs in (i, j) order so results do not depend on
    how the work was scheduled.
    """

    if neighbors is None:
        neighbors = build_neighbor_list(system, potential.cutoff, 0.0)
    count: int = system.n_atoms

    # Pairs inside the cutoff.
    first = neighbors.first
    second = neighbors.second
    delta = system.box.minimum_image(system.positions[second] - system.positions[first])
    r = np.sqrt(np.einsum('ij,ij->i', delta, delta))
    inside = r < potential.cutoff
    first = first[inside]
    second = second[inside]
    delta = delta[inside]
    r = r[inside]

    if len(r) and float(r.min()) < potential.r_min:
        k = int(np.argmin(r))
        raise ColdSprayError(
            f'Atoms {int(system.ids[first[k]])} and {int(system.ids[second[k]])} are ' + \
            f'{float(r[k]):.4f} Å apart, below the smallest tabulated distance ' + \
            f'{potential.r_min} Å. The configuration has collapsed.')

    # Electron density at every atom.
    (rho_pair, rho_slope) = potential.electron_density(r)
    density = np.bincount(first, weights=rho_pair, minlength=count) + \
        np.bincount(second, weights=rho_pair, minlength=count)
    (embedding, embedding_slope) = potential.embed(density)
    (phi, phi_slope) = potential.pair(r)
    potential_energy = float(np.sum(embedding) + np.sum(phi))

    # dU/dr for each pair; force on first points along +delta when dU/dr > 0.
    du_dr = (embedding_slope[first] + embedding_slope[second]) * rho_slope + phi_slope
    pair_forces = (du_dr / r)[:, None] * delta
    forces = np.zeros((count, 3))
    for axis in range(3):
        forces[:, axis] = np.bincount(first, weights=pair_forces[:, axis], minlength=count) - \
            np.bincount(second, weights=pair_forces[:, axis], minlength=count)

    return ForceResult(
        forces = forces,
        potential_energy = potential_energy,
        density = density,
        first = first,
        second = second,
        pair_vectors = delta,
        pair_forces = pair_forces)

class EAMForceField:
    """ EAM forces with a Verlet-skin neighbor list kept across calls. """

    def __init__(self, potential: EAMPotential, skin: float = DEFAULT_SKIN):
        self.potential = potential
        self.skin = skin
        self.neighbors: NeighborList | None = None
        self.rebuilds: int = 0

    def __call__(self, system: AtomSystem) -> ForceResult:
        if self.neighbors is None or self.neighbors.needs_rebuild(system.positions):
            self.neighbors = build_neighbor_list(system, self.potential.cutoff, self.skin)
            self.rebuilds += 1
        return compute_forces(system, self.potential, self.neighbors)

def potential_energy(system: AtomSystem, potential: EAMPotential) -> float:
    """ Total EAM potential energy, eV. """
    return compute_forces(system, potential).potential_energy
