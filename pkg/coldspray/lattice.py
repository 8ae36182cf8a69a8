#!/usr/bin/env python3

""" This file contains the AtomSystem and SimulationBox classes and FCC lattice builders. """

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
from dataclasses import dataclass, field
from enum import Enum, IntEnum
import logging
import math
from typing import Sequence

# 3rd party imports
import numpy as np

# Local imports
from .error import ColdSprayError
from .units import COPPER_MASS

# Fractional coordinates of the four atoms in a conventional FCC cell.
FCC_BASIS: np.ndarray = np.array([
    [0.0, 0.0, 0.0],
    [0.5, 0.5, 0.0],
    [0.5, 0.0, 0.5],
    [0.0, 0.5, 0.5]])

# Tolerance for "fits one more cell" comparisons.
CELL_EPS: float = 1e-9

class Group(IntEnum):
    """ Atom groups. The integer value is what dump files store. """
    SUBSTRATE = 0
    PARTICLE = 1
    FIXED_WALL = 2

class Boundary(str, Enum):
    """ Per-axis boundary rule. """
    PERIODIC = "periodic"
    OPEN = "open"

@dataclass
class SimulationBox:
    """ Orthorhombic box with lower corner at the origin. """

    lengths: np.ndarray
    boundary: tuple[Boundary, Boundary, Boundary] = (
        Boundary.PERIODIC, Boundary.PERIODIC, Boundary.OPEN)

    def __post_init__(self) -> None:
        self.lengths = np.asarray(self.lengths, dtype=np.float64)
        if self.lengths.shape != (3,) or np.any(self.lengths <= 0.0):
            raise ColdSprayError(f'Box lengths must be three positive values, got {self.lengths}')
        self.boundary = tuple(Boundary(b) for b in self.boundary) # type: ignore

    @property
    def periodic(self) -> np.ndarray:
        """ Boolean mask of periodic axes. """
        return np.array([b == Boundary.PERIODIC for b in self.boundary])

    @property
    def volume(self) -> float:
        """ Box volume, Å^3. """
        return float(np.prod(self.lengths))

    def minimum_image(self, delta: np.ndarray) -> np.ndarray:
        """ Apply the minimum image convention on periodic axes only. """
        periodic = self.periodic
        if not periodic.any():
            return delta
        shift = np.where(periodic, np.round(delta / self.lengths), 0.0)
        return delta - shift * self.lengths

@dataclass
class AtomSystem:
    """ All atoms of a simulation, stored as parallel arrays sorted by id. """

    ids: np.ndarray
    positions: np.ndarray
    velocities: np.ndarray
    masses: np.ndarray
    reference_positions: np.ndarray
    groups: np.ndarray
    box: SimulationBox
    images: np.ndarray = field(default=None) # type: ignore

    def __post_init__(self) -> None:
        if self.images is None:
            self.images = np.zeros((len(self.ids), 3), dtype=np.int64)
        if len(np.unique(self.ids)) != len(self.ids):
            raise ColdSprayError('Atom ids must be unique')

    @property
    def n_atoms(self) -> int:
        """ Number of atoms. """
        return len(self.ids)

    @property
    def displacements(self) -> np.ndarray:
        """ Displacement from reference position, unwrapped across periodic images. """
        return self.positions + self.images * self.box.lengths - self.reference_positions

    def group_mask(self, *groups: Group) -> np.ndarray:
        """ Boolean mask of atoms belonging to any of the given groups. """
        return np.isin(self.groups, [int(g) for g in groups])

    def copy(self) -> "AtomSystem":
        """ Deep copy. """
        return AtomSystem(
            ids = self.ids.copy(),
            positions = self.positions.copy(),
            velocities = self.velocities.copy(),
            masses = self.masses.copy(),
            reference_positions = self.reference_positions.copy(),
            groups = self.groups.copy(),
            box = SimulationBox(self.box.lengths.copy(), self.box.boundary),
            images = self.images.copy())

    def wrap(self) -> None:
        """ Wrap positions back into the box on periodic axes. """
        periodic = self.box.periodic
        if not periodic.any():
            return
        shift = np.floor(self.positions / self.box.lengths).astype(np.int64)
        shift[:, ~periodic] = 0
        if shift.any():
            self.positions -= shift * self.box.lengths
            self.images += shift

    def translated(self, offset: Sequence[float]) -> "AtomSystem":
        """ Return a copy moved by offset, reference positions included. """
        moved = self.copy()
        moved.positions += np.asarray(offset, dtype=np.float64)
        moved.reference_positions += np.asarray(offset, dtype=np.float64)
        return moved

def create_fragment(positions: np.ndarray, group: Group, mass: float = COPPER_MASS) -> AtomSystem:
    """ Create an AtomSystem fragment at rest with an open bounding box. """

    count: int = len(positions)
    extent = np.ptp(positions, axis=0) + 1.0 if count > 0 else np.ones(3)
    return AtomSystem(
        ids = np.arange(1, count + 1, dtype=np.int64),
        positions = positions.copy(),
        velocities = np.zeros((count, 3)),
        masses = np.full(count, mass),
        reference_positions = positions.copy(),
        groups = np.full(count, int(group), dtype=np.int8),
        box = SimulationBox(extent, (Boundary.OPEN, Boundary.OPEN, Boundary.OPEN)))

def combine(fragments: Sequence[AtomSystem], box: SimulationBox) -> AtomSystem:
    """ Concatenate fragments into one system, renumbering ids from 1. """

    positions = np.concatenate([f.positions for f in fragments])
    return AtomSystem(
        ids = np.arange(1, len(positions) + 1, dtype=np.int64),
        positions = positions,
        velocities = np.concatenate([f.velocities for f in fragments]),
        masses = np.concatenate([f.masses for f in fragments]),
        reference_positions = np.concatenate([f.reference_positions for f in fragments]),
        groups = np.concatenate([f.groups for f in fragments]),
        box = box)

def fcc_cell_counts(lengths: Sequence[float], lattice_constant: float) -> np.ndarray:
    """ Number of whole FCC cells that fit along each axis. """
    return np.floor(np.asarray(lengths, dtype=np.float64) / lattice_constant + CELL_EPS) \
        .astype(np.int64)

def fcc_sites(counts: Sequence[int], lattice_constant: float,
    start: Sequence[int] = (0, 0, 0)) -> np.ndarray:
    """ FCC sites for a block of cells, four per cell, z cell index varying fastest. """

    axes = [np.arange(s, s + c) for s, c in zip(start, counts)]
    cells = np.stack(np.meshgrid(*axes, indexing='ij'), axis=-1).reshape(-1, 3)
    sites = cells[:, None, :] + FCC_BASIS[None, :, :]
    return sites.reshape(-1, 3) * lattice_constant

def build_fcc_region(lengths: Sequence[float], lattice_constant: float,
    group: Group, origin: Sequence[float] = (0.0, 0.0, 0.0)) -> AtomSystem:
    """ Fill a rectangular region with FCC sites, cell corners on multiples of the
    lattice constant. """

    if lattice_constant <= 0.0:
        raise ColdSprayError(f'Lattice constant must be positive, got {lattice_constant}')
    counts = fcc_cell_counts(lengths, lattice_constant)
    if np.any(counts < 1):
        raise ColdSprayError(
            f'Region {tuple(lengths)} Å is smaller than one FCC cell of {lattice_constant} Å ' + \
            'along at least one axis.')

    positions = fcc_sites(counts, lattice_constant) + np.asarray(origin, dtype=np.float64)
    logging.debug("Built FCC region %s cells, %d atoms", counts.tolist(), len(positions))
    return create_fragment(positions, group)

def build_sphere(radius: float, lattice_constant: float,
    center: Sequence[float] = (0.0, 0.0, 0.0)) -> AtomSystem:
    """ FCC sites within radius of a lattice site placed at center. """

    if lattice_constant <= 0.0:
        raise ColdSprayError(f'Lattice constant must be positive, got {lattice_constant}')
    if radius < 0.5 * lattice_constant:
        raise ColdSprayError(
            f'Sphere radius {radius} Å is below half a lattice constant ({lattice_constant} Å).')

    # Enumerate a cube of cells around the origin and keep sites inside the sphere.
    half: int = math.ceil(radius / lattice_constant) + 1
    sites = fcc_sites((2 * half,) * 3, lattice_constant, start=(-half,) * 3)
    inside = np.einsum('ij,ij->i', sites, sites) <= radius * radius + CELL_EPS
    positions = sites[inside] + np.asarray(center, dtype=np.float64)
    logging.debug("Built sphere radius %.3f Å, %d atoms", radius, len(positions))
    return create_fragment(positions, Group.PARTICLE)
