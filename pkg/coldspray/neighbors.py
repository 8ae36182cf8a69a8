#!/usr/bin/env python3

""" This file contains the cell list pair search used by the force computation. """

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
import itertools
import logging

# 3rd party imports
import numpy as np

# Local imports
from .error import ColdSprayError
from .lattice import AtomSystem, SimulationBox

DEFAULT_SKIN: float = 0.3 # Å

@dataclass
class NeighborList:
    """ Unique atom index pairs (i < j) within cutoff + skin, sorted by (i, j). """

    first: np.ndarray
    second: np.ndarray
    cutoff: float
    skin: float
    built_positions: np.ndarray
    box: SimulationBox

    @property
    def n_pairs(self) -> int:
        """ Number of candidate pairs. """
        return len(self.first)

    def needs_rebuild(self, positions: np.ndarray) -> bool:
        """ True once any atom has moved more than half the skin since the build. """
        if positions.shape != self.built_positions.shape:
            return True
        moved = self.box.minimum_image(positions - self.built_positions)
        max_sq = float(np.max(np.einsum('ij,ij->i', moved, moved))) if len(moved) else 0.0
        return max_sq > (0.5 * self.skin) ** 2

def axis_offsets(n_cells: int, periodic: bool) -> list[int]:
    """ Cell offsets to visit along one axis, each neighboring cell exactly once. """
    if periodic and n_cells < 3:
        return list(range(n_cells))
    return [-1, 0, 1]

def bin_atoms(positions: np.ndarray, box: SimulationBox,
    cell_size: float) -> tuple[np.ndarray, np.ndarray]:
    """ Assign atoms to cells. Returns (per-atom 3-D cell index, cells per axis). """

    periodic = box.periodic
    lower = np.where(periodic, 0.0, positions.min(axis=0))
    extent = np.where(periodic, box.lengths, np.maximum(np.ptp(positions, axis=0), 1e-9))
    n_cells = np.maximum(1, np.floor(extent / cell_size)).astype(np.int64)
    scaled = (positions - lower) / extent * n_cells
    cells = np.floor(scaled).astype(np.int64)

    # Periodic axes wrap, open axes clip the far edge into the last cell.
    cells = np.where(periodic, np.mod(cells, n_cells), np.clip(cells, 0, n_cells - 1))
    return (cells, n_cells)

def build_neighbor_list(system: AtomSystem, cutoff: float,
    skin: float = DEFAULT_SKIN) -> NeighborList:
    """ Find all pairs closer than cutoff + skin using a cell list. """

    box = system.box
    reach: float = cutoff + skin
    periodic = box.periodic
    if np.any(periodic & (box.lengths < 2.0 * reach)):
        raise ColdSprayError(
            f'Periodic box lengths {box.lengths.tolist()} Å must be at least twice ' + \
            f'the neighbor reach {reach:.3f} Å.')

    positions = system.positions
    count: int = len(positions)
    if count < 2:
        empty = np.zeros(0, dtype=np.int64)
        return NeighborList(empty, empty, cutoff, skin, positions.copy(), box)

    # Sort atoms by linear cell id.
    (cells, n_cells) = bin_atoms(positions, box, reach)
    linear = np.ravel_multi_index(cells.T, n_cells)
    order = np.argsort(linear, kind='stable')
    starts = np.searchsorted(linear[order], np.arange(np.prod(n_cells)), side='left')
    counts = np.bincount(linear, minlength=int(np.prod(n_cells)))

    first_parts: list[np.ndarray] = []
    second_parts: list[np.ndarray] = []
    atom_index = np.arange(count)
    offsets = [axis_offsets(int(n), bool(p)) for n, p in zip(n_cells, periodic)]
    for offset in itertools.product(*offsets):
        # Neighbor cell of every atom for this offset.
        target = cells + np.asarray(offset)
        wrapped = np.where(periodic, np.mod(target, n_cells), target)
        valid = np.all((wrapped >= 0) & (wrapped < n_cells), axis=1)
        if not valid.any():
            continue
        source = atom_index[valid]
        target_cell = np.ravel_multi_index(wrapped[valid].T, n_cells)

        # Expand each atom against every atom of its neighbor cell.
        per_atom = counts[target_cell]
        total = int(per_atom.sum())
        if total == 0:
            continue
        first = np.repeat(source, per_atom)
        block_start = np.repeat(starts[target_cell], per_atom)
        within = np.arange(total) - np.repeat(np.cumsum(per_atom) - per_atom, per_atom)
        second = order[block_start + within]
        keep = first < second
        first_parts.append(first[keep])
        second_parts.append(second[keep])

    first_all = np.concatenate(first_parts) if first_parts else np.zeros(0, dtype=np.int64)
    second_all = np.concatenate(second_parts) if second_parts else np.zeros(0, dtype=np.int64)

    # Distance filter, then a deterministic (i, j) order.
    delta = box.minimum_image(positions[second_all] - positions[first_all])
    keep = np.einsum('ij,ij->i', delta, delta) < reach * reach
    first_all = first_all[keep]
    second_all = second_all[keep]
    pair_order = np.lexsort((second_all, first_all))

    logging.debug("Neighbor list built: %d atoms, %s cells, %d pairs",
        count, n_cells.tolist(), len(pair_order))
    return NeighborList(first_all[pair_order], second_all[pair_order], cutoff, skin,
        positions.copy(), box)
