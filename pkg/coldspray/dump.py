#!/usr/bin/env python3

""" This file contains the Snapshot class and the dump file reader and writer. """

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
import glob
import logging
import os

# 3rd party imports
import numpy as np

# Local imports
from .error import ColdSprayError
from .lattice import Group
from .util import parse_float, parse_int

DUMP_PATTERN: str = 'frame-*.dump'

@dataclass
class Snapshot:
    """ One frame of a run: per-atom id, group, position, and Von Mises stress at a time. """

    time: float
    ids: np.ndarray
    groups: np.ndarray
    positions: np.ndarray
    von_mises: np.ndarray
    box_lengths: np.ndarray

    def __post_init__(self) -> None:
        if self.time < 0.0:
            raise ColdSprayError(f'Snapshot time must be non-negative, got {self.time}')
        if np.any(np.diff(self.ids) <= 0):
            raise ColdSprayError('Snapshot atoms must be sorted by id')

    @property
    def n_atoms(self) -> int:
        """ Number of atoms. """
        return len(self.ids)

    def select(self, *groups: Group) -> "Snapshot":
        """ Snapshot restricted to atoms of the given groups. """
        mask = np.isin(self.groups, [int(g) for g in groups])
        return Snapshot(self.time, self.ids[mask], self.groups[mask], self.positions[mask],
            self.von_mises[mask], self.box_lengths)

def format_snapshot(snapshot: Snapshot) -> str:
    """ Dump text for one frame. """

    lines: list[str] = [
        f'TIME {snapshot.time:.6f}',
        f'NATOMS {snapshot.n_atoms}',
        'BOX ' + ' '.join(f'{v:.8f}' for v in snapshot.box_lengths)]
    for k in range(snapshot.n_atoms):
        (x, y, z) = snapshot.positions[k]
        lines.append(f'{int(snapshot.ids[k])} {int(snapshot.groups[k])} ' + \
            f'{x:.8f} {y:.8f} {z:.8f} {snapshot.von_mises[k]:.8e}')
    return '\n'.join(lines) + '\n'

def write_snapshot(snapshot: Snapshot, filename: str) -> None:
    """ Write one frame to its own file. """
    try:
        with open(filename, "w", encoding="utf-8") as dump_file:
            dump_file.write(format_snapshot(snapshot))
    except OSError as ex:
        raise ColdSprayError(f'Unable to write dump file {filename}: {str(ex)}') from ex

def expect_header(lines: list[str], index: int, keyword: str, filename: str) -> list[str]:
    """ Check that lines[index] starts with keyword and return the remaining fields. """
    if index >= len(lines):
        raise ColdSprayError(f'{filename} line {index + 1}: expected {keyword}, found end of file.')
    fields = lines[index].split()
    if not fields or fields[0] != keyword:
        raise ColdSprayError(f'{filename} line {index + 1}: expected {keyword}.')
    return fields[1:]

def parse_dump(text: str, filename: str = "dump") -> list[Snapshot]:
    """ Parse one or more concatenated frames. """

    lines = text.rstrip('\n').split('\n') if text.strip() else []
    snapshots: list[Snapshot] = []
    index: int = 0
    while index < len(lines):
        time = parse_float(expect_header(lines, index, 'TIME', filename)[0], index + 1, 'time')
        count = parse_int(expect_header(lines, index + 1, 'NATOMS', filename)[0], index + 2,
            'atom count')
        box_fields = expect_header(lines, index + 2, 'BOX', filename)
        if len(box_fields) != 3:
            raise ColdSprayError(f'{filename} line {index + 3}: BOX needs three lengths.')
        box = np.array([parse_float(v, index + 3, 'box length') for v in box_fields])
        index += 3

        if index + count > len(lines):
            raise ColdSprayError(f'{filename}: frame at time {time} declares {count} atoms ' + \
                f'but only {len(lines) - index} lines remain.')
        ids = np.empty(count, dtype=np.int64)
        groups = np.empty(count, dtype=np.int8)
        positions = np.empty((count, 3))
        von_mises = np.empty(count)
        for k in range(count):
            line_no: int = index + k + 1
            fields = lines[index + k].split()
            if len(fields) != 6:
                raise ColdSprayError(f'{filename} line {line_no}: expected ' + \
                    f'"id group x y z vm" but found {len(fields)} values.')
            ids[k] = parse_int(fields[0], line_no, 'atom id')
            groups[k] = parse_int(fields[1], line_no, 'group')
            positions[k] = [parse_float(v, line_no, 'coordinate') for v in fields[2:5]]
            von_mises[k] = parse_float(fields[5], line_no, 'stress')
        index += count

        try:
            snapshots.append(Snapshot(time, ids, groups, positions, von_mises, box))
        except ColdSprayError as ex:
            raise ColdSprayError(f'{filename}: {ex}') from ex
    return snapshots

def read_dump(filename: str) -> list[Snapshot]:
    """ Read every frame in a dump file. """
    try:
        with open(filename, "r", encoding="utf-8") as dump_file:
            text = dump_file.read()
    except OSError as ex:
        raise ColdSprayError(f'Unable to read dump file {filename}: {str(ex)}') from ex
    return parse_dump(text, filename)

def frame_filename(directory: str, index: int) -> str:
    """ File name of frame index within a run directory. """
    return os.path.join(directory, f'frame-{index:05d}.dump')

def write_frames(snapshots: list[Snapshot], directory: str) -> list[str]:
    """ Write each snapshot to its own numbered file. Returns the file names. """
    filenames: list[str] = []
    for (index, snapshot) in enumerate(snapshots):
        filename = frame_filename(directory, index)
        write_snapshot(snapshot, filename)
        filenames.append(filename)
    return filenames

def read_frames(directory: str) -> list[Snapshot]:
    """ Read all frame files of a directory in time order. """

    filenames = sorted(glob.glob(os.path.join(directory, DUMP_PATTERN)))
    if not filenames:
        raise ColdSprayError(f'No dump frames ({DUMP_PATTERN}) found in {directory}.')
    snapshots: list[Snapshot] = []
    for filename in filenames:
        snapshots.extend(read_dump(filename))
    times = [s.time for s in snapshots]
    if any(later < earlier for earlier, later in zip(times, times[1:])):
        raise ColdSprayError(f'Dump frames in {directory} are not in time order.')
    logging.info("Read %d frames from %s", len(snapshots), directory)
    return snapshots
