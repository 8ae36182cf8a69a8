#!/usr/bin/env python3

""" This file contains the EAMPotential class and the tabulated (funcfl) reader and writer. """

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
import logging
import math

# 3rd party imports
import numpy as np
from scipy.interpolate import CubicSpline

# Local imports
from .error import ColdSprayError
from .units import COPPER_ATOMIC_NUMBER, COPPER_MASS, HARTREE_BOHR
from .util import parse_float, parse_int

# Values per line when writing arrays.
VALUES_PER_LINE: int = 5

@dataclass
class EAMPotential:
    """ Single element EAM potential held as uniformly spaced tables.

    embedding is F(rho) at rho = k * drho, density is rho(r) and rphi is r * phi(r)
    at r = k * dr. All three are interpolated with natural cubic splines.
    """

    cutoff: float
    drho: float
    dr: float
    embedding: np.ndarray
    density: np.ndarray
    rphi: np.ndarray
    lattice_constant: float
    atomic_mass: float
    atomic_number: int = COPPER_ATOMIC_NUMBER
    lattice_name: str = "FCC"
    comment: str = ""
    _embedding_spline: CubicSpline = field(init=False, repr=False)
    _density_spline: CubicSpline = field(init=False, repr=False)
    _rphi_spline: CubicSpline = field(init=False, repr=False)

    def __post_init__(self) -> None:
        self.embedding = np.asarray(self.embedding, dtype=np.float64)
        self.density = np.asarray(self.density, dtype=np.float64)
        self.rphi = np.asarray(self.rphi, dtype=np.float64)
        if len(self.density) != len(self.rphi):
            raise ColdSprayError('EAM density and pair tables must have the same length')
        if min(len(self.embedding), len(self.density)) < 4:
            raise ColdSprayError('EAM tables need at least 4 points')
        if self.cutoff <= 0.0 or self.drho <= 0.0 or self.dr <= 0.0:
            raise ColdSprayError('EAM cutoff and table spacings must be positive')
        if self.cutoff > self.dr * (len(self.density) - 1) + 1e-9:
            raise ColdSprayError(
                f'EAM cutoff {self.cutoff} Å lies beyond the distance table ' + \
                f'({self.dr * (len(self.density) - 1)} Å)')

        # Build splines.
        rho_grid = np.arange(len(self.embedding)) * self.drho
        r_grid = np.arange(len(self.density)) * self.dr
        self._embedding_spline = CubicSpline(rho_grid, self.embedding, bc_type='natural')
        self._density_spline = CubicSpline(r_grid, self.density, bc_type='natural')
        self._rphi_spline = CubicSpline(r_grid, self.rphi, bc_type='natural')

    @property
    def nrho(self) -> int:
        """ Number of embedding table points. """
        return len(self.embedding)

    @property
    def nr(self) -> int:
        """ Number of distance table points. """
        return len(self.density)

    @property
    def r_min(self) -> float:
        """ Smallest tabulated distance where the pair term is defined. """
        return self.dr

    def embed(self, rho: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """ Embedding energy F(rho) and its derivative. """
        return self._embedding_spline(rho), self._embedding_spline(rho, 1)

    def electron_density(self, r: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """ Density contribution rho(r) and its derivative, zero at and beyond the cutoff. """
        inside = r < self.cutoff
        value = np.where(inside, self._density_spline(r), 0.0)
        slope = np.where(inside, self._density_spline(r, 1), 0.0)
        return value, slope

    def pair(self, r: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """ Pair energy phi(r) and its derivative, zero at and beyond the cutoff. """
        inside = r < self.cutoff
        rphi = self._rphi_spline(r)
        rphi_slope = self._rphi_spline(r, 1)
        value = np.where(inside, rphi / r, 0.0)
        slope = np.where(inside, rphi_slope / r - rphi / (r * r), 0.0)
        return value, slope

@dataclass
class TokenReader:
    """ Walks whitespace separated tokens while tracking line numbers. """

    tokens: list[tuple[str, int]]
    position: int = 0

    @staticmethod
    def from_lines(lines: list[str], first_line_no: int) -> "TokenReader":
        """ Tokenize lines, remembering the 1-based line number of each token. """
        tokens: list[tuple[str, int]] = []
        for (i, line) in enumerate(lines):
            tokens.extend((token, first_line_no + i) for token in line.split())
        return TokenReader(tokens)

    def read_array(self, count: int, what: str) -> np.ndarray:
        """ Read count floats. """
        if self.position + count > len(self.tokens):
            last_line: int = self.tokens[-1][1] if self.tokens else 3
            raise ColdSprayError(
                f'EAM file line {last_line}: {what} table truncated, expected {count} ' + \
                f'values but only {len(self.tokens) - self.position} remain.')
        values = np.empty(count)
        for k in range(count):
            (token, line_no) = self.tokens[self.position + k]
            values[k] = parse_float(token, line_no, f'{what} value')
        self.position += count
        return values

    def check_exhausted(self) -> None:
        """ Fail if tokens remain after all tables were read. """
        if self.position < len(self.tokens):
            (token, line_no) = self.tokens[self.position]
            raise ColdSprayError(
                f'EAM file line {line_no}: unexpected extra value "{token}"; ' + \
                'table counts in the header do not match the data.')

def parse_funcfl(text: str) -> EAMPotential:
    """ Parse tabulated single element EAM text. """

    lines: list[str] = text.split('\n')
    if len(lines) < 3:
        raise ColdSprayError('EAM file is shorter than its 3 header lines.')
    comment: str = lines[0].strip()

    # Line 2: atomic number, mass, lattice constant, lattice name.
    parts: list[str] = lines[1].split()
    if len(parts) < 3:
        raise ColdSprayError(
            'EAM file line 2: expected atomic number, mass, and lattice constant.')
    atomic_number: int = parse_int(parts[0], 2, 'atomic number')
    atomic_mass: float = parse_float(parts[1], 2, 'atomic mass')
    lattice_constant: float = parse_float(parts[2], 2, 'lattice constant')
    lattice_name: str = parts[3] if len(parts) > 3 else "FCC"

    # Line 3: Nrho, drho, Nr, dr, cutoff.
    parts = lines[2].split()
    if len(parts) != 5:
        raise ColdSprayError(
            f'EAM file line 3: expected Nrho drho Nr dr cutoff but found {len(parts)} values.')
    nrho: int = parse_int(parts[0], 3, 'Nrho')
    drho: float = parse_float(parts[1], 3, 'drho')
    nr: int = parse_int(parts[2], 3, 'Nr')
    dr: float = parse_float(parts[3], 3, 'dr')
    cutoff: float = parse_float(parts[4], 3, 'cutoff')
    if nrho < 4 or nr < 4:
        raise ColdSprayError(f'EAM file line 3: table sizes Nrho={nrho} Nr={nr} are too small.')

    # Tables: F(rho), Z(r), rho(r).
    reader = TokenReader.from_lines(lines[3:], 4)
    embedding = reader.read_array(nrho, 'embedding')
    charge = reader.read_array(nr, 'effective charge')
    density = reader.read_array(nr, 'density')
    reader.check_exhausted()

    return EAMPotential(
        cutoff = cutoff,
        drho = drho,
        dr = dr,
        embedding = embedding,
        density = density,
        rphi = HARTREE_BOHR * charge * charge,
        lattice_constant = lattice_constant,
        atomic_mass = atomic_mass,
        atomic_number = atomic_number,
        lattice_name = lattice_name,
        comment = comment)

def load_eam(filename: str) -> EAMPotential:
    """ Load a single element tabulated EAM potential file. """

    try:
        with open(filename, "r", encoding="utf-8") as eam_file:
            text: str = eam_file.read()
    except OSError as ex:
        raise ColdSprayError(f'Unable to read EAM file {filename}: {str(ex)}') from ex

    try:
        potential = parse_funcfl(text)
    except ColdSprayError as ex:
        raise ColdSprayError(f'{filename}: {ex}') from ex

    logging.info("Loaded EAM potential %s: Nrho=%d Nr=%d cutoff=%.3f Å",
        filename, potential.nrho, potential.nr, potential.cutoff)
    return potential

def format_table(values: np.ndarray) -> str:
    """ Format table values, VALUES_PER_LINE per line. """
    rows: list[str] = []
    for start in range(0, len(values), VALUES_PER_LINE):
        rows.append(' '.join(f'{v:.16e}' for v in values[start:start + VALUES_PER_LINE]))
    return '\n'.join(rows)

def write_funcfl(potential: EAMPotential, filename: str) -> None:
    """ Write potential in the tabulated format load_eam reads. """

    if np.any(potential.rphi < 0.0):
        raise ColdSprayError('Tabulated format stores r*phi as a squared charge; ' + \
            'negative r*phi values cannot be written.')
    charge = np.sqrt(potential.rphi / HARTREE_BOHR)

    try:
        with open(filename, "w", encoding="utf-8") as eam_file:
            eam_file.write(f'{potential.comment}\n')
            eam_file.write(f'{potential.atomic_number} {potential.atomic_mass!r} ' + \
                f'{potential.lattice_constant!r} {potential.lattice_name}\n')
            eam_file.write(f'{potential.nrho} {potential.drho!r} {potential.nr} ' + \
                f'{potential.dr!r} {potential.cutoff!r}\n')
            for table in (potential.embedding, charge, potential.density):
                eam_file.write(format_table(table) + '\n')
    except OSError as ex:
        raise ColdSprayError(f'Unable to write EAM file {filename}: {str(ex)}') from ex

def smooth_taper(r: np.ndarray, r_start: float, r_end: float) -> np.ndarray:
    """ Quintic step from 1 at r_start to 0 at r_end, continuous to second derivative. """
    t = np.clip((r - r_start) / (r_end - r_start), 0.0, 1.0)
    return 1.0 - t * t * t * (10.0 - 15.0 * t + 6.0 * t * t)

# Analytic nearest-neighbor Cu model parameters.
CU_LATTICE_CONSTANT: float = 3.615
CU_COHESIVE_ENERGY: float = 3.54 # eV
CU_PAIR_ENERGY: float = 0.59 # eV, phi at the nearest-neighbor distance
CU_ALPHA: float = 5.09
CU_BETA: float = 5.85
CU_GAMMA: float = 8.00
CU_TAPER_START: float = 3.0
CU_CUTOFF: float = 3.45

def tabulate_cu(nrho: int = 2001, drho: float = 0.002,
    nr: int = 2001, dr: float = 0.002) -> EAMPotential:
    """ Tabulate an analytic nearest-neighbor EAM model for Cu.

    Density and pair terms decay exponentially from the nearest-neighbor
    distance; the embedding function makes the perfect lattice follow the
    universal binding curve, so the cohesive energy at the lattice constant is
    CU_COHESIVE_ENERGY. Both distance terms are tapered smoothly to zero
    between CU_TAPER_START and CU_CUTOFF, which lies between the first and
    second neighbor shells. Densities are scaled so the bulk value is 1.
    """

    r_e: float = CU_LATTICE_CONSTANT / math.sqrt(2.0)
    f_e: float = 1.0 / 12.0
    r = np.arange(nr) * dr
    taper = smooth_taper(r, CU_TAPER_START, CU_CUTOFF)
    density = f_e * np.exp(-CU_BETA * (r / r_e - 1.0)) * taper
    rphi = r * CU_PAIR_ENERGY * np.exp(-CU_GAMMA * (r / r_e - 1.0)) * taper

    # F(rho) = -Ec [1 - (a/b) ln x] x^(a/b) - 6 phi_e x^(g/b), x = rho / rho_e.
    x = np.arange(nrho) * drho
    ratio: float = CU_ALPHA / CU_BETA
    safe_x = np.where(x > 0.0, x, 1.0)
    rose = np.where(x > 0.0,
        (1.0 - ratio * np.log(safe_x)) * np.power(safe_x, ratio), 0.0)
    embedding = -CU_COHESIVE_ENERGY * rose - 6.0 * CU_PAIR_ENERGY * np.power(x, CU_GAMMA / CU_BETA)

    return EAMPotential(
        cutoff = CU_CUTOFF,
        drho = drho,
        dr = dr,
        embedding = embedding,
        density = density,
        rphi = rphi,
        lattice_constant = CU_LATTICE_CONSTANT,
        atomic_mass = COPPER_MASS,
        atomic_number = COPPER_ATOMIC_NUMBER,
        lattice_name = "FCC",
        comment = f"Cu analytic nearest-neighbor EAM, cohesive energy {CU_COHESIVE_ENERGY} eV, " + \
            f"a = {CU_LATTICE_CONSTANT} A")
