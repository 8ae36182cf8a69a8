#!/usr/bin/env python3

""" Test EAM tables, file format, and the tabulated Cu model """

# Standard library imports
import os

# 3rd party imports
import numpy as np
import pytest

# Local imports
from coldspray.eam import CU_COHESIVE_ENERGY, CU_CUTOFF, CU_LATTICE_CONSTANT
from coldspray.eam import load_eam, parse_funcfl, tabulate_cu, write_funcfl
from coldspray.error import ColdSprayError
from coldspray.forces import potential_energy
from coldspray.lattice import Boundary, Group, SimulationBox, build_fcc_region, combine

MINIMAL_FILE: str = """synthetic
29 63.546 3.615 FCC
5 0.5 5 1.0 3.5
0.0 -1.0 -1.5 -1.8 -2.0
1.0 0.8 0.6 0.4 0.2
0.5 0.4 0.3 0.2 0.1
"""

def test_minimal_file():
    """ Test a five-point file parses into five-point tables. """
    potential = parse_funcfl(MINIMAL_FILE)
    assert potential.nrho == 5
    assert potential.nr == 5
    assert potential.cutoff == 3.5
    assert potential.lattice_constant == 3.615
    assert potential.atomic_mass == 63.546
    assert potential.comment == "synthetic"

def test_truncated_table():
    """ Test a short table names the last line. """
    text = MINIMAL_FILE.replace("0.5 0.4 0.3 0.2 0.1\n", "0.5 0.4 0.3\n")
    with pytest.raises(ColdSprayError) as exc_info:
        parse_funcfl(text)
    assert 'line 6' in str(exc_info.value)
    assert 'truncated' in str(exc_info.value)

def test_count_mismatch():
    """ Test Nr disagreeing with the data is an error. """
    text = MINIMAL_FILE.replace("5 0.5 5 1.0 3.5", "5 0.5 4 1.0 3.0")
    with pytest.raises(ColdSprayError) as exc_info:
        parse_funcfl(text)
    assert 'extra value' in str(exc_info.value)

def test_non_numeric_token():
    """ Test a bad token names its line. """
    text = MINIMAL_FILE.replace("1.0 0.8 0.6", "1.0 x 0.6")
    with pytest.raises(ColdSprayError) as exc_info:
        parse_funcfl(text)
    assert 'line 5' in str(exc_info.value)

def test_bad_header():
    """ Test a malformed size line is rejected. """
    text = MINIMAL_FILE.replace("5 0.5 5 1.0 3.5", "5 0.5 5 1.0")
    with pytest.raises(ColdSprayError) as exc_info:
        parse_funcfl(text)
    assert 'line 3' in str(exc_info.value)

def test_write_then_load(tmp_path):
    """ Test the Cu table survives a trip through the file format. """
    potential = tabulate_cu(nrho=401, drho=0.01, nr=401, dr=0.01)
    filename = os.path.join(tmp_path, "cu.eam")
    write_funcfl(potential, filename)
    loaded = load_eam(filename)
    assert loaded.nr == potential.nr
    assert loaded.cutoff == potential.cutoff
    assert np.array_equal(loaded.embedding, potential.embedding)
    assert np.array_equal(loaded.density, potential.density)
    assert np.allclose(loaded.rphi, potential.rphi, rtol=1e-12, atol=1e-14)

def test_load_missing_file(tmp_path):
    """ Test a missing file is reported. """
    with pytest.raises(ColdSprayError):
        load_eam(os.path.join(tmp_path, "missing.eam"))

def test_terms_vanish_at_cutoff():
    """ Test density and pair terms are zero from the cutoff on. """
    potential = tabulate_cu()
    r = np.array([CU_CUTOFF, CU_CUTOFF + 0.1, 5.0])
    (rho, rho_slope) = potential.electron_density(r)
    (phi, phi_slope) = potential.pair(r)
    assert np.all(rho == 0.0)
    assert np.all(rho_slope == 0.0)
    assert np.all(phi == 0.0)
    assert np.all(phi_slope == 0.0)

def test_cohesive_energy():
    """ Test bulk FCC Cu energy per atom is within 1% of the documented value. """
    potential = tabulate_cu()
    a = CU_LATTICE_CONSTANT
    block = build_fcc_region((4 * a, 4 * a, 4 * a), a, Group.SUBSTRATE)
    box = SimulationBox(np.array([4 * a, 4 * a, 4 * a]),
        (Boundary.PERIODIC, Boundary.PERIODIC, Boundary.PERIODIC))
    system = combine([block], box)
    energy = potential_energy(system, potential) / system.n_atoms
    assert energy == pytest.approx(-CU_COHESIVE_ENERGY, rel=0.01)
