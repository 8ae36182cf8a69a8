#!/usr/bin/env python3

""" Test EAM forces against energies """

# 3rd party imports
import numpy as np
import pytest

# Local imports
from coldspray.eam import CU_CUTOFF, CU_LATTICE_CONSTANT, tabulate_cu
from coldspray.error import ColdSprayError
from coldspray.forces import EAMForceField, compute_forces, potential_energy
from coldspray.lattice import Boundary, Group, SimulationBox, build_fcc_region, combine
from coldspray.lattice import create_fragment

POTENTIAL = tabulate_cu()
OPEN = (Boundary.OPEN, Boundary.OPEN, Boundary.OPEN)
H: float = 1e-5

def open_system(positions: np.ndarray):
    """ Atoms in an open box. """
    lengths = np.maximum(np.ptp(positions, axis=0), 1.0) + 10.0
    return combine([create_fragment(positions, Group.SUBSTRATE)], SimulationBox(lengths, OPEN))

def perturbed_cluster(seed: int):
    """ 2 x 2 x 2 FCC cells with random displacements up to 0.15 Å. """
    rng = np.random.default_rng(seed)
    block = build_fcc_region([2 * CU_LATTICE_CONSTANT] * 3, CU_LATTICE_CONSTANT, Group.SUBSTRATE)
    return open_system(block.positions + rng.uniform(-0.15, 0.15, block.positions.shape))

def finite_difference(system, atom: int, axis: int) -> float:
    """ -dU/dx by central differences. """
    plus = system.copy()
    plus.positions[atom, axis] += H
    minus = system.copy()
    minus.positions[atom, axis] -= H
    return -(potential_energy(plus, POTENTIAL) - potential_energy(minus, POTENTIAL)) / (2.0 * H)

def test_single_atom():
    """ Test an isolated atom has zero force and embedding energy F(0). """
    system = open_system(np.zeros((1, 3)))
    result = compute_forces(system, POTENTIAL)
    assert np.all(result.forces == 0.0)
    assert result.potential_energy == pytest.approx(float(POTENTIAL.embed(np.array(0.0))[0]))

def test_dimer_beyond_cutoff():
    """ Test a dimer past the cutoff feels nothing. """
    system = open_system(np.array([[0.0, 0.0, 0.0], [CU_CUTOFF + 0.01, 0.0, 0.0]]))
    assert np.all(compute_forces(system, POTENTIAL).forces == 0.0)

def test_dimer_finite_difference():
    """ Test the dimer force at 2.5 Å against central differences. """
    system = open_system(np.array([[0.0, 0.0, 0.0], [2.5, 0.0, 0.0]]))
    result = compute_forces(system, POTENTIAL)
    expected = finite_difference(system, 1, 0)
    assert result.forces[1, 0] == pytest.approx(expected, rel=1e-6)
    assert result.forces[0, 0] == pytest.approx(-result.forces[1, 0])

def test_random_configurations():
    """ Test forces against central differences on 100 perturbed clusters. """
    rng = np.random.default_rng(42)
    for seed in range(100):
        system = perturbed_cluster(seed)
        result = compute_forces(system, POTENTIAL)
        for atom in rng.choice(system.n_atoms, size=2, replace=False):
            for axis in range(3):
                expected = finite_difference(system, int(atom), axis)
                assert np.isclose(result.forces[atom, axis], expected, rtol=1e-5, atol=1e-7)

def test_newton_third_law():
    """ Test forces sum to zero for an isolated cluster. """
    result = compute_forces(perturbed_cluster(7), POTENTIAL)
    assert np.all(np.abs(result.forces.sum(axis=0)) < 1e-9)

def test_far_atom_leaves_force_unchanged():
    """ Test moving an atom beyond twice the cutoff leaves a force bit-identical. """
    positions = np.array([[0.0, 0.0, 0.0], [2.5, 0.0, 0.0], [0.0, 2.6, 0.0],
        [12.0, 0.0, 0.0], [14.4, 0.3, 0.0]])
    before = compute_forces(open_system(positions), POTENTIAL)
    positions[4] += np.array([0.2, -0.1, 0.05])
    after = compute_forces(open_system(positions), POTENTIAL)
    assert np.array_equal(before.forces[0], after.forces[0])

def test_overlap_detected():
    """ Test atoms closer than the table minimum are reported by id. """
    system = open_system(np.array([[0.0, 0.0, 0.0], [0.0005, 0.0, 0.0]]))
    with pytest.raises(ColdSprayError) as exc_info:
        compute_forces(system, POTENTIAL)
    assert 'Atoms 1 and 2' in str(exc_info.value)

def test_force_field_reuses_neighbors():
    """ Test the force field rebuilds its list only after large moves. """
    system = perturbed_cluster(3)
    field = EAMForceField(POTENTIAL, 0.3)
    first = field(system)
    system.positions[0, 0] += 0.01
    field(system)
    assert field.rebuilds == 1
    system.positions[0, 0] += 0.2
    second = field(system)
    assert field.rebuilds == 2
    assert first.forces.shape == second.forces.shape
