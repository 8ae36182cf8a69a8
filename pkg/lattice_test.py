#!/usr/bin/env python3

""" Test FCC lattice and atom system construction """

# 3rd party imports
import numpy as np
import pytest

# Local imports
from coldspray.error import ColdSprayError
from coldspray.lattice import Boundary, Group, SimulationBox, build_fcc_region, build_sphere
from coldspray.lattice import combine, fcc_sites

A: float = 3.61

def test_fcc_block_count():
    """ Test 10 x 10 x 5 cells give 2000 atoms. """
    block = build_fcc_region((36.1, 36.1, 18.05), A, Group.SUBSTRATE)
    assert block.n_atoms == 2000
    assert np.array_equal(block.positions, block.reference_positions)
    assert np.all(block.groups == int(Group.SUBSTRATE))
    assert list(block.ids) == list(range(1, 2001))

def test_fcc_single_cell():
    """ Test a single cell holds four atoms. """
    assert build_fcc_region((A, A, A), A, Group.SUBSTRATE).n_atoms == 4

def test_fcc_full_scale():
    """ Test the full-scale substrate is roughly 240,000 atoms. """
    count = build_fcc_region((240.0, 240.0, 50.0), A, Group.SUBSTRATE).n_atoms
    assert 216000 <= count <= 264000

def test_fcc_sites_inside_region():
    """ Test every site lies inside the region and on the lattice. """
    block = build_fcc_region((20.0, 15.0, 10.0), A, Group.SUBSTRATE)
    assert np.all(block.positions >= 0.0)
    assert np.all(block.positions < np.array([20.0, 15.0, 10.0]))
    half_cells = block.positions / (0.5 * A)
    assert np.allclose(half_cells, np.round(half_cells))

def test_fcc_too_small():
    """ Test a region thinner than one cell is rejected. """
    with pytest.raises(ColdSprayError) as exc_info:
        build_fcc_region((36.1, 36.1, 2.0), A, Group.SUBSTRATE)
    assert 'smaller than one FCC cell' in str(exc_info.value)

def test_nearest_neighbor_distance():
    """ Test the closest pair is a / sqrt(2). """
    sites = fcc_sites((2, 2, 2), A)
    delta = sites[:, None, :] - sites[None, :, :]
    distance = np.sqrt(np.sum(delta * delta, axis=2))
    assert np.min(distance[distance > 0.0]) == pytest.approx(A / np.sqrt(2.0))

def test_sphere_count_range():
    """ Test a 15 Å sphere has between 500 and 2000 atoms. """
    sphere = build_sphere(15.0, A)
    assert 500 <= sphere.n_atoms <= 2000
    assert np.all(sphere.groups == int(Group.PARTICLE))

def test_sphere_matches_brute_force():
    """ Test the 10 Å sphere against a direct site filter. """
    sphere = build_sphere(10.0, A)
    sites = np.array([[i, j, k] for i in range(-8, 9) for j in range(-8, 9)
        for k in range(-8, 9)], dtype=np.float64) * 0.5 * A
    on_lattice = np.sum(np.round(sites / (0.5 * A)).astype(int), axis=1) % 2 == 0
    inside = np.sum(sites * sites, axis=1) <= 100.0
    assert sphere.n_atoms == int(np.count_nonzero(on_lattice & inside))

def test_sphere_too_small():
    """ Test a radius below half a lattice constant is rejected. """
    with pytest.raises(ColdSprayError):
        build_sphere(1.0, A)

def test_minimum_image():
    """ Test minimum image applies on periodic axes only. """
    box = SimulationBox(np.array([10.0, 10.0, 10.0]),
        (Boundary.PERIODIC, Boundary.PERIODIC, Boundary.OPEN))
    delta = box.minimum_image(np.array([[9.0, -6.0, 9.0]]))
    assert np.allclose(delta, [[-1.0, 4.0, 9.0]])

def test_bad_box():
    """ Test non-positive box lengths are rejected. """
    with pytest.raises(ColdSprayError):
        SimulationBox(np.array([10.0, 0.0, 10.0]))

def test_wrap_tracks_images():
    """ Test wrapping keeps unwrapped displacement. """
    block = build_fcc_region((A, A, A), A, Group.SUBSTRATE)
    system = combine([block], SimulationBox(np.array([A, A, 10.0])))
    system.positions[0] += np.array([A + 0.1, -0.2, 0.0])
    system.wrap()
    assert np.all(system.positions[:, :2] >= 0.0)
    assert np.all(system.positions[:, :2] < A)
    assert np.allclose(system.displacements[0], [A + 0.1, -0.2, 0.0])

def test_combine_renumbers():
    """ Test combining fragments renumbers ids from 1. """
    substrate = build_fcc_region((2 * A, 2 * A, A), A, Group.SUBSTRATE)
    sphere = build_sphere(4.0, A).translated([3.6, 3.6, 20.0])
    system = combine([substrate, sphere], SimulationBox(np.array([2 * A, 2 * A, 40.0])))
    assert list(system.ids) == list(range(1, system.n_atoms + 1))
    assert np.count_nonzero(system.group_mask(Group.PARTICLE)) == sphere.n_atoms
