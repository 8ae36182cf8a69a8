#!/usr/bin/env python3

""" This file contains the impact scene builder and the Velocity-Verlet engine. """

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

# Local imports
from .config import SceneConfig
from .design import DesignPoint
from .dump import Snapshot
from .eam import EAMPotential, load_eam, tabulate_cu
from .error import ColdSprayError
from .forces import EAMForceField, ForceField, ForceResult
from .lattice import AtomSystem, Boundary, Group, SimulationBox
from .lattice import build_fcc_region, build_sphere, combine
from .stress import virial_from_forces, von_mises
from .units import BOLTZMANN, FTM2V, MVV2E

# Empty space above the particle at release, in lattice constants.
HEADROOM_CELLS: int = 4

def kinetic_energy(system: AtomSystem, mask: np.ndarray | None = None) -> float:
    """ Kinetic energy, eV. """
    velocities = system.velocities if mask is None else system.velocities[mask]
    masses = system.masses if mask is None else system.masses[mask]
    return float(0.5 * MVV2E * np.sum(masses * np.einsum('ij,ij->i', velocities, velocities)))

def kinetic_temperature(system: AtomSystem, mask: np.ndarray | None = None) -> float:
    """ Instantaneous temperature of the selected atoms with net momentum removed, K. """
    count = system.n_atoms if mask is None else int(np.count_nonzero(mask))
    dof = 3 * count - 3
    if dof <= 0:
        return 0.0
    return 2.0 * kinetic_energy(system, mask) / (dof * BOLTZMANN)

def total_momentum(system: AtomSystem) -> np.ndarray:
    """ Total linear momentum, amu Å/ps. """
    return np.sum(system.masses[:, None] * system.velocities, axis=0)

def init_velocities(system: AtomSystem, temperature: float, seed: int) -> AtomSystem:
    """ Maxwell-Boltzmann velocities for mobile substrate atoms.

    Net momentum of the thermalized atoms is removed and the velocities are
    rescaled so kinetic_temperature of that group equals temperature exactly.
    Other atoms keep their velocities, except FixedWall atoms which are zeroed.
    """

    if temperature < 0.0:
        raise ColdSprayError(f'Temperature must be non-negative, got {temperature} K')
    result = system.copy()
    thermal = result.group_mask(Group.SUBSTRATE)
    result.velocities[result.group_mask(Group.FIXED_WALL)] = 0.0
    result.velocities[thermal] = 0.0
    count = int(np.count_nonzero(thermal))
    if temperature == 0.0 or count < 2:
        return result

    # Draw, remove drift, rescale.
    rng = np.random.default_rng(seed)
    masses = result.masses[thermal]
    sigma = np.sqrt(BOLTZMANN * temperature / (masses * MVV2E))
    velocities = rng.standard_normal((count, 3)) * sigma[:, None]
    velocities -= np.sum(masses[:, None] * velocities, axis=0) / np.sum(masses)
    result.velocities[thermal] = velocities
    current = kinetic_temperature(result, thermal)
    result.velocities[thermal] *= math.sqrt(temperature / current)
    return result

class Integrator:
    """ Velocity-Verlet time stepping for one system.

    The integrator owns the system while it runs. FixedWall atoms and any
    atoms in the frozen mask keep their positions and have zero velocity.
    """

    def __init__(self, system: AtomSystem, force_field: ForceField):
        self.system = system
        self.force_field = force_field
        self.frozen = system.group_mask(Group.FIXED_WALL)
        self.system.velocities[self.frozen] = 0.0
        self.result: ForceResult = force_field(system)

    def freeze(self, mask: np.ndarray) -> None:
        """ Freeze fixed wall atoms plus mask. """
        self.frozen = self.system.group_mask(Group.FIXED_WALL) | mask
        self.system.velocities[self.frozen] = 0.0

    @property
    def potential_energy(self) -> float:
        """ Potential energy of the current configuration, eV. """
        return self.result.potential_energy

    def total_energy(self) -> float:
        """ Kinetic plus potential energy, eV. """
        return kinetic_energy(self.system) + self.result.potential_energy

    def step(self, dt: float) -> None:
        """ Advance one time step: half kick, drift, new forces, half kick. """

        system = self.system
        mobile = ~self.frozen
        inverse_mass = (FTM2V / system.masses)[:, None]

        system.velocities[mobile] += 0.5 * dt * self.result.forces[mobile] * inverse_mass[mobile]
        system.positions[mobile] += dt * system.velocities[mobile]
        system.wrap()
        self.result = self.force_field(system)
        system.velocities[mobile] += 0.5 * dt * self.result.forces[mobile] * inverse_mass[mobile]

def step_velocity_verlet(system: AtomSystem, potential: EAMPotential, dt: float) -> AtomSystem:
    """ One Velocity-Verlet step on a copy of system. """
    if dt <= 0.0:
        raise ColdSprayError(f'Time step must be positive, got {dt} ps')
    integrator = Integrator(system.copy(), EAMForceField(potential))
    integrator.step(dt)
    return integrator.system

def load_potential(scene: SceneConfig) -> EAMPotential:
    """ Potential named in the scene config, or the tabulated Cu model. """
    if scene.potential_file:
        return load_eam(scene.potential_file)
    return tabulate_cu()

def substrate_surface(system: AtomSystem) -> float:
    """ Height of the highest substrate atom, Å. """
    return float(system.positions[system.group_mask(Group.SUBSTRATE, Group.FIXED_WALL), 2].max())

def assemble_scene(design: DesignPoint, scene: SceneConfig, seed: int) -> AtomSystem:
    """ Particle above a thermalized substrate, moving toward it.

    The substrate fills the bottom of a box periodic in x and y; its lowest
    fixed_layers atomic layers are FixedWall. The particle is centered in x-y
    with its lowest atom standoff Å above the substrate's top atoms.
    """

    a: float = scene.lattice_constant
    substrate = build_fcc_region(scene.substrate_size, a, Group.SUBSTRATE)
    lateral = np.ptp(substrate.positions[:, :2], axis=0) + 0.5 * a
    top: float = float(substrate.positions[:, 2].max())

    # Bottom layers are anchored. Layers are a/2 apart.
    wall = substrate.positions[:, 2] < (scene.fixed_layers - 0.5) * 0.5 * a
    substrate.groups[wall] = int(Group.FIXED_WALL)

    # Place the particle.
    particle = build_sphere(design.r, a)
    particle_extent = np.ptp(particle.positions, axis=0)
    if np.any(particle_extent[:2] + 2.0 * a >= lateral):
        raise ColdSprayError(f'Particle of radius {design.r} Å does not fit laterally in a ' + \
            f'{lateral[0]:.2f} x {lateral[1]:.2f} Å substrate; it would meet its own image.')
    lowest: float = float(particle.positions[:, 2].min())
    center_xy = 0.5 * lateral
    particle = particle.translated([center_xy[0], center_xy[1], top + scene.standoff - lowest])
    gap: float = float(particle.positions[:, 2].min()) - top
    if gap < 0.5 * a:
        raise ColdSprayError(f'Particle overlaps the substrate: gap {gap:.3f} Å after placement.')

    # Box: periodic lateral lengths are whole cells, z leaves headroom.
    height = float(particle.positions[:, 2].max()) + HEADROOM_CELLS * a
    box = SimulationBox(np.array([lateral[0], lateral[1], height]),
        (Boundary.PERIODIC, Boundary.PERIODIC, Boundary.OPEN))
    system = combine([substrate, particle], box)

    system = init_velocities(system, scene.temperature, seed)
    system.velocities[system.group_mask(Group.PARTICLE)] = design.velocity()
    logging.info("Assembled scene %s: %d substrate atoms, %d particle atoms, box %s Å",
        design, int(np.count_nonzero(~system.group_mask(Group.PARTICLE))),
        int(np.count_nonzero(system.group_mask(Group.PARTICLE))),
        np.round(box.lengths, 3).tolist())
    return system

@dataclass
class EnergyRecord:
    """ Energies at a snapshot, eV. """
    time: float
    kinetic: float
    potential: float

    @property
    def total(self) -> float:
        """ Kinetic plus potential. """
        return self.kinetic + self.potential

@dataclass
class ImpactRun:
    """ Snapshots of an impact plus the run monitors. """

    design: DesignPoint
    seed: int
    snapshots: list[Snapshot]
    energies: list[EnergyRecord]
    surface: float
    contact_time: float | None
    contact_distance: float
    steps: int = 0
    neighbor_rebuilds: int = 0
    min_gaps: list[float] = field(default_factory=list)

def impact_duration(design: DesignPoint, scene: SceneConfig) -> float:
    """ Ballistic flight time across the stand-off gap plus the post-contact time, ps. """
    normal_speed = design.v * math.cos(math.radians(design.theta))
    return scene.standoff / normal_speed + scene.post_contact_time

def make_snapshot(time: float, system: AtomSystem, result: ForceResult) -> Snapshot:
    """ Snapshot with per-atom Von Mises stress. """
    stress = virial_from_forces(system, result)
    return Snapshot(
        time = time,
        ids = system.ids.copy(),
        groups = system.groups.copy(),
        positions = system.positions.copy(),
        von_mises = von_mises(stress),
        box_lengths = system.box.lengths.copy())

def run_impact(design: DesignPoint, scene: SceneConfig, potential: EAMPotential,
    seed: int) -> ImpactRun:
    """ Simulate one impact and collect snapshots every snapshot_interval ps.

    The substrate first settles for equilibration_time with the particle held
    still; time zero is the particle's release. The last snapshot is at or
    before the ballistic contact time plus post_contact_time.
    """

    system = assemble_scene(design, scene, seed)
    particle = system.group_mask(Group.PARTICLE)
    release_velocity = design.velocity()
    force_field = EAMForceField(potential, scene.skin)
    integrator = Integrator(system, force_field)

    # Settle the substrate.
    settle_steps = int(round(scene.equilibration_time / scene.dt))
    if settle_steps > 0:
        integrator.freeze(particle)
        for _ in range(settle_steps):
            integrator.step(scene.dt)
        integrator.freeze(np.zeros(system.n_atoms, dtype=bool))
        logging.info("Substrate settled for %d steps, kinetic temperature %.1f K",
            settle_steps, kinetic_temperature(system, system.group_mask(Group.SUBSTRATE)))
    system.velocities[particle] = release_velocity

    # Release.
    t_end: float = impact_duration(design, scene)
    steps_per_snapshot = max(1, int(round(scene.snapshot_interval / scene.dt)))
    n_snapshots = int(math.floor(t_end / scene.snapshot_interval + 1e-9)) + 1
    n_steps = (n_snapshots - 1) * steps_per_snapshot
    surface = substrate_surface(system)
    contact_distance = potential.cutoff
    initial_kinetic = kinetic_energy(system)
    initial_total = integrator.total_energy()

    run = ImpactRun(design=design, seed=seed, snapshots=[], energies=[], surface=surface,
        contact_time=None, contact_distance=contact_distance)
    for step in range(n_steps + 1):
        if step > 0:
            integrator.step(scene.dt)
        time = step * scene.dt

        # Contact monitor.
        gap = float(system.positions[particle, 2].min()) - surface
        if run.contact_time is None and gap <= contact_distance:
            run.contact_time = time
            logging.info("Particle reached the substrate at t = %.3f ps", time)

        if step % steps_per_snapshot != 0:
            continue
        snapshot_time = (step // steps_per_snapshot) * scene.snapshot_interval
        run.snapshots.append(make_snapshot(snapshot_time, system, integrator.result))
        record = EnergyRecord(snapshot_time, kinetic_energy(system), integrator.potential_energy)
        run.energies.append(record)
        run.min_gaps.append(gap)
        logging.info("t = %.2f ps: KE %.3f eV, PE %.3f eV, gap %.2f Å",
            snapshot_time, record.kinetic, record.potential, gap)

        # Divergence check.
        if record.total - initial_total > scene.divergence_factor * max(initial_kinetic, 1e-12):
            raise ColdSprayError(f'Energy diverged at t = {snapshot_time:.3f} ps for ' + \
                f'{design}: total energy rose {record.total - initial_total:.3f} eV, more ' + \
                f'than {scene.divergence_factor}x the initial kinetic energy ' + \
                f'{initial_kinetic:.3f} eV. Try a smaller time step.')

    run.steps = n_steps
    run.neighbor_rebuilds = force_field.rebuilds
    return run
