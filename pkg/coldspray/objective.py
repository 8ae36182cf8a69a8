#!/usr/bin/env python3

""" This file contains the closed-loop impact objective c = S_i / S_m. """

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
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
import logging
import math
import threading
from typing import Callable, Protocol, Sequence

# 3rd party imports
import numpy as np

# Local imports
from .config import ImagingConfig, ObjectiveConfig, ObjectiveModel, SceneConfig
from .design import DESIGN_NAMES, BoundPolicy, DesignBounds, DesignPoint, clamp_or_reject
from .eam import EAMPotential
from .error import ColdSprayError
from .imaging import MeasurementResult, measure_flattening
from .md_engine import load_potential, run_impact

EVALUATION_CSV_HEADER: str = 'index,v,r,theta,seed,S_i,S_m,mu,c,penalized,provenance'

class Provenance(str, Enum):
    """ Where an objective value came from. """
    SIMULATED = "simulated"
    CACHED = "cached"
    SURROGATE_PREDICTED = "surrogate"

@dataclass
class ObjectiveValue:
    """ Result of one objective evaluation. eval_cost is in t_p units. """

    design: DesignPoint
    seed: int
    c: float
    measurement: MeasurementResult | None
    eval_cost: int
    provenance: Provenance
    penalized: bool = False

class Objective(Protocol):
    """ Anything evaluate-able over designs. """

    bounds: DesignBounds

    def evaluate(self, design: DesignPoint, seed: int) -> ObjectiveValue:
        ...

    def evaluate_many(self, designs: Sequence[DesignPoint], seed: int,
        workers: int = 1) -> list[ObjectiveValue]:
        ...

    @property
    def tp_count(self) -> int:
        ...

Measure = Callable[[DesignPoint, int], MeasurementResult]

def simulate_and_measure(scene: SceneConfig, imaging: ImagingConfig,
    potential: EAMPotential) -> Measure:
    """ Measurement function that runs the MD impact and the imaging pipeline. """

    def measure(design: DesignPoint, seed: int) -> MeasurementResult:
        run = run_impact(design, scene, potential, seed)
        return measure_flattening(run.snapshots, imaging, run.contact_distance)
    return measure

def analytic_flattening(design: DesignPoint) -> float:
    """ Smooth stand-in for c: falls with speed, smallest at r = 15 Å and theta = 0. """
    return 0.35 + 0.45 * math.exp(-design.v / 4.0) + 0.0015 * (design.r - 15.0) ** 2 + \
        0.0002 * design.theta ** 2

def analytic_measure(imaging: ImagingConfig) -> Measure:
    """ Measurement function backed by analytic_flattening; runs in microseconds. """

    def measure(design: DesignPoint, seed: int) -> MeasurementResult:
        s_i = max(1, int(round(math.pi * (design.r * imaging.pixel_scale) ** 2)))
        s_m = int(round(s_i / analytic_flattening(design)))
        return MeasurementResult(S_i=s_i, S_m=s_m, mu=s_m / s_i, frame_of_max=0.0)
    return measure

def build_measure(scene: SceneConfig, imaging: ImagingConfig, config: ObjectiveConfig) -> Measure:
    """ Measurement function selected by config.model. """
    if config.model == ObjectiveModel.ANALYTIC:
        logging.info("Using the analytic stand-in objective")
        return analytic_measure(imaging)
    return simulate_and_measure(scene, imaging, load_potential(scene))

class ImpactObjective:
    """ The expensive objective, with a result cache and a t_p counter.

    Simulations of a batch may run on several threads; results are committed
    to the cache, counter, and ledger in input order.
    """

    def __init__(self, config: ObjectiveConfig, measure: Measure):
        self.config = config
        self.bounds = config.bounds
        self.measure = measure
        self.cache: dict[tuple[float, float, float, int], ObjectiveValue] = {}
        self.ledger: list[ObjectiveValue] = []
        self.lock = threading.Lock()
        self._tp_count: int = 0

    @property
    def tp_count(self) -> int:
        """ Number of distinct (design, seed) simulations run. """
        with self.lock:
            return self._tp_count

    def _commit(self, design: DesignPoint, seed: int,
        measurement: MeasurementResult) -> ObjectiveValue:
        """ Turn a measurement into a value and record it. """

        penalized = measurement.S_m == 0
        c = self.config.penalty if penalized else measurement.S_i / measurement.S_m
        if penalized:
            logging.warning("No splat detected for %s seed %d; assigning penalty %.3f",
                design, seed, c)
        value = ObjectiveValue(design, seed, c, measurement, 1, Provenance.SIMULATED, penalized)
        with self.lock:
            self.cache[design.cache_key(seed)] = value
            self.ledger.append(value)
            self._tp_count += 1
            count = self._tp_count
        logging.info("Evaluated %s seed %d: c = %.5f (t_p %d)", design, seed, c, count)
        return value

    def evaluate_many(self, designs: Sequence[DesignPoint], seed: int,
        workers: int = 1) -> list[ObjectiveValue]:
        """ c = S_i / S_m at each design, averaged over seeds_per_eval consecutive seeds.

        Each distinct uncached (design, seed) pair is simulated once and
        charged one t_p; repeats are served from the cache at no cost.
        """

        designs = [clamp_or_reject(d, self.bounds, BoundPolicy.REJECT) for d in designs]
        seeds = [seed + k for k in range(self.config.seeds_per_eval)]

        # Distinct simulations still needed, in input order.
        jobs: list[tuple[DesignPoint, int]] = []
        pending: set[tuple[float, float, float, int]] = set()
        with self.lock:
            for design in designs:
                for s in seeds:
                    key = design.cache_key(s)
                    if key not in self.cache and key not in pending:
                        pending.add(key)
                        jobs.append((design, s))

        # Simulate.
        if workers > 1 and len(jobs) > 1:
            with ThreadPoolExecutor(max_workers=workers) as executor:
                measurements = list(executor.map(lambda job: self.measure(*job), jobs))
        else:
            measurements = [self.measure(*job) for job in jobs]
        fresh = {job[0].cache_key(job[1]): self._commit(job[0], job[1], m)
            for (job, m) in zip(jobs, measurements)}

        # Assemble per-design values; each fresh simulation is charged once.
        values: list[ObjectiveValue] = []
        for design in designs:
            parts: list[ObjectiveValue] = []
            for s in seeds:
                key = design.cache_key(s)
                if key in fresh:
                    parts.append(fresh.pop(key))
                else:
                    with self.lock:
                        cached = self.cache[key]
                    parts.append(ObjectiveValue(design, s, cached.c, cached.measurement, 0,
                        Provenance.CACHED, cached.penalized))
            values.append(combine_seeds(design, seed, parts))
        return values

    def evaluate(self, design: DesignPoint, seed: int) -> ObjectiveValue:
        """ c at one design. """
        return self.evaluate_many([design], seed)[0]

    def ledger_rows(self) -> list[str]:
        """ Evaluation ledger as CSV rows, header first. """
        rows = [EVALUATION_CSV_HEADER]
        with self.lock:
            ledger = list(self.ledger)
        for (index, value) in enumerate(ledger):
            m = value.measurement
            measured = [str(m.S_i), str(m.S_m), repr(m.mu)] if m else ['', '', '']
            rows.append(','.join([str(index), repr(value.design.v), repr(value.design.r),
                repr(value.design.theta), str(value.seed)] + measured +
                [repr(value.c), str(int(value.penalized)), value.provenance.value]))
        return rows

    def write_ledger(self, filename: str) -> None:
        """ Write the evaluation ledger CSV. """
        try:
            with open(filename, "w", encoding="utf-8") as csv_file:
                csv_file.write('\n'.join(self.ledger_rows()) + '\n')
        except OSError as ex:
            raise ColdSprayError(f'Unable to write {filename}: {str(ex)}') from ex

def combine_seeds(design: DesignPoint, seed: int, parts: list[ObjectiveValue]) -> ObjectiveValue:
    """ Mean over seeds; cost and penalty accumulate. """
    if len(parts) == 1:
        return parts[0]
    cost = sum(p.eval_cost for p in parts)
    provenance = Provenance.SIMULATED if cost > 0 else Provenance.CACHED
    return ObjectiveValue(design, seed, float(np.mean([p.c for p in parts])),
        parts[0].measurement, cost, provenance, any(p.penalized for p in parts))

class ImpactProblem:
    """ Adapts an objective to the optimizers' batch interface.

    Proposals are handled by the bound policy before evaluation; a batch is
    evaluated on up to workers threads with results in input order.
    """

    def __init__(self, objective: Objective, seed: int, workers: int = 1,
        policy: BoundPolicy = BoundPolicy.CLAMP):
        self.objective = objective
        self.seed = seed
        self.workers = workers
        self.policy = policy
        self.names: tuple[str, ...] = DESIGN_NAMES
        self.lower = objective.bounds.lower
        self.upper = objective.bounds.upper

    @property
    def cost(self) -> int:
        """ t_p charged so far. """
        return self.objective.tp_count

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        """ Objective at each row of points. """
        designs = [clamp_or_reject(DesignPoint.from_array(p), self.objective.bounds, self.policy)
            for p in np.atleast_2d(points)]
        values = self.objective.evaluate_many(designs, self.seed, self.workers)
        return np.array([value.c for value in values])
