#!/usr/bin/env python3

""" This file contains the EGO, PSO, and DE optimizers and their trace. """

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
import configparser
from dataclasses import dataclass, field
import logging
from typing import Callable, Protocol, Sequence

# 3rd party imports
import numpy as np

# Local imports
from .config import OptimizerConfig
from .error import ColdSprayError
from .kriging import expected_improvement, fit_kriging
from .sampling import denormalize, latin_hypercube
from .util import format_float

# Physical-unit distance below which two points share an evaluation cache entry.
DUPLICATE_TOLERANCE: float = 2e-6
DUPLICATE_STEP: float = 4.0 # in tolerances

class Problem(Protocol):
    """ A box-bounded minimization problem evaluated in batches of physical points. """

    names: tuple[str, ...]
    lower: np.ndarray
    upper: np.ndarray

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        ...

    @property
    def cost(self) -> int:
        ...

class FunctionProblem:
    """ An analytic function with box bounds. Every evaluated point costs one unit. """

    def __init__(self, function: Callable[[np.ndarray], np.ndarray],
        lower: Sequence[float], upper: Sequence[float], names: Sequence[str] | None = None):
        self.function = function
        self.lower = np.asarray(lower, dtype=np.float64)
        self.upper = np.asarray(upper, dtype=np.float64)
        self.names = tuple(names) if names else tuple(f'x{k + 1}' for k in range(len(self.lower)))
        self.calls: int = 0

    @property
    def cost(self) -> int:
        """ Number of points evaluated. """
        return self.calls

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        """ Function value at each row of points. """
        points = np.atleast_2d(points)
        self.calls += len(points)
        return np.asarray(self.function(points), dtype=np.float64).reshape(len(points))

def sphere(points: np.ndarray) -> np.ndarray:
    """ Sum of squares; minimum 0 at the origin. """
    return np.sum(np.atleast_2d(points) ** 2, axis=1)

def rosenbrock(points: np.ndarray) -> np.ndarray:
    """ Rosenbrock valley; minimum 0 at (1, ..., 1). """
    x = np.atleast_2d(points)
    return np.sum(100.0 * (x[:, 1:] - x[:, :-1] ** 2) ** 2 + (1.0 - x[:, :-1]) ** 2, axis=1)

BRANIN_MINIMUM: float = 0.39788735772973816

def branin(points: np.ndarray) -> np.ndarray:
    """ Branin function on [-5, 10] x [0, 15]; three global minima of 0.397887. """
    x = np.atleast_2d(points)
    (x1, x2) = (x[:, 0], x[:, 1])
    b = 5.1 / (4.0 * np.pi ** 2)
    c = 5.0 / np.pi
    t = 1.0 / (8.0 * np.pi)
    return (x2 - b * x1 ** 2 + c * x1 - 6.0) ** 2 + 10.0 * (1.0 - t) * np.cos(x1) + 10.0

@dataclass
class TraceRecord:
    """ Incumbent after one iteration. """
    iteration: int
    cum_tp: int
    best_x: np.ndarray
    best_value: float

@dataclass
class OptimizationTrace:
    """ Per-iteration incumbent history of one optimizer run. """

    algorithm: str
    names: tuple[str, ...]
    records: list[TraceRecord] = field(default_factory=list)
    evaluations: int = 0

    def record(self, iteration: int, cum_tp: int, best_x: np.ndarray, best_value: float) -> None:
        """ Append the incumbent; the best value never increases. """
        if self.records and best_value > self.records[-1].best_value:
            (best_x, best_value) = (self.records[-1].best_x, self.records[-1].best_value)
        self.records.append(TraceRecord(iteration, cum_tp, np.array(best_x), float(best_value)))
        logging.info("%s iteration %d: best %s = %.6g (t_p %d)", self.algorithm.upper(),
            iteration, dict(zip(self.names, np.round(best_x, 4).tolist())), best_value, cum_tp)

    @property
    def optimal_x(self) -> np.ndarray:
        """ Final incumbent. """
        return self.records[-1].best_x

    @property
    def optimal_value(self) -> float:
        """ Final incumbent value. """
        return self.records[-1].best_value

    def best_values(self) -> np.ndarray:
        """ Incumbent value per iteration. """
        return np.array([r.best_value for r in self.records])

    def csv_rows(self) -> list[str]:
        """ Trace as CSV rows, header first. """
        header = ','.join(['iteration', 'cum_tp'] + [f'best_{n}' for n in self.names] + ['best_c'])
        rows = [header]
        for r in self.records:
            rows.append(','.join([str(r.iteration), str(r.cum_tp)] +
                [format_float(v) for v in r.best_x] + [format_float(r.best_value)]))
        return rows

    def to_csv(self, filename: str) -> None:
        """ Write the trace CSV. """
        try:
            with open(filename, "w", encoding="utf-8") as csv_file:
                csv_file.write('\n'.join(self.csv_rows()) + '\n')
        except OSError as ex:
            raise ColdSprayError(f'Unable to write {filename}: {str(ex)}') from ex

    def summary(self) -> dict[str, str]:
        """ Optimum row: method, optimal coordinates, optimal objective, evaluations. """
        row = {'method': self.algorithm.upper()}
        for (name, value) in zip(self.names, self.optimal_x):
            row[name] = format_float(value)
        row['c'] = format_float(self.optimal_value)
        row['evaluations'] = str(self.evaluations)
        return row

    def write_summary(self, filename: str) -> None:
        """ Write the summary as an INI [summary] section. """
        summary = configparser.ConfigParser(interpolation=None)
        summary['summary'] = self.summary()
        try:
            with open(filename, "w", encoding="utf-8") as summary_file:
                summary.write(summary_file)
        except OSError as ex:
            raise ColdSprayError(f'Unable to write {filename}: {str(ex)}') from ex

def to_physical(problem: Problem, unit: np.ndarray) -> np.ndarray:
    """ Unit-cube points in physical units, kept inside the bounds against round-off. """
    return np.clip(denormalize(unit, problem.lower, problem.upper), problem.lower, problem.upper)

def evaluate_unit(problem: Problem, unit: np.ndarray) -> np.ndarray:
    """ Evaluate unit-cube points in physical units. """
    return problem.evaluate(to_physical(problem, unit))

def incumbent(problem: Problem, unit: np.ndarray, values: np.ndarray) -> tuple[np.ndarray, float]:
    """ Physical point and value of the best member. """
    best = int(np.argmin(values))
    return (to_physical(problem, unit[best]), float(values[best]))

def pso_step(x: np.ndarray, velocity: np.ndarray, personal_best: np.ndarray,
    global_best: np.ndarray, rng: np.random.Generator, inertia: float, cognitive: float,
    social: float) -> tuple[np.ndarray, np.ndarray]:
    """ One global-best PSO move in the unit cube.

    Positions are clamped to the cube and the velocity component of a clamped
    coordinate is zeroed.
    """

    r1 = rng.random(x.shape)
    r2 = rng.random(x.shape)
    velocity = inertia * velocity + cognitive * r1 * (personal_best - x) + \
        social * r2 * (global_best[None, :] - x)
    moved = x + velocity
    clamped = (moved < 0.0) | (moved > 1.0)
    velocity = np.where(clamped, 0.0, velocity)
    return (np.clip(moved, 0.0, 1.0), velocity)

def run_pso(problem: Problem, particles: int = 20, generations: int = 100, seed: int = 0,
    inertia: float = 0.729, cognitive: float = 1.49445, social: float = 1.49445) -> OptimizationTrace:
    """ Global-best particle swarm; exactly particles x generations evaluations. """

    rng = np.random.default_rng(seed)
    dims = len(problem.lower)
    trace = OptimizationTrace('pso', problem.names)
    start_cost = problem.cost

    x = rng.random((particles, dims))
    velocity = rng.uniform(-0.1, 0.1, (particles, dims))
    values = evaluate_unit(problem, x)
    (personal_best, personal_value) = (x.copy(), values.copy())
    leader = int(np.argmin(personal_value))
    trace.record(0, problem.cost - start_cost, *incumbent(problem, personal_best, personal_value))

    for generation in range(1, generations):
        (x, velocity) = pso_step(x, velocity, personal_best, personal_best[leader], rng,
            inertia, cognitive, social)
        values = evaluate_unit(problem, x)
        improved = values < personal_value
        personal_best[improved] = x[improved]
        personal_value[improved] = values[improved]
        leader = int(np.argmin(personal_value))
        trace.record(generation, problem.cost - start_cost,
            *incumbent(problem, personal_best, personal_value))

    trace.evaluations = problem.cost - start_cost
    return trace

def de_mutant(base: np.ndarray, first: np.ndarray, second: np.ndarray, f: float) -> np.ndarray:
    """ base + f (first - second). """
    return base + f * (first - second)

def binomial_crossover(target: np.ndarray, mutant: np.ndarray, cr: float,
    rng: np.random.Generator) -> np.ndarray:
    """ Take each mutant coordinate with probability cr, and always one random coordinate. """
    dims = len(target)
    take = rng.random(dims) < cr
    take[rng.integers(dims)] = True
    return np.where(take, mutant, target)

@dataclass
class Population:
    """ Final members of a DE run in the unit cube. """
    members: np.ndarray
    values: np.ndarray

def differential_evolution(problem: Problem, population: int, generations: int,
    rng: np.random.Generator, f: float = 0.5, cr: float = 0.9,
    algorithm: str = 'de', quiet: bool = False) -> tuple[OptimizationTrace, Population]:
    """ DE/rand/1/bin with clamping and greedy selection. """

    if population < 4:
        raise ColdSprayError(f'Differential evolution needs a population of at least 4, got {population}')
    dims = len(problem.lower)
    trace = OptimizationTrace(algorithm, problem.names)
    start_cost = problem.cost

    def record(generation: int) -> None:
        (best_x, best_value) = incumbent(problem, members, values)
        if quiet:
            trace.records.append(TraceRecord(generation, problem.cost - start_cost,
                best_x, best_value))
        else:
            trace.record(generation, problem.cost - start_cost, best_x, best_value)

    members = rng.random((population, dims))
    values = evaluate_unit(problem, members)
    record(0)

    for generation in range(1, generations):
        trials = np.empty_like(members)
        for i in range(population):
            others = [k for k in range(population) if k != i]
            (r1, r2, r3) = rng.choice(others, size=3, replace=False)
            mutant = de_mutant(members[r1], members[r2], members[r3], f)
            trials[i] = np.clip(binomial_crossover(members[i], mutant, cr, rng), 0.0, 1.0)
        trial_values = evaluate_unit(problem, trials)
        better = trial_values <= values
        members[better] = trials[better]
        values[better] = trial_values[better]
        record(generation)

    trace.evaluations = problem.cost - start_cost
    return (trace, Population(members, values))

def run_de(problem: Problem, population: int = 20, generations: int = 100, seed: int = 0,
    f: float = 0.5, cr: float = 0.9) -> OptimizationTrace:
    """ Differential evolution; exactly population x generations evaluations. """
    (trace, _) = differential_evolution(problem, population, generations,
        np.random.default_rng(seed), f, cr)
    return trace

def duplicate_spacing(lower: np.ndarray, upper: np.ndarray) -> np.ndarray:
    """ DUPLICATE_TOLERANCE per axis in unit-cube coordinates. """
    return DUPLICATE_TOLERANCE / (np.asarray(upper) - np.asarray(lower))

def is_duplicate(point: np.ndarray, existing: np.ndarray, spacing: np.ndarray) -> bool:
    """ True if point is within spacing of a row of existing on every axis. """
    return bool(np.any(np.all(np.abs(existing - point) < spacing, axis=1)))

def choose_infill(candidate: np.ndarray, inner: Population, existing: np.ndarray,
    rng: np.random.Generator, spacing: np.ndarray) -> np.ndarray:
    """ Infill point that is not already a training point.

    Points within spacing of a training point on every axis count as
    duplicates. A duplicate is nudged DUPLICATE_STEP spacings toward the cube
    center once; if it is still a duplicate the best non-duplicate inner
    member is used.
    """

    if not is_duplicate(candidate, existing, spacing):
        return candidate
    inward = np.where(candidate < 0.5, 1.0, -1.0)
    nudged = np.clip(candidate + DUPLICATE_STEP * spacing * inward, 0.0, 1.0)
    if not is_duplicate(nudged, existing, spacing):
        return nudged
    for k in np.argsort(inner.values, kind='stable'):
        if not is_duplicate(inner.members[k], existing, spacing):
            return inner.members[k]
    logging.warning("Every EI candidate duplicates a training point; sampling at random")
    return rng.random(len(candidate))

def run_ego(problem: Problem, n_init: int = 20, n_infill: int = 100, seed: int = 0,
    restarts: int = 10, nugget: float = 1e-8, inner_population: int = 20,
    inner_generations: int = 100) -> OptimizationTrace:
    """ Efficient global optimization with single-point infill.

    Starts from a Latin hypercube; each iteration refits Kriging and evaluates
    the maximizer of expected improvement found by DE on the model. Exactly
    n_init + n_infill evaluations of the problem.
    """

    if n_init < 1 or n_infill < 0:
        raise ColdSprayError(f'EGO budget must be positive, got ({n_init}, {n_infill})')
    rng = np.random.default_rng(seed)
    dims = len(problem.lower)
    spacing = duplicate_spacing(problem.lower, problem.upper)
    trace = OptimizationTrace('ego', problem.names)
    start_cost = problem.cost

    X = latin_hypercube(n_init, dims, rng)
    y = evaluate_unit(problem, X)
    trace.record(0, problem.cost - start_cost, *incumbent(problem, X, y))

    for iteration in range(1, n_infill + 1):
        model = fit_kriging(X, y, restarts, nugget, seed=int(rng.integers(2**31)))
        f_min = float(np.min(y))

        # Maximize EI on the model; these evaluations are free.
        def negative_ei(unit: np.ndarray, model=model, f_min=f_min) -> np.ndarray:
            return -expected_improvement(model, unit, f_min)
        inner_problem = FunctionProblem(negative_ei, np.zeros(dims), np.ones(dims))
        (_, inner) = differential_evolution(inner_problem, inner_population, inner_generations,
            rng, algorithm='ei', quiet=True)
        best = int(np.argmin(inner.values))
        candidate = choose_infill(inner.members[best], inner, X, rng, spacing)

        value = evaluate_unit(problem, candidate[None, :])
        X = np.vstack([X, candidate])
        y = np.append(y, value)
        logging.debug("EGO infill %d: EI %.4g at %s", iteration, -inner.values[best],
            np.round(candidate, 4).tolist())
        trace.record(iteration, problem.cost - start_cost, *incumbent(problem, X, y))

    trace.evaluations = problem.cost - start_cost
    return trace

def run_optimizer(problem: Problem, config: OptimizerConfig, seed: int) -> OptimizationTrace:
    """ Run the optimizer named in config with its configured budget. """
    match config.algorithm.value:
        case 'ego':
            return run_ego(problem, config.ego_init, config.ego_infill, seed,
                config.kriging_restarts, config.nugget, config.ego_inner_population,
                config.ego_inner_generations)
        case 'pso':
            return run_pso(problem, config.particles, config.generations, seed,
                config.inertia, config.cognitive, config.social)
        case 'de':
            return run_de(problem, config.population, config.de_generations, seed,
                config.de_f, config.de_cr)
    raise ColdSprayError(f'Unknown algorithm {config.algorithm}')
