#!/usr/bin/env python3

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

""" coldloop orchestration: one run directory per command """

# Standard library imports
from argparse import Namespace
import configparser
from contextlib import contextmanager
import datetime
import logging
import os
from typing import Iterator

# Local imports
from coldspray.config import RunConfig, config_hash, save_config
from coldspray.cs_logging import add_run_log, remove_run_log
from coldspray.design import DESIGN_NAMES, BoundPolicy, DesignPoint, clamp_or_reject
from coldspray.dump import Snapshot, read_frames, write_frames
from coldspray.imaging import RenderRule, append_measurement_csv, estimate_surface
from coldspray.imaging import measure_flattening, render_stress, render_topview, save_png
from coldspray.md_engine import ImpactRun, load_potential, run_impact
from coldspray.objective import ImpactObjective, ImpactProblem, build_measure
from coldspray.optimizers import OptimizationTrace, run_optimizer
from coldspray.plots import plot_convergence, plot_regression, plot_training
from coldspray.sampling import denormalize, latin_hypercube
from coldspray.surrogate_nn import as_objective, evaluate_regression, load_network
from coldspray.surrogate_nn import save_network, train
from coldspray.util import ensure_dir, format_float
from .error import CliError
from .ledger import LEDGER_FILENAME, PhaseTimer, RunLedger, read_ledger, write_ledger
from .report import SUMMARY_FILENAME, VERIFICATION_FILENAME, write_report

# Run directory contents.
CONFIG_FILENAME: str = 'config.ini'
RUN_LOG_FILENAME: str = 'run.log'
FRAMES_DIR_NAME: str = 'frames'
AUDIT_DIR_NAME: str = 'audit'
TRACE_FILENAME: str = 'trace.csv'
EVALUATIONS_FILENAME: str = 'evaluations.csv'
NETWORK_FILENAME: str = 'network.json'
TIME_MATCH: float = 1e-6

def write_lines(filename: str, rows: list[str]) -> None:
    """ Write rows as a text file. """
    try:
        with open(filename, "w", encoding="utf-8") as text_file:
            text_file.write('\n'.join(rows) + '\n')
    except OSError as ex:
        raise CliError(f'Unable to write {filename}.\n{str(ex)}') from ex

def write_ini(filename: str, section: str, values: dict[str, str]) -> None:
    """ Write one INI section. """
    parser = configparser.ConfigParser(interpolation=None)
    parser[section] = values
    try:
        with open(filename, "w", encoding="utf-8") as ini_file:
            parser.write(ini_file)
    except OSError as ex:
        raise CliError(f'Unable to write {filename}.\n{str(ex)}') from ex

def scene_rule(config: RunConfig, snapshot: Snapshot, surface: float) -> RenderRule:
    """ Render rule from just below the surface to the top of the highest atom. """
    imaging = config.imaging
    top = float(snapshot.positions[:, 2].max()) - surface + imaging.atom_draw_radius
    return RenderRule(
        z_band = (imaging.z_band[0] - imaging.layer_tolerance, max(imaging.z_band[1], top)),
        atom_draw_radius = imaging.atom_draw_radius,
        pixel_scale = imaging.pixel_scale,
        surface = surface,
        intensity_range = imaging.intensity_range)

def find_snapshot(snapshots: list[Snapshot], time: float) -> Snapshot | None:
    """ Snapshot taken at time, if any. """
    for snapshot in snapshots:
        if abs(snapshot.time - time) < TIME_MATCH:
            return snapshot
    return None

class Orchestrator:
    """ Runs coldloop commands. Each command writes a fresh run directory. """

    config: RunConfig
    run_dir: str

    def __init__(self, config: RunConfig):
        self.config = config
        self.run_dir = ""

    @contextmanager
    def __run(self, command: str, method: str = "") -> Iterator[RunLedger]:
        """ Create the run directory, log into it, and write the ledger on success. """

        # Create the run directory.
        out = self.config.output.directory
        ensure_dir(out)
        digest = config_hash(self.config)
        stamp = datetime.datetime.now(datetime.timezone.utc).strftime('%Y%m%dT%H%M%SZ')
        base = os.path.join(out, f'{command}-{digest}-{stamp}')
        self.run_dir = base
        suffix = 1
        while os.path.exists(self.run_dir):
            suffix += 1
            self.run_dir = f'{base}-{suffix}'
        ensure_dir(self.run_dir)
        save_config(self.config, os.path.join(self.run_dir, CONFIG_FILENAME))

        # Log to the run directory too.
        sink_id = add_run_log(os.path.join(self.run_dir, RUN_LOG_FILENAME))
        logging.info("Run directory %s", self.run_dir)
        ledger = RunLedger(command=command, method=method, config_hash=digest,
            seed=self.config.scene.seed)
        try:
            yield ledger
            write_ledger(ledger, self.run_dir)
            logging.info("Ledger: modeling %d t_p, optimization %d t_p, total %d t_p",
                ledger.modeling_tp, ledger.optimization_tp, ledger.total_tp)
        finally:
            remove_run_log(sink_id)

    def __path(self, name: str) -> str:
        return os.path.join(self.run_dir, name)

    def __impact_objective(self) -> ImpactObjective:
        """ The true objective for this config. """
        config = self.config
        return ImpactObjective(config.objective,
            build_measure(config.scene, config.imaging, config.objective))

    def __write_trace(self, trace: OptimizationTrace) -> None:
        """ Trace CSV, summary, and convergence plot. """
        trace.to_csv(self.__path(TRACE_FILENAME))
        trace.write_summary(self.__path(SUMMARY_FILENAME))
        plot_convergence([trace], self.__path('convergence.png'))

    def __design(self, args: Namespace) -> DesignPoint:
        """ Design from [objective] design with command line overrides. """
        (v, r, theta) = self.config.objective.design
        design = DesignPoint(
            v = args.v if args.v is not None else v,
            r = args.r if args.r is not None else r,
            theta = args.theta if args.theta is not None else theta)
        return clamp_or_reject(design, self.config.objective.bounds, BoundPolicy.REJECT)

    def __write_images(self, run: ImpactRun) -> None:
        """ Top-view and Von Mises images at the configured times. """
        imaging = self.config.imaging
        surface = estimate_surface(run.snapshots[0], imaging.layer_tolerance)
        for time in imaging.image_times:
            snapshot = find_snapshot(run.snapshots, time)
            if snapshot is None:
                logging.warning("No snapshot at t = %.3f ps; skipping its images", time)
                continue
            rule = scene_rule(self.config, snapshot, surface)
            save_png(render_topview(snapshot, rule), self.__path(f'topview-t{time:06.2f}.png'))
            save_png(render_stress(snapshot, rule, imaging.stress_range),
                self.__path(f'stress-t{time:06.2f}.png'))

    def do_simulate(self, args: Namespace) -> None:
        """ Run one impact; write frames, energies, and images. """

        design = self.__design(args)
        seed = self.config.scene.seed
        with self.__run('simulate') as ledger:
            potential = load_potential(self.config.scene)
            with PhaseTimer(ledger, 'simulation'):
                run = run_impact(design, self.config.scene, potential, seed)
            ledger.standalone_tp = 1

            # Frames and energies.
            frames_dir = self.__path(FRAMES_DIR_NAME)
            ensure_dir(frames_dir)
            write_frames(run.snapshots, frames_dir)
            write_lines(self.__path('energies.csv'), ['time,kinetic,potential,total'] + [
                ','.join(format_float(v) for v in (e.time, e.kinetic, e.potential, e.total))
                for e in run.energies])
            write_ini(self.__path('impact.ini'), 'impact', {
                'v': format_float(design.v),
                'r': format_float(design.r),
                'theta': format_float(design.theta),
                'seed': str(seed),
                'steps': str(run.steps),
                'snapshots': str(len(run.snapshots)),
                'contact_time': format_float(run.contact_time) if run.contact_time is not None
                    else 'none',
                'surface': format_float(run.surface),
                'neighbor_rebuilds': str(run.neighbor_rebuilds)})

            # Images.
            with PhaseTimer(ledger, 'imaging'):
                self.__write_images(run)

    def do_measure(self, args: Namespace) -> None:
        """ Measure the flattening ratio from a directory of dump frames.

        measurement.csv gets the one summary row of the trajectory; frames.csv
        gets one row per measured frame after contact.
        """

        frames = read_frames(args.dumps)
        contact_distance = load_potential(self.config.scene).cutoff
        with self.__run('measure'):
            audit_dir = self.__path(AUDIT_DIR_NAME) if self.config.output.audit else None
            result = measure_flattening(frames, self.config.imaging, contact_distance,
                audit_dir)
            c = result.S_i / result.S_m if result.S_m > 0 else self.config.objective.penalty
            append_measurement_csv(self.__path('measurement.csv'), None, result, c)
            write_lines(self.__path('frames.csv'), ['time,area,centroid_row,centroid_col'] + [
                f'{format_float(m.time)},{m.area},{format_float(m.centroid[0])},' + \
                f'{format_float(m.centroid[1])}' for m in result.frames])

    def do_optimize(self, args: Namespace) -> None: # pylint: disable=unused-argument
        """ Optimize against the true objective. """

        config = self.config
        with self.__run('optimize', config.optimizer.algorithm.value.upper()) as ledger:
            objective = self.__impact_objective()
            problem = ImpactProblem(objective, config.scene.seed, config.optimizer.workers,
                config.objective.bound_policy)
            with PhaseTimer(ledger, 'optimization'):
                trace = run_optimizer(problem, config.optimizer, config.scene.seed)
            ledger.optimization_tp = objective.tp_count
            self.__write_trace(trace)
            objective.write_ledger(self.__path(EVALUATIONS_FILENAME))

    def do_train_surrogate(self, args: Namespace) -> None: # pylint: disable=unused-argument
        """ Simulate training and test samples, train the network, and save it. """

        config = self.config
        seed = config.scene.seed
        bounds = config.objective.bounds
        with self.__run('train-surrogate', 'BPNN') as ledger:
            objective = self.__impact_objective()
            problem = ImpactProblem(objective, seed, config.optimizer.workers,
                BoundPolicy.REJECT)

            # Samples: Latin hypercubes over the design box.
            with PhaseTimer(ledger, 'modeling'):
                X_train = denormalize(latin_hypercube(config.surrogate.train_samples,
                    len(DESIGN_NAMES), seed), bounds.lower, bounds.upper)
                y_train = problem.evaluate(X_train)
            ledger.modeling_tp = objective.tp_count
            with PhaseTimer(ledger, 'testing'):
                X_test = denormalize(latin_hypercube(config.surrogate.test_samples,
                    len(DESIGN_NAMES), seed + 1), bounds.lower, bounds.upper)
                y_test = problem.evaluate(X_test)
            ledger.testing_tp = objective.tp_count - ledger.modeling_tp
            objective.write_ledger(self.__path(EVALUATIONS_FILENAME))

            # Train and evaluate.
            with PhaseTimer(ledger, 'training'):
                (net, report) = train(X_train, y_train, config.surrogate, seed,
                    (bounds.lower, bounds.upper))
            report.train_regression = evaluate_regression(net, X_train, y_train)
            report.test_regression = evaluate_regression(net, X_test, y_test)
            logging.info("Regression R: train %.5f, test %.5f",
                report.train_regression.r, report.test_regression.r)

            # Persist.
            save_network(net, self.__path(NETWORK_FILENAME))
            report.to_csv(self.__path('training.csv'))
            write_ini(self.__path('regression.ini'), 'regression', {
                'best_epoch': str(report.best_epoch),
                'train_r': format_float(report.train_regression.r),
                'train_mse': format_float(report.train_regression.mse),
                'test_r': format_float(report.test_regression.r),
                'test_mse': format_float(report.test_regression.mse)})
            plot_training(report, self.__path('training.png'))
            plot_regression(report.train_regression, 'Training', self.__path('regression-train.png'))
            plot_regression(report.test_regression, 'Test', self.__path('regression-test.png'))

    def do_surrogate_optimize(self, args: Namespace) -> None:
        """ Optimize against a trained network; optionally simulate the optimum. """

        config = self.config
        net = load_network(args.network)
        if net.layers != tuple(config.surrogate.layers):
            raise CliError(f'Network {args.network} has layers {list(net.layers)} but the ' + \
                f'config expects {list(config.surrogate.layers)}.')
        method = f'BPNN-{config.optimizer.algorithm.value.upper()}'
        with self.__run('surrogate-optimize', method) as ledger:
            # Modeling cost comes from the training run.
            ledger.network_source = os.path.abspath(args.network)
            source_dir = os.path.dirname(ledger.network_source)
            if os.path.isfile(os.path.join(source_dir, LEDGER_FILENAME)):
                ledger.modeling_tp = read_ledger(source_dir).modeling_tp

            surrogate = as_objective(net, config.objective.bounds)
            problem = ImpactProblem(surrogate, config.scene.seed, 1,
                config.objective.bound_policy)
            with PhaseTimer(ledger, 'optimization'):
                trace = run_optimizer(problem, config.optimizer, config.scene.seed)
            ledger.optimization_tp = surrogate.tp_count
            logging.info("Surrogate predictions: %d", surrogate.predictions)
            self.__write_trace(trace)

            if args.verify:
                self.__verify(trace, ledger)

    def __verify(self, trace: OptimizationTrace, ledger: RunLedger) -> None:
        """ Simulate the surrogate optimum once. """
        objective = self.__impact_objective()
        design = clamp_or_reject(DesignPoint.from_array(trace.optimal_x),
            self.config.objective.bounds, BoundPolicy.CLAMP)
        with PhaseTimer(ledger, 'verification'):
            value = objective.evaluate(design, self.config.scene.seed)
        ledger.verification_tp = objective.tp_count
        gap = abs(value.c - trace.optimal_value) / value.c
        logging.info("Verification: predicted c = %.5f, simulated c = %.5f", trace.optimal_value,
            value.c)
        write_ini(self.__path(VERIFICATION_FILENAME), 'verification', {
            'predicted_c': format_float(trace.optimal_value),
            'simulated_c': format_float(value.c),
            'relative_gap': format_float(gap),
            'penalized': 'yes' if value.penalized else 'no'})
        objective.write_ledger(self.__path(EVALUATIONS_FILENAME))

    def do_report(self, args: Namespace) -> None: # pylint: disable=unused-argument
        """ Print and save the report over every run in the output directory. """
        print(write_report(self.config.output.directory), end='')

    def dispatch(self, args: Namespace) -> None:
        """ Run the command named in args. """
        commands = {
            'simulate': self.do_simulate,
            'measure': self.do_measure,
            'optimize': self.do_optimize,
            'train-surrogate': self.do_train_surrogate,
            'surrogate-optimize': self.do_surrogate_optimize,
            'report': self.do_report,
        }
        if args.command not in commands:
            raise CliError(f'Unknown command {args.command}')
        commands[args.command](args)
