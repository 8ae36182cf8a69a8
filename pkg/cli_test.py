#!/usr/bin/env python3

""" Test coldloop commands end to end with the analytic objective """

# Standard library imports
import configparser
import os

# 3rd party imports
import pytest

# Local imports
from cli import Orchestrator
from cli.args import create_parser, resolve_config
from cli.error import CliError
from cli.ledger import LEDGER_FILENAME, TIMING_FILENAME, PhaseTimer, RunLedger, read_ledger
from cli.ledger import write_ledger
from cli.report import REPORT_FILENAME
from coldspray.config import parse_ini, save_config

FAST_CONFIG: str = """
[objective]
model = analytic

[optimizer]
particles = 5
generations = 4
population = 5
de_generations = 4
ego_init = 6
ego_infill = 2
ego_inner_population = 6
ego_inner_generations = 5
kriging_restarts = 2

[surrogate]
layers = 3, 4, 1
epochs = 20
train_samples = 20
test_samples = 10
"""

def write_config(tmp_path, text: str = FAST_CONFIG) -> str:
    """ Save a config file under tmp_path. """
    filename = str(tmp_path / 'run.ini')
    save_config(parse_ini(text), filename)
    return filename

def coldloop(tmp_path, *argv: str) -> str:
    """ Run one command against tmp_path/runs; returns the run directory. """
    args = create_parser().parse_args(list(argv) + ['--config', write_config(tmp_path),
        '--out', str(tmp_path / 'runs')])
    orchestrator = Orchestrator(resolve_config(args))
    orchestrator.dispatch(args)
    return orchestrator.run_dir

def read_text(run_dir: str, name: str) -> str:
    """ Contents of a run file. """
    with open(os.path.join(run_dir, name), "r", encoding="utf-8") as text_file:
        return text_file.read()

def test_resolve_overrides(tmp_path):
    """ Test command line options override the config file. """
    args = create_parser().parse_args(['optimize', '--config', write_config(tmp_path),
        '--seed', '5', '--workers', '3', '-g', 'de', '--out', 'elsewhere', '--audit'])
    config = resolve_config(args)
    assert config.scene.seed == 5
    assert config.optimizer.workers == 3
    assert config.optimizer.algorithm.value == 'de'
    assert config.output.directory == 'elsewhere'
    assert config.output.audit

def test_resolve_bad_workers(tmp_path):
    """ Test an invalid override becomes a command line error. """
    args = create_parser().parse_args(['optimize', '--config', write_config(tmp_path),
        '--workers', '0'])
    with pytest.raises(CliError):
        resolve_config(args)

def test_optimize_pso(tmp_path):
    """ Test optimize writes its files and charges only optimizer simulations. """
    run_dir = coldloop(tmp_path, 'optimize', '-g', 'pso')
    assert os.path.basename(run_dir).startswith('optimize-')
    for name in ['config.ini', 'run.log', 'trace.csv', 'summary.ini', 'convergence.png',
        'evaluations.csv', LEDGER_FILENAME, TIMING_FILENAME]:
        assert os.path.isfile(os.path.join(run_dir, name)), name
    ledger = read_ledger(run_dir)
    assert ledger.method == 'PSO'
    assert ledger.modeling_tp == 0
    assert 0 < ledger.optimization_tp <= 20
    assert ledger.total_tp == ledger.optimization_tp
    assert len(read_text(run_dir, 'evaluations.csv').splitlines()) == ledger.optimization_tp + 1
    assert len(read_text(run_dir, 'trace.csv').splitlines()) == 5

def test_optimize_is_reproducible(tmp_path):
    """ Test two runs with one config write identical traces and ledgers. """
    first = coldloop(tmp_path, 'optimize', '-g', 'de')
    second = coldloop(tmp_path, 'optimize', '-g', 'de')
    assert first != second
    for name in ['trace.csv', 'summary.ini', 'evaluations.csv', LEDGER_FILENAME, 'config.ini']:
        assert read_text(first, name) == read_text(second, name)

def test_optimize_ego(tmp_path):
    """ Test EGO charges its initial design plus its infill points. """
    ledger = read_ledger(coldloop(tmp_path, 'optimize', '-g', 'ego'))
    assert ledger.method == 'EGO'
    assert ledger.optimization_tp == 8

def test_surrogate_pipeline(tmp_path):
    """ Test training, surrogate optimization with verification, and the report. """
    train_dir = coldloop(tmp_path, 'train-surrogate')
    for name in ['network.json', 'training.csv', 'regression.ini', 'training.png',
        'regression-train.png', 'regression-test.png']:
        assert os.path.isfile(os.path.join(train_dir, name)), name
    trained = read_ledger(train_dir)
    assert trained.method == 'BPNN'
    assert trained.modeling_tp == 20
    assert trained.testing_tp == 10
    assert trained.total_tp == 20

    network = os.path.join(train_dir, 'network.json')
    optimize_dir = coldloop(tmp_path, 'surrogate-optimize', network, '--verify')
    ledger = read_ledger(optimize_dir)
    assert ledger.method == 'BPNN-PSO'
    assert ledger.modeling_tp == 20
    assert ledger.optimization_tp == 0
    assert ledger.verification_tp == 1
    assert ledger.total_tp == 20
    assert ledger.network_source == os.path.abspath(network)
    verification = configparser.ConfigParser(interpolation=None)
    verification.read(os.path.join(optimize_dir, 'verification.ini'))
    assert float(verification['verification']['simulated_c']) > 0.0

    coldloop(tmp_path, 'optimize')
    args = create_parser().parse_args(['report', '--out', str(tmp_path / 'runs')])
    Orchestrator(resolve_config(args)).dispatch(args)
    with open(tmp_path / 'runs' / REPORT_FILENAME, "r", encoding="utf-8") as report_file:
        report = report_file.read()
    assert 'Optimal solutions of classic optimization' in report
    assert 'Optimal solutions of BPNN-assisted optimization' in report
    assert 'Computational cost' in report
    assert 'BPNN-PSO' in report
    assert '20 t_p' in report

def test_surrogate_layer_mismatch(tmp_path):
    """ Test a network must match the configured architecture. """
    train_dir = coldloop(tmp_path, 'train-surrogate')
    args = create_parser().parse_args(['surrogate-optimize',
        os.path.join(train_dir, 'network.json'), '--out', str(tmp_path / 'runs')])
    with pytest.raises(CliError) as exc_info:
        Orchestrator(resolve_config(args)).dispatch(args)
    assert 'layers [3, 4, 1]' in str(exc_info.value)

def test_report_without_runs(tmp_path):
    """ Test the report needs at least one run. """
    os.makedirs(tmp_path / 'runs')
    args = create_parser().parse_args(['report', '--out', str(tmp_path / 'runs')])
    with pytest.raises(CliError) as exc_info:
        Orchestrator(resolve_config(args)).dispatch(args)
    assert 'No runs found' in str(exc_info.value)

def test_ledger_files(tmp_path):
    """ Test wall-clock time stays out of ledger.json. """
    ledger = RunLedger(command='optimize', method='DE', modeling_tp=3, optimization_tp=4,
        verification_tp=1)
    with PhaseTimer(ledger, 'optimization'):
        pass
    write_ledger(ledger, str(tmp_path))
    assert 'wall_clock' not in read_text(str(tmp_path), LEDGER_FILENAME)
    assert '"total_tp": 7' in read_text(str(tmp_path), LEDGER_FILENAME)
    loaded = read_ledger(str(tmp_path))
    assert loaded.total_tp == 7
    assert loaded.verification_tp == 1
    assert set(loaded.wall_clock) == {'optimization'}

@pytest.mark.slow
def test_simulate_then_measure(tmp_path):
    """ Test a small impact writes frames that measure can read back. """
    text = FAST_CONFIG.replace('model = analytic', 'r = 3, 6\ndesign = 8, 4, 0') + """
[scene]
substrate_size = 22, 22, 11
standoff = 4
dt = 0.002
equilibration_time = 0.01
post_contact_time = 0.2
snapshot_interval = 0.1

[imaging]
image_times = 0, 0.5
"""
    config_file = write_config(tmp_path, text)
    args = create_parser().parse_args(['simulate', '--config', config_file,
        '--out', str(tmp_path / 'runs')])
    orchestrator = Orchestrator(resolve_config(args))
    orchestrator.dispatch(args)
    run_dir = orchestrator.run_dir
    assert read_ledger(run_dir).standalone_tp == 1
    assert read_ledger(run_dir).total_tp == 0
    assert os.path.isfile(os.path.join(run_dir, 'topview-t000.00.png'))
    assert os.path.isfile(os.path.join(run_dir, 'stress-t000.50.png'))
    assert len(read_text(run_dir, 'energies.csv').splitlines()) == 9

    args = create_parser().parse_args(['measure', os.path.join(run_dir, 'frames'),
        '--config', config_file, '--out', str(tmp_path / 'runs'), '--audit'])
    orchestrator = Orchestrator(resolve_config(args))
    orchestrator.dispatch(args)
    rows = read_text(orchestrator.run_dir, 'measurement.csv').splitlines()
    assert rows[0].startswith('design_v,design_r,design_theta,S_i,S_m')
    assert len(rows) == 2
    frame_rows = read_text(orchestrator.run_dir, 'frames.csv').splitlines()
    assert frame_rows[0] == 'time,area,centroid_row,centroid_col'
    assert os.path.isfile(os.path.join(orchestrator.run_dir, 'audit', 'background.png'))
