#!/usr/bin/env python3

""" Command line arguments for coldloop. """

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
from argparse import ArgumentParser, Namespace

# 3rd party imports
# pylint: disable=no-name-in-module
from pydantic import ValidationError

# Local imports
from coldspray.config import Algorithm, RunConfig, load_config
from .error import CliError

COMMANDS: tuple[str, ...] = ('simulate', 'measure', 'optimize', 'train-surrogate',
    'surrogate-optimize', 'report')

def config_parser_for_common(parser: ArgumentParser) -> None:
    """ Add arguments every command accepts. """
    parser.add_argument('-c', '--config', help='Config file. Defaults apply when omitted.')
    parser.add_argument('-s', '--seed', type=int, help='Seed; overrides [scene] seed.')
    parser.add_argument('-o', '--out', help='Output directory; overrides [output] directory.')
    parser.add_argument('-a', '--audit', action='store_true',
        help='Write per-stage imaging images.')
    parser.add_argument('-w', '--workers', type=int,
        help='Concurrent simulations; overrides [optimizer] workers.')

def config_parser_for_simulate(parser: ArgumentParser) -> None:
    """ Add command line arguments needed for simulate. """
    parser.add_argument('--v', type=float, help='Impact speed (Å/ps).')
    parser.add_argument('--r', type=float, help='Particle radius (Å).')
    parser.add_argument('--theta', type=float, help='Impact angle (degrees).')

def config_parser_for_measure(parser: ArgumentParser) -> None:
    """ Add command line arguments needed for measure. """
    parser.add_argument('dumps', help='Directory holding frame-*.dump files.')

def config_parser_for_optimize(parser: ArgumentParser) -> None:
    """ Add command line arguments needed for optimize. """
    parser.add_argument('-g', '--algorithm', choices=[a.value for a in Algorithm],
        help='Optimizer; overrides [optimizer] algorithm.')

def config_parser_for_surrogate_optimize(parser: ArgumentParser) -> None:
    """ Add command line arguments needed for surrogate-optimize. """
    config_parser_for_optimize(parser)
    parser.add_argument('--verify', action='store_true',
        help='Simulate the optimum once more (+1 t_p).')
    parser.add_argument('network', help='Network file written by train-surrogate.')

def create_parser() -> ArgumentParser:
    """ Parser with one subcommand per run mode. """

    parser = ArgumentParser(prog='coldloop',
        description='Cold-spray impact simulation and closed-loop optimization.')
    subparsers = parser.add_subparsers(dest='command', required=True)
    extras = {
        'simulate': config_parser_for_simulate,
        'measure': config_parser_for_measure,
        'optimize': config_parser_for_optimize,
        'surrogate-optimize': config_parser_for_surrogate_optimize,
    }
    for command in COMMANDS:
        subparser = subparsers.add_parser(command)
        config_parser_for_common(subparser)
        if command in extras:
            extras[command](subparser)
    return parser

def resolve_config(args: Namespace) -> RunConfig:
    """ Config file plus command line overrides. """

    config = load_config(args.config)
    try:
        if args.seed is not None:
            config.scene.seed = args.seed
        if args.out is not None:
            config.output.directory = args.out
        if args.audit:
            config.output.audit = True
        if args.workers is not None:
            config.optimizer.workers = args.workers
        if getattr(args, 'algorithm', None):
            config.optimizer.algorithm = Algorithm(args.algorithm)
    except ValidationError as ex:
        raise CliError(f'Invalid command line option: {ex.errors()[0]["msg"]}') from ex
    return config
