#!/usr/bin/env python3

""" Aggregate run directories into optimum and cost tables. """

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
from dataclasses import dataclass
import os

# 3rd party imports
from tabulate import tabulate

# Local imports
from .error import CliError
from .ledger import LEDGER_FILENAME, RunLedger, read_ledger

SUMMARY_FILENAME: str = 'summary.ini'
VERIFICATION_FILENAME: str = 'verification.ini'
REPORT_FILENAME: str = 'report.txt'
COST_COMMANDS: tuple[str, ...] = ('optimize', 'train-surrogate', 'surrogate-optimize')

@dataclass
class RunRecord:
    """ What a run directory holds. """
    name: str
    ledger: RunLedger
    summary: dict[str, str]
    verification: dict[str, str]

def read_section(filename: str, section: str) -> dict[str, str]:
    """ One INI section as a dict; empty if the file is absent. """
    if not os.path.exists(filename):
        return {}
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read(filename, encoding="utf-8")
        return dict(parser[section]) if parser.has_section(section) else {}
    except (OSError, configparser.Error) as ex:
        raise CliError(f'Unable to read {filename}.\n{str(ex)}') from ex

def collect_runs(directory: str) -> list[RunRecord]:
    """ Every run directory under directory, in name order. """
    if not os.path.isdir(directory):
        raise CliError(f'Output directory {directory} does not exist.')
    records: list[RunRecord] = []
    for name in sorted(os.listdir(directory)):
        run_dir = os.path.join(directory, name)
        if not os.path.isfile(os.path.join(run_dir, LEDGER_FILENAME)):
            continue
        records.append(RunRecord(
            name = name,
            ledger = read_ledger(run_dir),
            summary = read_section(os.path.join(run_dir, SUMMARY_FILENAME), 'summary'),
            verification = read_section(os.path.join(run_dir, VERIFICATION_FILENAME),
                'verification')))
    return records

def format_cost(tp: int) -> str:
    """ Cost in t_p, or a dash for none. """
    return f'{tp} t_p' if tp else '-'

def format_number(value: str, digits: int) -> str:
    """ Round a stored float for display. """
    try:
        return f'{float(value):.{digits}f}'
    except ValueError:
        return value

def optimum_table(records: list[RunRecord], command: str) -> str:
    """ Optimal design and objective of every run of command. """
    rows = []
    for record in records:
        if record.ledger.command != command or not record.summary:
            continue
        row = [record.ledger.method] + \
            [format_number(record.summary.get(name, ''), 3) for name in ('v', 'r', 'theta')] + \
            [format_number(record.summary.get('c', ''), 5)]
        if command == 'surrogate-optimize':
            row.append(format_number(record.verification.get('simulated_c', '-'), 5))
        row.append(record.name)
        rows.append(row)
    headers = ['Method', 'v (Å/ps)', 'r (Å)', 'theta (°)', 'c']
    if command == 'surrogate-optimize':
        headers.append('Simulated c')
    return tabulate(rows, headers=headers + ['Run'])

def cost_table(records: list[RunRecord]) -> str:
    """ Modeling, optimization, and total t_p of every costed run. """
    rows = [[r.ledger.method, format_cost(r.ledger.modeling_tp),
        format_cost(r.ledger.optimization_tp), format_cost(r.ledger.total_tp), r.name]
        for r in records if r.ledger.command in COST_COMMANDS]
    return tabulate(rows, headers=['Method', 'Modeling cost', 'Optimization cost',
        'Total', 'Run'])

def build_report(directory: str) -> str:
    """ Report text for every run under directory. """
    records = collect_runs(directory)
    if not records:
        raise CliError(f'No runs found in {directory}.')
    sections = [
        ('Optimal solutions of classic optimization', optimum_table(records, 'optimize')),
        ('Optimal solutions of BPNN-assisted optimization',
            optimum_table(records, 'surrogate-optimize')),
        ('Computational cost', cost_table(records)),
    ]
    return '\n\n'.join(f'{title}\n\n{table}' for (title, table) in sections) + '\n'

def write_report(directory: str) -> str:
    """ Build the report and write it to report.txt in directory. """
    text = build_report(directory)
    filename = os.path.join(directory, REPORT_FILENAME)
    try:
        with open(filename, "w", encoding="utf-8") as report_file:
            report_file.write(text)
    except OSError as ex:
        raise CliError(f'Unable to write {filename}.\n{str(ex)}') from ex
    return text
