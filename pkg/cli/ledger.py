#!/usr/bin/env python3

""" Per-run budget ledger in t_p units. """

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
import json
import os
import time

# 3rd party imports
# pylint: disable=no-name-in-module
from pydantic import BaseModel, Field, ValidationError, computed_field

# Local imports
from .error import CliError

LEDGER_FILENAME: str = 'ledger.json'
TIMING_FILENAME: str = 'timing.json'

class RunLedger(BaseModel):
    """ Simulation counts of one run, split by phase.

    modeling_tp counts surrogate training samples and optimization_tp counts
    simulations requested by an optimizer; their sum is total_tp. Other
    simulations (test samples, verification, standalone runs) are kept out of
    the total. Wall-clock seconds per phase go to a separate file so the
    ledger stays identical across reruns.
    """

    command: str
    method: str = ""
    config_hash: str = ""
    seed: int = 0
    modeling_tp: int = 0
    optimization_tp: int = 0
    testing_tp: int = 0
    verification_tp: int = 0
    standalone_tp: int = 0
    network_source: str = ""
    wall_clock: dict[str, float] = Field(default_factory=dict, exclude=True)

    @computed_field # type: ignore[misc]
    @property
    def total_tp(self) -> int:
        """ modeling_tp + optimization_tp. """
        return self.modeling_tp + self.optimization_tp

class PhaseTimer:
    """ Context manager adding elapsed seconds to ledger.wall_clock[phase]. """

    def __init__(self, ledger: RunLedger, phase: str):
        self.ledger = ledger
        self.phase = phase
        self.start: float = 0.0

    def __enter__(self) -> "PhaseTimer":
        self.start = time.perf_counter()
        return self

    def __exit__(self, *_) -> None:
        elapsed = time.perf_counter() - self.start
        self.ledger.wall_clock[self.phase] = self.ledger.wall_clock.get(self.phase, 0.0) + elapsed

def write_ledger(ledger: RunLedger, run_dir: str) -> None:
    """ Write ledger.json and timing.json into run_dir. """
    try:
        with open(os.path.join(run_dir, LEDGER_FILENAME), "w", encoding="utf-8") as ledger_file:
            ledger_file.write(ledger.model_dump_json(indent=2) + '\n')
        with open(os.path.join(run_dir, TIMING_FILENAME), "w", encoding="utf-8") as timing_file:
            json.dump(ledger.wall_clock, timing_file, indent=2, sort_keys=True)
            timing_file.write('\n')
    except OSError as ex:
        raise CliError(f'Unable to write ledger in {run_dir}.\n{str(ex)}') from ex

def read_ledger(run_dir: str) -> RunLedger:
    """ Read ledger.json, and timing.json when present. """

    filename = os.path.join(run_dir, LEDGER_FILENAME)
    try:
        with open(filename, "r", encoding="utf-8") as ledger_file:
            data = json.load(ledger_file)
        data.pop('total_tp', None)
        ledger = RunLedger.model_validate(data)
    except OSError as ex:
        raise CliError(f'Unable to read {filename}.\n{str(ex)}') from ex
    except (ValueError, ValidationError) as ex:
        raise CliError(f'{filename} is not a run ledger.\n{str(ex)}') from ex

    # Timing is optional.
    timing_filename = os.path.join(run_dir, TIMING_FILENAME)
    if os.path.exists(timing_filename):
        try:
            with open(timing_filename, "r", encoding="utf-8") as timing_file:
                ledger.wall_clock = {str(k): float(v) for (k, v) in json.load(timing_file).items()}
        except (OSError, ValueError, AttributeError) as ex:
            raise CliError(f'Unable to read {timing_filename}.\n{str(ex)}') from ex
    return ledger
