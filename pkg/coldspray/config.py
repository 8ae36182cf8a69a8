#!/usr/bin/env python3

""" This file contains the RunConfig class and its INI file reader and writer. """

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
from enum import Enum
import hashlib
import re
import typing
from typing import Any

# 3rd party imports
# pylint: disable=no-name-in-module
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

# Local imports
from .design import BoundPolicy, DesignBounds
from .error import ColdSprayError
from .util import format_float

CONFIG_HASH_LENGTH: int = 10

class Section(BaseModel):
    """ Base for config sections: unknown keys are errors. """
    model_config = ConfigDict(extra='forbid', validate_assignment=True)

class SceneConfig(Section):
    """ MD scene and run parameters. Defaults are desk scale. """

    substrate_size: tuple[float, float, float] = (80.0, 80.0, 30.0) # Å
    lattice_constant: float = Field(default=3.615, gt=0.0) # Å
    standoff: float = Field(default=40.0, gt=0.0) # Å
    temperature: float = Field(default=298.0, ge=0.0) # K
    dt: float = Field(default=0.001, gt=0.0) # ps
    equilibration_time: float = Field(default=1.0, ge=0.0) # ps
    post_contact_time: float = Field(default=10.0, gt=0.0) # ps
    snapshot_interval: float = Field(default=0.5, gt=0.0) # ps
    skin: float = Field(default=0.3, ge=0.0) # Å
    fixed_layers: int = Field(default=2, ge=0)
    divergence_factor: float = Field(default=10.0, gt=0.0)
    potential_file: str = ""
    seed: int = 0

class ImagingConfig(Section):
    """ Rendering and measurement parameters. """

    pixel_scale: float = Field(default=4.0, gt=0.0) # pixels per Å
    z_band: tuple[float, float] = (0.0, 10.0) # Å above the substrate surface
    layer_tolerance: float = Field(default=1.0, ge=0.0) # Å
    atom_draw_radius: float = Field(default=1.28, gt=0.0) # Å
    intensity_range: tuple[int, int] = (55, 255)
    threshold: int = Field(default=10, ge=0, le=255)
    min_component: int = Field(default=20, ge=0) # pixels
    stress_range: tuple[float, float] = (0.0, 2.0) # eV
    image_times: tuple[float, ...] = (0.0, 1.0, 1.5, 3.0, 6.0, 9.0) # ps

    @model_validator(mode="after")
    def check_ranges(self) -> "ImagingConfig":
        """ Bands and ranges must be ordered. """
        if not self.z_band[0] < self.z_band[1]:
            raise ValueError(f"z_band {self.z_band} must have z_min < z_max")
        if not 0 <= self.intensity_range[0] < self.intensity_range[1] <= 255:
            raise ValueError(f"intensity_range {self.intensity_range} must lie in 0-255")
        if not self.stress_range[0] < self.stress_range[1]:
            raise ValueError(f"stress_range {self.stress_range} is empty")
        return self

class ObjectiveModel(str, Enum):
    """ What produces objective values. """
    IMPACT = "impact"
    ANALYTIC = "analytic"

class ObjectiveConfig(Section):
    """ Objective bounds and failure handling. """

    model: ObjectiveModel = ObjectiveModel.IMPACT

    v: tuple[float, float] = (3.0, 12.0) # Å/ps
    r: tuple[float, float] = (10.0, 20.0) # Å
    theta: tuple[float, float] = (0.0, 30.0) # degrees
    bound_policy: BoundPolicy = BoundPolicy.CLAMP
    penalty: float = Field(default=10.0, gt=0.0)
    seeds_per_eval: int = Field(default=1, ge=1)
    design: tuple[float, float, float] = (8.0, 15.0, 0.0) # for simulate

    @property
    def bounds(self) -> DesignBounds:
        """ Bounds as a DesignBounds. """
        return DesignBounds(v=self.v, r=self.r, theta=self.theta)

    @model_validator(mode="after")
    def check_bounds(self) -> "ObjectiveConfig":
        """ Bounds must be non-empty. """
        _ = self.bounds
        return self

class Algorithm(str, Enum):
    """ Optimizer selection. """
    EGO = "ego"
    PSO = "pso"
    DE = "de"

class OptimizerConfig(Section):
    """ Optimizer selection, budgets, and hyperparameters. """

    algorithm: Algorithm = Algorithm.PSO
    workers: int = Field(default=1, ge=1)
    ego_init: int = Field(default=20, ge=5) # Kriging needs dims + 2 points
    ego_infill: int = Field(default=100, ge=0)
    ego_inner_population: int = Field(default=20, ge=4)
    ego_inner_generations: int = Field(default=100, ge=1)
    kriging_restarts: int = Field(default=10, ge=1)
    nugget: float = Field(default=1e-8, gt=0.0)
    particles: int = Field(default=20, ge=1)
    generations: int = Field(default=100, ge=1)
    inertia: float = 0.729
    cognitive: float = 1.49445
    social: float = 1.49445
    population: int = Field(default=20, ge=4)
    de_generations: int = Field(default=100, ge=1)
    de_f: float = Field(default=0.5, gt=0.0)
    de_cr: float = Field(default=0.9, ge=0.0, le=1.0)

class SurrogateConfig(Section):
    """ BPNN architecture, training hyperparameters, and sample counts. """

    layers: tuple[int, ...] = (3, 5, 5, 5, 1)
    learning_rate: float = Field(default=0.01, gt=0.0)
    momentum: float = Field(default=0.9, ge=0.0, lt=1.0)
    epochs: int = Field(default=1000, ge=1)
    val_fraction: float = Field(default=0.2, ge=0.0, lt=1.0)
    batch_size: int = Field(default=1, ge=1)
    init_scale: float = Field(default=0.5, gt=0.0)
    train_samples: int = Field(default=1000, ge=10)
    test_samples: int = Field(default=1000, ge=2)

    @model_validator(mode="after")
    def check_layers(self) -> "SurrogateConfig":
        """ Need an input and an output layer of positive size. """
        if len(self.layers) < 2 or min(self.layers) < 1:
            raise ValueError(f"layers {self.layers} needs at least two positive sizes")
        return self

class OutputConfig(Section):
    """ Where runs are written. """

    directory: str = "runs"
    audit: bool = False

class RunConfig(BaseModel):
    """ Every setting of a run, one attribute per INI section. """

    model_config = ConfigDict(extra='forbid')

    scene: SceneConfig = Field(default_factory=SceneConfig)
    imaging: ImagingConfig = Field(default_factory=ImagingConfig)
    objective: ObjectiveConfig = Field(default_factory=ObjectiveConfig)
    optimizer: OptimizerConfig = Field(default_factory=OptimizerConfig)
    surrogate: SurrogateConfig = Field(default_factory=SurrogateConfig)
    output: OutputConfig = Field(default_factory=OutputConfig)

SECTIONS: tuple[str, ...] = tuple(RunConfig.model_fields.keys())

def is_tuple_field(model: type[BaseModel], key: str) -> bool:
    """ True if the field holds a tuple. """
    annotation = model.model_fields[key].annotation
    return typing.get_origin(annotation) is tuple

def format_value(value: Any) -> str:
    """ Format a field value for the INI file. """
    if isinstance(value, Enum):
        return str(value.value)
    if isinstance(value, bool):
        return 'yes' if value else 'no'
    if isinstance(value, float):
        return format_float(value)
    if isinstance(value, tuple):
        return ', '.join(format_value(v) for v in value)
    return str(value)

def config_to_ini(config: RunConfig) -> str:
    """ Canonical INI text for config, every field written. """

    lines: list[str] = []
    for section in SECTIONS:
        lines.append(f'[{section}]')
        model: BaseModel = getattr(config, section)
        for key in type(model).model_fields:
            lines.append(f'{key} = {format_value(getattr(model, key))}')
        lines.append('')
    return '\n'.join(lines)

def config_hash(config: RunConfig) -> str:
    """ Short SHA-256 of the canonical INI text. """
    digest = hashlib.sha256(config_to_ini(config).encode('utf-8')).hexdigest()
    return digest[:CONFIG_HASH_LENGTH]

def find_line(text: str, section: str, key: str | None = None) -> int:
    """ 1-based line of a section header or of a key within it; 0 if not found. """

    in_section: bool = False
    key_pattern = re.compile(rf'^\s*{re.escape(key)}\s*[=:]', re.IGNORECASE) if key else None
    for (i, line) in enumerate(text.split('\n'), start=1):
        header = re.match(r'^\s*\[([^\]]+)\]', line)
        if header:
            in_section = header.group(1).strip() == section
            if in_section and key_pattern is None:
                return i
            continue
        if in_section and key_pattern is not None and key_pattern.match(line):
            return i
    return 0

def parse_ini(text: str, source: str = "config") -> RunConfig:
    """ Parse INI text into a RunConfig. Missing keys keep their defaults. """

    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(text, source=source)
    except configparser.Error as ex:
        raise ColdSprayError(f'{source}: {str(ex)}') from ex

    # Collect raw values section by section.
    raw: dict[str, dict[str, Any]] = {}
    for section in parser.sections():
        if section not in SECTIONS:
            raise ColdSprayError(f'{source} line {find_line(text, section)}: ' + \
                f'unknown section [{section}]. Expected one of {", ".join(SECTIONS)}.')
        model_type: type[BaseModel] = RunConfig.model_fields[section].annotation # type: ignore
        values: dict[str, Any] = {}
        for (key, value) in parser.items(section):
            if key not in model_type.model_fields:
                raise ColdSprayError(f'{source} line {find_line(text, section, key)}: ' + \
                    f'unknown key "{key}" in section [{section}].')
            if is_tuple_field(model_type, key):
                values[key] = tuple(part.strip() for part in value.split(',') if part.strip())
            else:
                values[key] = value.strip()
        raw[section] = values

    # Validate section by section so errors can name a line.
    sections: dict[str, BaseModel] = {}
    for section in SECTIONS:
        model_type = RunConfig.model_fields[section].annotation # type: ignore
        try:
            sections[section] = model_type.model_validate(raw.get(section, {}))
        except ValidationError as ex:
            error = ex.errors()[0]
            key = str(error['loc'][0]) if error['loc'] else None
            line_no = find_line(text, section, key) if key else find_line(text, section)
            raise ColdSprayError(f'{source} line {line_no}: [{section}] ' + \
                f'{key + ": " if key else ""}{error["msg"]}') from ex
    return RunConfig(**sections)

def load_config(filename: str | None) -> RunConfig:
    """ Load a config file, or defaults when filename is None. """

    if filename is None:
        return RunConfig()
    try:
        with open(filename, "r", encoding="utf-8") as config_file:
            text: str = config_file.read()
    except OSError as ex:
        raise ColdSprayError(f'Could not open {filename}.\n{str(ex)}') from ex
    return parse_ini(text, filename)

def save_config(config: RunConfig, filename: str) -> None:
    """ Write config in canonical INI form. """
    try:
        with open(filename, "w", encoding="utf-8") as config_file:
            config_file.write(config_to_ini(config))
    except OSError as ex:
        raise ColdSprayError(f'Could not write {filename}.\n{str(ex)}') from ex
