#!/usr/bin/env python3

""" This file contains the top-view renderer and the splat measurement pipeline. """

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
import os
from typing import Sequence

# 3rd party imports
import numpy as np
from PIL import Image
from scipy import ndimage

# Local imports
from .config import ImagingConfig
from .design import DesignPoint
from .dump import Snapshot
from .error import ColdSprayError
from .lattice import Group
from .util import ensure_dir

MEASUREMENT_CSV_HEADER: str = 'design_v,design_r,design_theta,S_i,S_m,mu,c,frame_of_max'
FOREGROUND: int = 255
MAX_MEDIAN_PASSES: int = 200
EIGHT_CONNECTED = np.ones((3, 3), dtype=bool)

# Audit stage suffixes, in pipeline order.
AUDIT_STAGES: tuple[str, ...] = ('render', 'difference', 'binary', 'denoised', 'splat')

@dataclass
class RasterImage:
    """ Grayscale image of the x-y plane. Row index follows y, column index follows x. """

    pixels: np.ndarray
    pixel_scale: float
    origin: tuple[float, float] = (0.0, 0.0)

    @property
    def width(self) -> int:
        return int(self.pixels.shape[1])

    @property
    def height(self) -> int:
        return int(self.pixels.shape[0])

    def with_pixels(self, pixels: np.ndarray) -> "RasterImage":
        """ Same geometry, new pixels. """
        return RasterImage(pixels.astype(np.uint8), self.pixel_scale, self.origin)

    def foreground_count(self) -> int:
        """ Number of non-zero pixels. """
        return int(np.count_nonzero(self.pixels))

def blank_image(box_lengths: Sequence[float], pixel_scale: float) -> RasterImage:
    """ All-background image covering the box in x and y. """
    if pixel_scale <= 0.0:
        raise ColdSprayError(f'Pixel scale must be positive, got {pixel_scale}')
    width = math.ceil(box_lengths[0] * pixel_scale)
    height = math.ceil(box_lengths[1] * pixel_scale)
    return RasterImage(np.zeros((height, width), dtype=np.uint8), pixel_scale)

@dataclass
class RenderRule:
    """ Which atoms are drawn and how. The z band is relative to surface. """

    z_band: tuple[float, float]
    atom_draw_radius: float
    pixel_scale: float
    surface: float = 0.0
    intensity_range: tuple[int, int] = (55, 255)

    def __post_init__(self) -> None:
        if not self.z_band[0] < self.z_band[1]:
            raise ColdSprayError(f'Render band {self.z_band} must have z_min < z_max')

    @property
    def absolute_band(self) -> tuple[float, float]:
        """ Band in box coordinates, Å. """
        return (self.surface + self.z_band[0], self.surface + self.z_band[1])

    def intensity(self, z: np.ndarray) -> np.ndarray:
        """ Linear z to intensity within the band. """
        (z_min, z_max) = self.absolute_band
        (low, high) = self.intensity_range
        fraction = np.clip((z - z_min) / (z_max - z_min), 0.0, 1.0)
        return np.rint(low + (high - low) * fraction)

def rasterize(image: RasterImage, xy: np.ndarray, depth: np.ndarray, ids: np.ndarray,
    values: np.ndarray, radius: float) -> RasterImage:
    """ Paint filled discs in increasing depth order, later discs on top.

    A pixel is covered when its center lies within radius of the atom. Ties in
    depth are painted in id order.
    """

    count: int = len(xy)
    if count == 0:
        return image.with_pixels(np.zeros_like(image.pixels))
    scale = image.pixel_scale
    (height, width) = image.pixels.shape
    reach = int(math.ceil(radius * scale)) + 1
    offsets = np.arange(-reach, reach + 1)

    # Candidate pixels around each atom.
    col0 = np.floor((xy[:, 0] - image.origin[0]) * scale).astype(np.int64)
    row0 = np.floor((xy[:, 1] - image.origin[1]) * scale).astype(np.int64)
    cols = col0[:, None, None] + offsets[None, None, :]
    rows = row0[:, None, None] + offsets[None, :, None]
    dx = image.origin[0] + (cols + 0.5) / scale - xy[:, 0, None, None]
    dy = image.origin[1] + (rows + 0.5) / scale - xy[:, 1, None, None]
    inside = (dx * dx + dy * dy <= radius * radius) & \
        (cols >= 0) & (cols < width) & (rows >= 0) & (rows < height)

    # Painter's order as a rank; the highest rank covering a pixel wins.
    order = np.lexsort((ids, depth))
    rank = np.empty(count, dtype=np.int64)
    rank[order] = np.arange(count)
    ranks = np.broadcast_to(rank[:, None, None], inside.shape)
    flat = (rows * width + cols)
    top = np.full(height * width, -1, dtype=np.int64)
    np.maximum.at(top, flat[inside], ranks[inside])

    pixels = np.zeros(height * width, dtype=np.uint8)
    painted = top >= 0
    pixels[painted] = np.clip(values[order[top[painted]]], 0, 255).astype(np.uint8)
    return image.with_pixels(pixels.reshape(height, width))

def band_selection(snapshot: Snapshot, rule: RenderRule,
    groups: Sequence[Group] | None) -> np.ndarray:
    """ Mask of atoms in the band and in the selected groups. """
    (z_min, z_max) = rule.absolute_band
    z = snapshot.positions[:, 2]
    mask = (z >= z_min) & (z <= z_max)
    if groups is not None:
        mask &= np.isin(snapshot.groups, [int(g) for g in groups])
    return mask

def render_topview(snapshot: Snapshot, rule: RenderRule,
    groups: Sequence[Group] | None = None) -> RasterImage:
    """ Orthographic top view of in-band atoms, intensity by height. """
    image = blank_image(snapshot.box_lengths, rule.pixel_scale)
    mask = band_selection(snapshot, rule, groups)
    z = snapshot.positions[mask, 2]
    return rasterize(image, snapshot.positions[mask, :2], z, snapshot.ids[mask],
        rule.intensity(z), rule.atom_draw_radius)

def render_stress(snapshot: Snapshot, rule: RenderRule, stress_range: tuple[float, float],
    groups: Sequence[Group] | None = None) -> RasterImage:
    """ Top view of in-band atoms with intensity by Von Mises stress over stress_range. """
    image = blank_image(snapshot.box_lengths, rule.pixel_scale)
    mask = band_selection(snapshot, rule, groups)
    (low, high) = rule.intensity_range
    fraction = np.clip((snapshot.von_mises[mask] - stress_range[0]) /
        (stress_range[1] - stress_range[0]), 0.0, 1.0)
    return rasterize(image, snapshot.positions[mask, :2], snapshot.positions[mask, 2],
        snapshot.ids[mask], np.rint(low + (high - low) * fraction), rule.atom_draw_radius)

def image_difference(frame: RasterImage, background: RasterImage) -> RasterImage:
    """ Per-pixel absolute difference. """
    if frame.pixels.shape != background.pixels.shape or \
        frame.pixel_scale != background.pixel_scale:
        raise ColdSprayError(f'Cannot difference a {frame.width}x{frame.height} image at ' + \
            f'{frame.pixel_scale} px/Å with a {background.width}x{background.height} image ' + \
            f'at {background.pixel_scale} px/Å.')
    difference = np.abs(frame.pixels.astype(np.int16) - background.pixels.astype(np.int16))
    return frame.with_pixels(difference)

def to_binary(image: RasterImage, threshold: int) -> RasterImage:
    """ Pixels at or above threshold become 255, the rest 0. """
    if not 0 <= threshold <= 255:
        raise ColdSprayError(f'Threshold must lie in 0-255, got {threshold}')
    return image.with_pixels(np.where(image.pixels >= threshold, FOREGROUND, 0))

def reverse_phase(image: RasterImage) -> RasterImage:
    """ 255 - I. For display only. """
    return image.with_pixels(255 - image.pixels)

def median_root(mask: np.ndarray) -> np.ndarray:
    """ Apply the 3x3 median filter until the image stops changing.

    A two-step oscillation is broken by keeping only pixels set in both
    states.
    """

    previous: np.ndarray | None = None
    current = mask.astype(bool)
    for _ in range(MAX_MEDIAN_PASSES):
        filtered = ndimage.median_filter(current.astype(np.uint8), size=3, mode='constant',
            cval=0) > 0
        if np.array_equal(filtered, current):
            return current
        if previous is not None and np.array_equal(filtered, previous):
            filtered = filtered & current
        (previous, current) = (current, filtered)
    logging.warning("Median filter did not settle after %d passes", MAX_MEDIAN_PASSES)
    return current

def remove_small_components(mask: np.ndarray, min_area: int) -> np.ndarray:
    """ Drop 8-connected components with fewer than min_area pixels. """
    (labels, count) = ndimage.label(mask, structure=EIGHT_CONNECTED)
    if count == 0:
        return mask
    sizes = np.bincount(labels.ravel())
    keep = sizes >= min_area
    keep[0] = False
    return keep[labels]

def denoise(image: RasterImage, min_component: int = 20) -> RasterImage:
    """ Median filtering to a fixed point, then small-component removal. """
    mask = image.pixels > 0
    for _ in range(MAX_MEDIAN_PASSES):
        cleaned = remove_small_components(median_root(mask), min_component)
        if np.array_equal(cleaned, mask):
            break
        mask = cleaned
    return image.with_pixels(np.where(mask, FOREGROUND, 0))

def largest_component_area(image: RasterImage) -> tuple[int, tuple[float, float]]:
    """ Pixel count and (row, col) centroid of the largest 8-connected component. """
    (labels, count) = ndimage.label(image.pixels > 0, structure=EIGHT_CONNECTED)
    if count == 0:
        return (0, (0.0, 0.0))
    sizes = np.bincount(labels.ravel())
    sizes[0] = 0
    largest = int(np.argmax(sizes))
    (row, col) = ndimage.center_of_mass(labels == largest)
    return (int(sizes[largest]), (float(row), float(col)))

def largest_component_mask(image: RasterImage) -> RasterImage:
    """ Image holding only the largest component. """
    (labels, count) = ndimage.label(image.pixels > 0, structure=EIGHT_CONNECTED)
    if count == 0:
        return image.with_pixels(np.zeros_like(image.pixels))
    sizes = np.bincount(labels.ravel())
    sizes[0] = 0
    return image.with_pixels(np.where(labels == int(np.argmax(sizes)), FOREGROUND, 0))

def save_png(image: RasterImage, filename: str) -> None:
    """ Write an 8-bit grayscale PNG with y increasing upward. """
    try:
        Image.fromarray(np.flipud(image.pixels).copy()).save(filename, format='PNG')
    except OSError as ex:
        raise ColdSprayError(f'Unable to write image {filename}: {str(ex)}') from ex

def load_png(filename: str, pixel_scale: float) -> RasterImage:
    """ Read a PNG written by save_png. """
    try:
        with Image.open(filename) as png:
            pixels = np.flipud(np.asarray(png.convert('L'), dtype=np.uint8)).copy()
    except OSError as ex:
        raise ColdSprayError(f'Unable to read image {filename}: {str(ex)}') from ex
    return RasterImage(pixels, pixel_scale)

def estimate_surface(background: Snapshot, tolerance: float) -> float:
    """ Median height of the topmost substrate layer. """
    substrate = np.isin(background.groups, [int(Group.SUBSTRATE), int(Group.FIXED_WALL)])
    if not substrate.any():
        raise ColdSprayError('Background frame has no substrate atoms.')
    z = background.positions[substrate, 2]
    top_layer = z[z >= z.max() - max(tolerance, 1e-6)]
    return float(np.median(top_layer))

@dataclass
class FrameMeasurement:
    """ Splat area candidate of one post-contact frame. """
    time: float
    area: int
    centroid: tuple[float, float]

@dataclass
class MeasurementResult:
    """ Pre-impact area S_i, maximum splat area S_m (pixels), and mu = S_m / S_i. """

    S_i: int
    S_m: int
    mu: float
    frame_of_max: float
    frames: list[FrameMeasurement] = field(default_factory=list)

def splat_rule(config: ImagingConfig, surface: float) -> RenderRule:
    """ Render rule for splat frames; the band starts layer_tolerance below the surface. """
    return RenderRule(
        z_band = (config.z_band[0] - config.layer_tolerance, config.z_band[1]),
        atom_draw_radius = config.atom_draw_radius,
        pixel_scale = config.pixel_scale,
        surface = surface,
        intensity_range = config.intensity_range)

def particle_rule(config: ImagingConfig, frame: Snapshot) -> RenderRule:
    """ Render rule whose band spans the whole particle. """
    z = frame.positions[frame.groups == int(Group.PARTICLE), 2]
    if len(z) == 0:
        raise ColdSprayError('Pre-impact frame has no particle atoms.')
    margin = config.atom_draw_radius
    return RenderRule(
        z_band = (float(z.min()) - margin, float(z.max()) + margin),
        atom_draw_radius = config.atom_draw_radius,
        pixel_scale = config.pixel_scale,
        surface = 0.0,
        intensity_range = config.intensity_range)

def particle_gap(frame: Snapshot, surface: float) -> float:
    """ Height of the particle's lowest atom above the surface. """
    z = frame.positions[frame.groups == int(Group.PARTICLE), 2]
    return float(z.min()) - surface if len(z) else math.inf

def particle_area(config: ImagingConfig, frame: Snapshot) -> int:
    """ Largest-component area of the particle-only render of frame. """
    image = render_topview(frame, particle_rule(config, frame), [Group.PARTICLE])
    (area, _) = largest_component_area(to_binary(image, 1))
    return area

def write_audit(directory: str, prefix: str, images: Sequence[RasterImage]) -> None:
    """ Write stage images with stage-suffixed names. """
    for (stage, image) in zip(AUDIT_STAGES, images):
        save_png(image, os.path.join(directory, f'{prefix}-{stage}.png'))

def measure_flattening(frames: Sequence[Snapshot], config: ImagingConfig,
    contact_distance: float, audit_dir: str | None = None) -> MeasurementResult:
    """ Measure S_i on the first frame and S_m over post-contact frames.

    The first frame is the pre-impact frame. S_i is the largest component of
    its particle-only render. Every later frame whose particle is within
    contact_distance of the surface goes through render, difference against
    the substrate-only first frame, binarize, denoise, and largest component.
    A particle that never reaches the surface is measured on the last frame
    the same way as S_i, so an undisturbed particle gives mu = 1.
    """

    if not frames:
        raise ColdSprayError('No frames to measure.')
    pre_impact = frames[0]
    surface = estimate_surface(pre_impact, config.layer_tolerance)
    if particle_gap(pre_impact, surface) <= contact_distance:
        raise ColdSprayError('First frame is not pre-impact: the particle is already within ' + \
            f'{contact_distance} Å of the surface.')
    if audit_dir is not None:
        ensure_dir(audit_dir)

    # Pre-impact cross-section.
    particle_image = render_topview(pre_impact, particle_rule(config, pre_impact),
        [Group.PARTICLE])
    (s_i, _) = largest_component_area(to_binary(particle_image, 1))
    if s_i == 0:
        raise ColdSprayError('Particle is invisible in the pre-impact render; ' + \
            'check the draw radius and pixel scale.')

    # Background and splat candidates.
    rule = splat_rule(config, surface)
    background = render_topview(pre_impact, rule, [Group.SUBSTRATE, Group.FIXED_WALL])
    if audit_dir is not None:
        save_png(particle_image, os.path.join(audit_dir, 'pre-impact-particle.png'))
        save_png(background, os.path.join(audit_dir, 'background.png'))

    measurements: list[FrameMeasurement] = []
    for (index, frame) in enumerate(frames):
        if particle_gap(frame, surface) > contact_distance:
            continue
        render = render_topview(frame, rule)
        difference = image_difference(render, background)
        binary = to_binary(difference, config.threshold)
        cleaned = denoise(binary, config.min_component)
        (area, centroid) = largest_component_area(cleaned)
        measurements.append(FrameMeasurement(frame.time, area, centroid))
        if audit_dir is not None:
            write_audit(audit_dir, f'frame-{index:05d}',
                [render, difference, binary, cleaned, largest_component_mask(cleaned)])
        logging.debug("Frame t = %.2f ps: splat area %d px", frame.time, area)

    if measurements:
        best = max(measurements, key=lambda m: (m.area, -m.time))
        (s_m, frame_of_max) = (best.area, best.time)
    else:
        logging.info("Particle never reached the surface; measuring its last frame")
        (s_m, frame_of_max) = (particle_area(config, frames[-1]), frames[-1].time)
    result = MeasurementResult(S_i=s_i, S_m=s_m, mu=s_m / s_i, frame_of_max=frame_of_max,
        frames=measurements)
    logging.info("Measured S_i = %d px, S_m = %d px, mu = %.4f over %d frames",
        s_i, s_m, result.mu, len(measurements))
    return result

def append_measurement_csv(filename: str, design: DesignPoint | None,
    result: MeasurementResult, c: float) -> None:
    """ Append one measurement row, writing the header for a new file. """
    design_fields = [repr(design.v), repr(design.r), repr(design.theta)] if design \
        else ['', '', '']
    row = ','.join(design_fields + [str(result.S_i), str(result.S_m), repr(result.mu),
        repr(c), repr(result.frame_of_max)])
    try:
        new_file = not os.path.exists(filename)
        with open(filename, "a", encoding="utf-8") as csv_file:
            if new_file:
                csv_file.write(MEASUREMENT_CSV_HEADER + '\n')
            csv_file.write(row + '\n')
    except OSError as ex:
        raise ColdSprayError(f'Unable to write {filename}: {str(ex)}') from ex
