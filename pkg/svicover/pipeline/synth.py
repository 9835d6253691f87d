"""
A seeded generator of synthetic cities: a lattice of street blocks lined
with rectangular buildings, and SVI locations along the streets.
"""

from __future__ import annotations

import dataclasses
import logging
import math
from collections.abc import Mapping
from dataclasses import dataclass
from typing import Any
from typing import Final

import numpy as np

from svicover.common.constants import RESIDENTIAL
from svicover.common.error import ConfigError
from svicover.common.validation import validate_non_negative
from svicover.common.validation import validate_positive
from svicover.common.validation import validate_ratio
from svicover.geometry.primitives import Footprint
from svicover.geometry.primitives import Point2
from svicover.geometry.primitives import Road
from svicover.geometry.primitives import bearing
from svicover.interval.resample import road_offsets
from svicover.isovist.engine import SviPoint
from svicover.pipeline.scene import Scene


logger = logging.getLogger(__name__)

# Building types drawn for synthetic footprints, with their weights.
TYPE_WEIGHTS: Final = (
    (RESIDENTIAL, 0.6),
    ("Mixed Use", 0.1),
    ("Retail", 0.12),
    ("Industry and Business", 0.1),
    ("Community Services", 0.08),
)


@dataclass(frozen=True)
class SynthConfig:
    """
    Parameters of a synthetic city.

    Attributes
    ----------
    seed : int, default 42
        The random seed.
    block_rows, block_cols : int, default 4
        The number of street blocks along y and x.
    block_size : float, default 100
        The edge of a square block in meters.
    building_density : float, default 0.6
        The probability that a building lot is built.
    road_width : float, default 12
        The street corridor width in meters; roads run on its centerline.
    building_size_range : tuple[float, float], default (8, 20)
        The range of building edge lengths in meters.
    setback : float, default 2
        The minimum gap between a building and its lot boundary in meters.
    svi_spacing : float, default 10
        The distance between SVI locations along a road in meters.
    core_density_boost : float, default 1
        The factor applied to the density of the central blocks.
    core_fraction : float, default 0.5
        The share of the city extent, around its center, counted as core.

    Raises
    ------
    ValueError
        If a parameter is invalid, including a city without blocks.

    """

    seed: int = 42
    block_rows: int = 4
    block_cols: int = 4
    block_size: float = 100.0
    building_density: float = 0.6
    road_width: float = 12.0
    building_size_range: tuple[float, float] = (8.0, 20.0)
    setback: float = 2.0
    svi_spacing: float = 10.0
    core_density_boost: float = 1.0
    core_fraction: float = 0.5

    def __post_init__(self) -> None:
        if self.block_rows < 1 or self.block_cols < 1:
            raise ValueError(
                f"A city needs at least one block, was {self.block_rows}x{self.block_cols}.",
            )
        validate_positive(self.block_size, "block_size")
        validate_ratio(self.building_density, "building_density")
        validate_positive(self.road_width, "road_width")
        low, high = (float(v) for v in self.building_size_range)
        validate_positive(low, "building_size_range")
        if high < low:
            raise ValueError(f"The `building_size_range` must be ascending, was {(low, high)}.")
        object.__setattr__(self, "building_size_range", (low, high))
        validate_non_negative(self.setback, "setback")
        if high + 2 * self.setback > self.block_size:
            raise ValueError("Buildings with their setback must fit inside a block.")
        validate_positive(self.svi_spacing, "svi_spacing")
        validate_positive(self.core_density_boost, "core_density_boost")
        validate_ratio(self.core_fraction, "core_fraction")

    @property
    def pitch(self) -> float:
        return self.block_size + self.road_width

    @classmethod
    def from_mapping(cls, values: Mapping[str, Any]) -> SynthConfig:
        """
        Build a configuration from the `[synth]` section of an analysis
        configuration.

        Raises
        ------
        ConfigError
            If a key is unknown or a value is invalid.

        """
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(values) - known)
        if unknown:
            raise ConfigError(f"Unknown keys in `[synth]`: {unknown}.")
        kwargs = {k: tuple(v) if isinstance(v, list) else v for k, v in values.items()}
        try:
            return cls(**kwargs)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"Invalid `[synth]` section: {exc}") from exc


def _roads(config: SynthConfig) -> list[Road]:
    width = config.block_cols * config.pitch
    height = config.block_rows * config.pitch
    roads = [
        Road.from_coords(f"road-h{k}", [(0.0, k * config.pitch), (width, k * config.pitch)])
        for k in range(config.block_rows + 1)
    ]
    roads.extend(
        Road.from_coords(f"road-v{k}", [(k * config.pitch, 0.0), (k * config.pitch, height)])
        for k in range(config.block_cols + 1)
    )
    return roads


def _svi_points(roads: list[Road], spacing: float) -> list[SviPoint]:
    points = []
    seen: set[tuple[float, float]] = set()
    for road in roads:
        start, end = road.vertices[0], road.vertices[-1]
        heading = bearing(start, end)
        ux = (end.x - start.x) / road.length
        uy = (end.y - start.y) / road.length
        for offset in road_offsets(road.length, spacing).tolist():
            xy = (round(start.x + ux * offset, 6), round(start.y + uy * offset, 6))
            if xy in seen:
                continue
            seen.add(xy)
            points.append(
                SviPoint(id=f"svi-{len(points):06d}", position=Point2(*xy), heading=heading),
            )
    return points


def _is_core(config: SynthConfig, row: int, col: int) -> bool:
    # block centers in units of the city extent, relative to the city center
    u = (col + 0.5) / config.block_cols - 0.5
    v = (row + 0.5) / config.block_rows - 0.5
    return max(abs(u), abs(v)) < config.core_fraction / 2.0


def _block_buildings(
    config: SynthConfig,
    rng: np.random.Generator,
    row: int,
    col: int,
    counter: int,
) -> list[Footprint]:
    low, high = config.building_size_range
    lot = high + 2.0 * config.setback
    lots = int(config.block_size // lot)
    density = config.building_density
    if config.core_density_boost != 1.0 and _is_core(config, row, col):
        density = min(1.0, density * config.core_density_boost)
    x0 = col * config.pitch + config.road_width / 2.0
    y0 = row * config.pitch + config.road_width / 2.0
    names = [name for name, _ in TYPE_WEIGHTS]
    weights = np.array([w for _, w in TYPE_WEIGHTS])
    weights = weights / weights.sum()

    footprints = []
    for i in range(lots):
        for j in range(lots):
            # every lot draws the same number of values, built or not
            built = rng.random() < density
            w, h = rng.uniform(low, high, size=2)
            jx, jy = rng.random(2)
            type_label = names[int(rng.choice(len(names), p=weights))]
            if not built:
                continue
            lx = x0 + i * lot + config.setback + jx * (high - w)
            ly = y0 + j * lot + config.setback + jy * (high - h)
            footprints.append(
                Footprint.from_coords(
                    f"b-{counter + len(footprints):06d}",
                    [(lx, ly), (lx + w, ly), (lx + w, ly + h), (lx, ly + h)],
                    type_label,
                ),
            )
    return footprints


def generate_city(config: SynthConfig) -> Scene:
    """
    Generate a synthetic city.

    Roads run along every block boundary. Each block is divided into square
    lots; a lot is built with probability `building_density`, raised by
    `core_density_boost` in the central blocks, and holds one rectangle of
    random size and position. SVI locations lie on the roads every
    `svi_spacing` meters, heading along the road.

    Parameters
    ----------
    config : SynthConfig
        The city parameters.

    Returns
    -------
    Scene
        The same scene for the same configuration.

    """
    rng = np.random.default_rng(config.seed)
    roads = _roads(config)
    footprints: list[Footprint] = []
    for row in range(config.block_rows):
        for col in range(config.block_cols):
            footprints.extend(_block_buildings(config, rng, row, col, len(footprints)))
    svis = _svi_points(roads, config.svi_spacing)
    logger.info(
        "generated %d buildings, %d roads and %d SVI points (seed %d)",
        len(footprints),
        len(roads),
        len(svis),
        config.seed,
    )
    return Scene(
        footprints=tuple(footprints),
        roads=tuple(roads),
        svi_points=tuple(svis),
        crs_note=f"synthetic planar meters, seed {config.seed}",
    )


def core_block_counts(scene: Scene, config: SynthConfig) -> tuple[float, float]:
    """
    Return the mean building count of core and of peripheral blocks.
    """
    core: list[int] = []
    periphery: list[int] = []
    counts: dict[tuple[int, int], int] = {}
    for fp in scene.footprints:
        center = fp.centroid
        key = (int(center.y // config.pitch), int(center.x // config.pitch))
        counts[key] = counts.get(key, 0) + 1
    for row in range(config.block_rows):
        for col in range(config.block_cols):
            target = core if _is_core(config, row, col) else periphery
            target.append(counts.get((row, col), 0))
    return (
        math.fsum(core) / len(core) if core else math.nan,
        math.fsum(periphery) / len(periphery) if periphery else math.nan,
    )
