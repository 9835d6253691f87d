"""
Line-of-sight resolution over a whole scene, optionally split into coarse
hexagonal partitions processed by a pool of worker processes.
"""

from __future__ import annotations

import concurrent.futures
import logging
from collections.abc import Mapping
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
import shapely

from svicover.common.config import AnalysisConfig
from svicover.common.config import SegmentationConfig
from svicover.common.enums import LevelTag
from svicover.geometry.primitives import FacadeSample
from svicover.geometry.primitives import Footprint
from svicover.geometry.primitives import Point2
from svicover.geometry.primitives import sample_boundary
from svicover.isovist.engine import SightLine
from svicover.isovist.engine import SviPoint
from svicover.isovist.engine import compute_sightlines_batch
from svicover.isovist.index import SceneIndex
from svicover.isovist.index import build_index
from svicover.pipeline.scene import Scene
from svicover.segmentation.filter import SegmentationBins
from svicover.segmentation.filter import apply_filter
from svicover.stats.hexgrid import CellId
from svicover.stats.hexgrid import HexGrid


logger = logging.getLogger(__name__)


def sample_footprints(footprints: Sequence[Footprint], spacing: float) -> list[FacadeSample]:
    samples: list[FacadeSample] = []
    for fp in footprints:
        samples.extend(sample_boundary(fp, spacing))
    return samples


@dataclass(frozen=True)
class PreparedScene:
    """
    The footprints of a scene with their facade samples and spatial index,
    ready to resolve lines of sight from any set of SVI locations.
    """

    footprints: tuple[Footprint, ...]
    samples: tuple[FacadeSample, ...]
    index: SceneIndex

    @classmethod
    def build(
        cls,
        footprints: Sequence[Footprint],
        spacing: float,
        cell_size: float,
    ) -> PreparedScene:
        samples = sample_footprints(footprints, spacing)
        return cls(tuple(footprints), tuple(samples), build_index(footprints, samples, cell_size))

    def sightlines(
        self,
        svis: Sequence[SviPoint],
        radius: float,
        eps: float,
        bins: Mapping[str, SegmentationBins] | None = None,
        segmentation: SegmentationConfig | None = None,
    ) -> list[SightLine]:
        """
        Resolve and, when bins are given, filter the lines of sight from
        `svis`, sorted by key.
        """
        lines = compute_sightlines_batch(self.index, svis, radius, eps)
        lines = filter_lines(lines, svis, bins, segmentation)
        return sorted(lines, key=lambda line: line.key)


def filter_lines(
    lines: list[SightLine],
    svis: Sequence[SviPoint],
    bins: Mapping[str, SegmentationBins] | None,
    segmentation: SegmentationConfig | None,
) -> list[SightLine]:
    """
    Apply the segmentation filter unless there are no bins or the
    configuration asks for geometric-only results.
    """
    if bins is None or segmentation is None or segmentation.geometric_only:
        return lines
    return apply_filter(
        lines,
        bins,
        {svi.id: svi.heading for svi in svis},
        threshold=segmentation.threshold,
        missing_policy=segmentation.missing_policy,
        bin_origin=segmentation.bin_origin,
    )


@dataclass(frozen=True)
class Partition:
    """
    The SVI locations of one coarse cell and the footprints within the
    dilated cell.
    """

    cell_id: CellId
    svis: tuple[SviPoint, ...]
    footprints: tuple[Footprint, ...]


def partition_scene(
    footprints: Sequence[Footprint],
    svis: Sequence[SviPoint],
    grid: HexGrid,
    buffer: float,
) -> list[Partition]:
    """
    Split a scene by the coarse cells holding SVI locations.

    Every SVI belongs to the cell containing it. A partition carries every
    footprint whose bounding box lies within `buffer` of its cell, so a buffer
    at least the analysis radius reproduces the global result.

    Parameters
    ----------
    footprints : Sequence[Footprint]
        The buildings.
    svis : Sequence[SviPoint]
        The SVI locations.
    grid : HexGrid
        The coarse grid.
    buffer : float
        The cell dilation in meters.

    Returns
    -------
    list[Partition]
        Partitions sorted by cell.

    """
    by_cell: dict[CellId, list[SviPoint]] = {}
    for svi, cell in zip(svis, grid.cells_of([svi.position for svi in svis])):
        by_cell.setdefault(cell, []).append(svi)
    boxes = shapely.box(*np.array([fp.bbox for fp in footprints]).reshape(-1, 4).T)
    partitions = []
    for cell in sorted(by_cell):
        if len(footprints):
            near = shapely.distance(grid.polygon(cell), boxes) <= buffer
            members = tuple(fp for fp, keep in zip(footprints, near.tolist()) if keep)
        else:
            members = ()
        partitions.append(Partition(cell, tuple(by_cell[cell]), members))
    return partitions


def _run_partition(
    partition: Partition,
    spacing: float,
    radius: float,
    eps: float,
    cell_size: float,
) -> list[SightLine]:
    prepared = PreparedScene.build(partition.footprints, spacing, cell_size)
    return compute_sightlines_batch(prepared.index, partition.svis, radius, eps)


def scene_sightlines(
    scene: Scene,
    config: AnalysisConfig,
    svis: Sequence[SviPoint] | None = None,
    radius: float | None = None,
) -> list[SightLine]:
    """
    Resolve every line of sight of a scene.

    With `parallelism` above one the scene is split into coarse partitions
    dilated by the partition buffer, and the partitions are resolved in
    worker processes. Results are filtered once and sorted by key, so the
    output does not depend on the partitioning.

    Parameters
    ----------
    scene : Scene
        The scene.
    config : AnalysisConfig
        The analysis configuration.
    svis : Sequence[SviPoint], optional
        The observers; all SVI locations of the scene when unset.
    radius : float, optional
        The analysis radius; the configured radius when unset.

    Returns
    -------
    list[SightLine]

    """
    svis = scene.svi_points if svis is None else tuple(svis)
    radius = config.isovist.radius if radius is None else radius
    isovist = config.isovist
    cell_size = isovist.index_cell_size(radius)

    if config.parallelism <= 1:
        prepared = PreparedScene.build(scene.footprints, isovist.spacing, cell_size)
        return prepared.sightlines(svis, radius, isovist.eps, scene.bins, config.segmentation)

    grid = HexGrid(
        config.grid.coarse_edge,
        Point2(config.grid.origin_x, config.grid.origin_y),
        LevelTag.COARSE,
    )
    buffer = max(config.grid.buffer, radius)
    if config.grid.buffer < radius:
        logger.warning(
            "partition buffer %g m is below the radius; using %g m",
            config.grid.buffer,
            buffer,
        )
    partitions = partition_scene(scene.footprints, svis, grid, buffer)
    logger.info(
        "resolving %d partitions with %d workers",
        len(partitions),
        config.parallelism,
    )

    lines: list[SightLine] = []
    with concurrent.futures.ProcessPoolExecutor(max_workers=config.parallelism) as executor:
        futures = [
            executor.submit(_run_partition, p, isovist.spacing, radius, isovist.eps, cell_size)
            for p in partitions
        ]
        for future in concurrent.futures.as_completed(futures):
            lines.extend(future.result())

    lines = filter_lines(lines, svis, scene.bins, config.segmentation)
    return sorted(lines, key=lambda line: line.key)
