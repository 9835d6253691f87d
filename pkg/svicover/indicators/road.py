"""
Road-length coverage: the share of the road network within a buffer of any
SVI location.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree
from shapely import ops

from svicover.common.constants import ALL_CELLS
from svicover.common.constants import DEFAULT_ROAD_BUFFER
from svicover.common.validation import validate_positive
from svicover.geometry.primitives import Point2
from svicover.geometry.primitives import Road
from svicover.stats.hexgrid import CellId
from svicover.stats.hexgrid import HexGrid


logger = logging.getLogger(__name__)

Interval = tuple[float, float]


@dataclass(frozen=True)
class RoadCoverage:
    """
    The road-length coverage of one cell.

    Attributes
    ----------
    cell_id : CellId or str
        The cell, or `all` for the whole network.
    covered_length : float
        Meters of road within the buffer of an SVI location.
    total_length : float
        Meters of road in the cell.
    completeness : float or None
        `covered_length / total_length`; None without roads.

    """

    cell_id: CellId | str
    covered_length: float
    total_length: float
    completeness: float | None


def union_intervals(intervals: Sequence[Interval]) -> list[Interval]:
    """
    Merge overlapping or touching closed intervals, sorted by start.
    """
    merged: list[list[float]] = []
    for lo, hi in sorted(intervals):
        if merged and lo <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], hi)
        else:
            merged.append([lo, hi])
    return [(lo, hi) for lo, hi in merged]


def clip_segment_to_disc(
    start: Point2,
    end: Point2,
    center: Point2,
    radius: float,
) -> Interval | None:
    """
    Return the part of a segment within a closed disc as offsets from the
    segment start; None when they do not meet.

    Examples
    --------
    The segment (0, 0)-(100, 0) and the disc of radius 50 around (25, 0) meet
    on [0, 75].

    """
    length = math.hypot(end.x - start.x, end.y - start.y)
    if length == 0:
        return None
    ux = (end.x - start.x) / length
    uy = (end.y - start.y) / length
    cx = center.x - start.x
    cy = center.y - start.y
    along = cx * ux + cy * uy
    across = cx * uy - cy * ux
    gap = radius * radius - across * across
    if gap < 0:
        return None
    half = math.sqrt(gap)
    lo = max(0.0, along - half)
    hi = min(length, along + half)
    if lo > hi:
        return None
    return (lo, hi)


def covered_intervals(
    road: Road,
    svi_positions: np.ndarray,
    buffer_radius: float,
    tree: cKDTree | None = None,
) -> list[Interval]:
    """
    Return the arc-length intervals of a road within `buffer_radius` of any
    of an `(n, 2)` array of SVI positions, merged and sorted.
    """
    if len(svi_positions) == 0:
        return []
    if tree is None:
        tree = cKDTree(svi_positions)
    pieces: list[Interval] = []
    offset = 0.0
    for a, b in zip(road.vertices, road.vertices[1:]):
        length = math.hypot(b.x - a.x, b.y - a.y)
        mid = ((a.x + b.x) / 2.0, (a.y + b.y) / 2.0)
        # a disc meeting the segment has its center within r + L/2 of the midpoint
        for i in sorted(tree.query_ball_point(mid, buffer_radius + length / 2.0 + 1e-9)):
            center = Point2(float(svi_positions[i, 0]), float(svi_positions[i, 1]))
            clipped = clip_segment_to_disc(a, b, center, buffer_radius)
            if clipped is not None:
                pieces.append((offset + clipped[0], offset + clipped[1]))
        offset += length
    return union_intervals(pieces)


def _completeness(covered: float, total: float) -> float | None:
    if total <= 0:
        return None
    return min(1.0, covered / total)


def road_coverage(
    roads: Sequence[Road],
    svi_points: Sequence[Point2],
    buffer_radius: float = DEFAULT_ROAD_BUFFER,
    grid: HexGrid | None = None,
) -> list[RoadCoverage]:
    """
    Measure the share of road length within a buffer of any SVI location.

    Covered length is the union of the exact circle and segment overlaps on
    each road, so overlapping buffers are never counted twice.

    Parameters
    ----------
    roads : Sequence[Road]
        The road network.
    svi_points : Sequence[Point2]
        The SVI locations.
    buffer_radius : float, default 50
        The buffer radius in meters.
    grid : HexGrid, optional
        Split the network by the cells of this grid.

    Returns
    -------
    list[RoadCoverage]
        One record per cell the roads pass through, sorted by cell; a single
        `all` record when no grid is given.

    Raises
    ------
    ValueError
        If `buffer_radius` is not positive.

    """
    buffer_radius = validate_positive(buffer_radius, "buffer_radius")
    positions = np.array([p.as_tuple() for p in svi_points], dtype=np.float64).reshape(-1, 2)
    tree = cKDTree(positions) if len(positions) else None
    per_road = [covered_intervals(road, positions, buffer_radius, tree) for road in roads]

    if grid is None:
        total = math.fsum(road.length for road in roads)
        covered = math.fsum(hi - lo for intervals in per_road for lo, hi in intervals)
        return [RoadCoverage(ALL_CELLS, covered, total, _completeness(covered, total))]

    totals: dict[CellId, list[float]] = {}
    covered_by_cell: dict[CellId, list[float]] = {}
    for road, intervals in zip(roads, per_road):
        line = road.line
        pieces = [ops.substring(line, lo, hi) for lo, hi in intervals if hi > lo]
        for cell in grid.cells_in_bbox(line.bounds):
            hexagon = grid.polygon(cell)
            inside = line.intersection(hexagon).length
            if inside <= 0:
                continue
            totals.setdefault(cell, []).append(inside)
            covered_by_cell.setdefault(cell, []).extend(
                piece.intersection(hexagon).length for piece in pieces
            )

    result = []
    for cell in sorted(totals):
        total = math.fsum(totals[cell])
        covered = math.fsum(covered_by_cell.get(cell, []))
        result.append(RoadCoverage(cell, covered, total, _completeness(covered, total)))
    logger.debug("road coverage over %d cells", len(result))
    return result


def road_length_by_cell(roads: Sequence[Road], grid: HexGrid) -> dict[CellId, float]:
    """
    Return the road length per cell, for cell descriptors.
    """
    lengths: dict[CellId, list[float]] = {}
    for road in roads:
        line = road.line
        for cell in grid.cells_in_bbox(line.bounds):
            inside = line.intersection(grid.polygon(cell)).length
            if inside > 0:
                lengths.setdefault(cell, []).append(inside)
    return {cell: math.fsum(values) for cell, values in sorted(lengths.items())}
