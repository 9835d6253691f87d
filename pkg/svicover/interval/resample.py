"""
Resampling of SVI locations along the road network.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Sequence

import numpy as np
import shapely
from scipy.spatial import cKDTree

from svicover.common.validation import validate_positive
from svicover.geometry.primitives import Point2
from svicover.geometry.primitives import Road
from svicover.isovist.engine import SviPoint


logger = logging.getLogger(__name__)

# Offsets this close past a multiple of the interval still land on it.
OFFSET_TOLERANCE = 1e-9


def road_offsets(length: float, interval: float) -> np.ndarray:
    """
    Return the arc offsets 0, d, 2d, ... that do not exceed `length`.
    """
    count = int(math.floor(length / interval + OFFSET_TOLERANCE))
    offsets = np.arange(count + 1, dtype=np.float64) * interval
    return np.minimum(offsets, length)


def resample_along_roads(roads: Sequence[Road], interval: float) -> list[Point2]:
    """
    Place points along every road at a fixed arc-length interval.

    Points start at each road's first vertex; the end is included only when
    it falls on a multiple of the interval. Since offsets are anchored at the
    start, an interval that is a multiple of another yields a subset of its
    points.

    Parameters
    ----------
    roads : Sequence[Road]
        The road network.
    interval : float
        The spacing in meters.

    Returns
    -------
    list[Point2]
        The points, road by road in input order.

    Raises
    ------
    ValueError
        If `interval` is not positive.

    Examples
    --------
    A 100 m road at interval 40 gives points at offsets 0, 40 and 80.

    """
    interval = validate_positive(interval, "interval")
    points: list[Point2] = []
    for road in roads:
        offsets = road_offsets(road.length, interval)
        located = shapely.line_interpolate_point(road.line, offsets)
        points.extend(Point2(float(x), float(y)) for x, y in shapely.get_coordinates(located))
    return points


def snap_to_svi(
    positions: Sequence[Point2],
    svis: Sequence[SviPoint],
    tolerance: float,
) -> list[SviPoint]:
    """
    Replace each position with the nearest SVI location within `tolerance`.

    Ties in distance go to the smallest SVI id. Positions without an SVI in
    reach are dropped, and an SVI matched by several positions is kept once.

    Parameters
    ----------
    positions : Sequence[Point2]
        The resampled positions.
    svis : Sequence[SviPoint]
        The available SVI locations.
    tolerance : float
        The snap distance in meters.

    Returns
    -------
    list[SviPoint]
        The matched SVI, in order of first match.

    Raises
    ------
    ValueError
        If `tolerance` is not positive.

    """
    tolerance = validate_positive(tolerance, "tolerance")
    if not positions or not svis:
        return []
    xy = np.array([svi.position.as_tuple() for svi in svis], dtype=np.float64)
    tree = cKDTree(xy)
    query = np.array([p.as_tuple() for p in positions], dtype=np.float64)

    chosen: list[SviPoint] = []
    taken: set[str] = set()
    dropped = 0
    for point, candidates in zip(query, tree.query_ball_point(query, tolerance)):
        if not candidates:
            dropped += 1
            continue
        best = min(
            candidates,
            key=lambda i: (math.hypot(xy[i, 0] - point[0], xy[i, 1] - point[1]), svis[i].id),
        )
        svi = svis[best]
        if svi.id not in taken:
            taken.add(svi.id)
            chosen.append(svi)
    if dropped:
        logger.debug("%d of %d positions have no SVI within %g m", dropped, len(query), tolerance)
    return chosen
