"""
Segment against polygon occlusion tests.

The scalar predicate `segment_blocked` and the vectorized `blocked_mask`
evaluate the same floating point expressions in the same order, so both give
identical answers for identical input. The brute-force oracle relies on the
scalar form and the indexed engine on the vectorized one.
"""

from __future__ import annotations

import math
from collections.abc import Sequence

import numpy as np

from svicover.common.constants import DEFAULT_EPS
from svicover.common.error import DegenerateGeometryError
from svicover.common.validation import validate_positive
from svicover.geometry.primitives import Footprint
from svicover.geometry.primitives import Point2


def shrink_target(origin: Point2, target: Point2, eps: float) -> tuple[float, float]:
    """
    Return the point at distance `eps` before `target` on the segment from
    `origin`.

    Raises
    ------
    DegenerateGeometryError
        If origin and target coincide.

    """
    dx = target.x - origin.x
    dy = target.y - origin.y
    dist = math.sqrt(dx * dx + dy * dy)
    if dist == 0:
        raise DegenerateGeometryError("A line of sight requires distinct origin and target.")
    return target.x - eps * (dx / dist), target.y - eps * (dy / dist)


def segment_blocked(
    origin: Point2,
    target: Point2,
    occluder: Footprint,
    eps: float = DEFAULT_EPS,
) -> bool:
    """
    Test whether a footprint blocks the line of sight from `origin` to
    `target`.

    The segment is shortened by `eps` at the target end so a line ending on
    its host facade is not blocked by that facade. The segment is blocked when
    it properly crosses an edge of the occluder, or when its midpoint lies
    strictly inside the occluder. Touching an edge or vertex does not block.

    Parameters
    ----------
    origin : Point2
        The observer location.
    target : Point2
        The observed facade point.
    occluder : Footprint
        The potential occluder.
    eps : float, default 1e-6
        The target shrink distance in meters.

    Returns
    -------
    bool

    Raises
    ------
    DegenerateGeometryError
        If origin and target coincide.

    """
    eps = validate_positive(eps, "eps")
    ox, oy = origin.x, origin.y
    bx, by = shrink_target(origin, target, eps)

    minx, miny, maxx, maxy = occluder.bbox
    if max(ox, bx) < minx or min(ox, bx) > maxx or max(oy, by) < miny or min(oy, by) > maxy:
        return False

    sx = bx - ox
    sy = by - oy
    starts, ends = occluder.edges()
    for (px, py), (qx, qy) in zip(starts.tolist(), ends.tolist()):
        o1 = sx * (py - oy) - sy * (px - ox)
        o2 = sx * (qy - oy) - sy * (qx - ox)
        if not ((o1 > 0 and o2 < 0) or (o1 < 0 and o2 > 0)):
            continue
        ex = qx - px
        ey = qy - py
        o3 = ex * (oy - py) - ey * (ox - px)
        o4 = ex * (by - py) - ey * (bx - px)
        if (o3 > 0 and o4 < 0) or (o3 < 0 and o4 > 0):
            return True

    mx = 0.5 * (ox + bx)
    my = 0.5 * (oy + by)
    return _strictly_inside(mx, my, starts.tolist(), ends.tolist())


def _strictly_inside(
    mx: float,
    my: float,
    starts: Sequence[Sequence[float]],
    ends: Sequence[Sequence[float]],
) -> bool:
    inside = False
    for (px, py), (qx, qy) in zip(starts, ends):
        ex = qx - px
        ey = qy - py
        if (
            ex * (my - py) - ey * (mx - px) == 0
            and min(px, qx) <= mx <= max(px, qx)
            and min(py, qy) <= my <= max(py, qy)
        ):
            return False
        if (py > my) != (qy > my):
            xint = px + (my - py) * ex / ey
            if mx < xint:
                inside = not inside
    return inside


def blocked_mask(
    origin: Point2,
    targets: np.ndarray,
    edge_starts: np.ndarray,
    edge_ends: np.ndarray,
    group_starts: np.ndarray,
    bboxes: np.ndarray,
    eps: float = DEFAULT_EPS,
) -> np.ndarray:
    """
    Vectorized `segment_blocked` for one origin, many targets and a set of
    occluders.

    Parameters
    ----------
    origin : Point2
        The observer location.
    targets : np.ndarray
        The `(m, 2)` target points; none may coincide with the origin.
    edge_starts, edge_ends : np.ndarray
        The `(e, 2)` edge end points of all occluders, each occluder's edges
        stored contiguously.
    group_starts : np.ndarray
        The index of the first edge of each occluder, increasing.
    bboxes : np.ndarray
        The `(f, 4)` occluder bounding boxes as (minx, miny, maxx, maxy).
    eps : float, default 1e-6
        The target shrink distance in meters.

    Returns
    -------
    np.ndarray
        A boolean array of length `m`; True where any occluder blocks.

    """
    m = len(targets)
    if m == 0 or len(edge_starts) == 0:
        return np.zeros(m, dtype=bool)

    ox, oy = origin.x, origin.y
    dx = targets[:, 0] - ox
    dy = targets[:, 1] - oy
    dist = np.sqrt(dx * dx + dy * dy)
    bx = targets[:, 0] - eps * (dx / dist)
    by = targets[:, 1] - eps * (dy / dist)
    sx = (bx - ox)[:, None]
    sy = (by - oy)[:, None]

    # occluders whose bbox misses the ray bbox are rejected as in the scalar test
    reach = ~(
        (np.maximum(ox, bx)[:, None] < bboxes[None, :, 0])
        | (np.minimum(ox, bx)[:, None] > bboxes[None, :, 2])
        | (np.maximum(oy, by)[:, None] < bboxes[None, :, 1])
        | (np.minimum(oy, by)[:, None] > bboxes[None, :, 3])
    )
    sizes = np.diff(np.append(group_starts, len(edge_starts)))
    edge_reach = reach[:, np.repeat(np.arange(len(group_starts)), sizes)]

    px = edge_starts[:, 0][None, :]
    py = edge_starts[:, 1][None, :]
    qx = edge_ends[:, 0][None, :]
    qy = edge_ends[:, 1][None, :]
    ex = qx - px
    ey = qy - py

    o1 = sx * (py - oy) - sy * (px - ox)
    o2 = sx * (qy - oy) - sy * (qx - ox)
    o3 = ex * (oy - py) - ey * (ox - px)
    o4 = ex * (by[:, None] - py) - ey * (bx[:, None] - px)
    straddle_edge = ((o1 > 0) & (o2 < 0)) | ((o1 < 0) & (o2 > 0))
    straddle_ray = ((o3 > 0) & (o4 < 0)) | ((o3 < 0) & (o4 > 0))
    blocked = np.any(straddle_edge & straddle_ray & edge_reach, axis=1)

    mx = (0.5 * (ox + bx))[:, None]
    my = (0.5 * (oy + by))[:, None]
    on_edge = (
        (ex * (my - py) - ey * (mx - px) == 0)
        & (np.minimum(px, qx) <= mx)
        & (mx <= np.maximum(px, qx))
        & (np.minimum(py, qy) <= my)
        & (my <= np.maximum(py, qy))
    )
    spans = (py > my) != (qy > my)
    safe_ey = np.where(ey == 0, 1.0, ey)
    xint = px + (my - py) * ex / safe_ey
    crossings = spans & (mx < xint)

    parity = np.add.reduceat(crossings.astype(np.int32), group_starts, axis=1) % 2 == 1
    touching = np.logical_or.reduceat(on_edge, group_starts, axis=1)
    inside = np.any(parity & ~touching & reach, axis=1)
    return blocked | inside


def point_strictly_inside(point: Point2, footprint: Footprint) -> bool:
    """
    Test whether a point lies in the interior of a footprint. Points on the
    boundary are outside.
    """
    minx, miny, maxx, maxy = footprint.bbox
    if not (minx < point.x < maxx and miny < point.y < maxy):
        return False
    starts, ends = footprint.edges()
    return _strictly_inside(point.x, point.y, starts.tolist(), ends.tolist())
