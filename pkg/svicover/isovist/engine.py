"""
Line-of-sight resolution between SVI locations and facade samples.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Iterable
from collections.abc import Sequence
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from svicover.common.constants import DEFAULT_EPS
from svicover.common.constants import DEFAULT_RADIUS
from svicover.common.enums import SightlineStatus
from svicover.common.validation import validate_positive
from svicover.geometry.intersect import blocked_mask
from svicover.geometry.intersect import point_strictly_inside
from svicover.geometry.intersect import segment_blocked
from svicover.geometry.primitives import FacadeSample
from svicover.geometry.primitives import Footprint
from svicover.geometry.primitives import Point2
from svicover.geometry.primitives import bearing
from svicover.geometry.primitives import bearings
from svicover.isovist.index import SceneIndex


logger = logging.getLogger(__name__)

# Targets resolved per kernel call; bounds the size of the target x edge arrays.
TARGET_CHUNK = 2048


@dataclass(frozen=True)
class SviPoint:
    """
    A street view capture location.

    Attributes
    ----------
    id : str
        The unique SVI identifier.
    position : Point2
        The capture location.
    heading : float
        The camera heading in degrees clockwise from north, in [0, 360).
    capture_tag : str, optional
        Opaque capture metadata such as a timestamp or source.

    Raises
    ------
    ValueError
        If the heading lies outside [0, 360).

    """

    id: str
    position: Point2
    heading: float = 0.0
    capture_tag: str | None = None

    def __post_init__(self) -> None:
        heading = float(self.heading)
        if not (0.0 <= heading < 360.0):
            raise ValueError(f"SVI `{self.id}` heading must be in [0, 360), was {self.heading}.")
        object.__setattr__(self, "id", str(self.id))
        object.__setattr__(self, "heading", heading)


class SightLine(NamedTuple):
    """
    One ray from an SVI location to a facade sample.
    """

    svi_id: str
    building_id: str
    sample_index: int
    bearing: float
    distance: float
    status: SightlineStatus

    @property
    def key(self) -> tuple[str, str, int]:
        return (self.svi_id, self.building_id, self.sample_index)


def _status(blocked: bool) -> SightlineStatus:
    return SightlineStatus.OCCLUDED if blocked else SightlineStatus.VISIBLE


def _lines(
    svi: SviPoint,
    samples: Sequence[FacadeSample],
    angles: np.ndarray,
    distances: np.ndarray,
    statuses: Sequence[SightlineStatus],
) -> list[SightLine]:
    return [
        SightLine(
            svi_id=svi.id,
            building_id=sample.building_id,
            sample_index=sample.index,
            bearing=float(angles[i]),
            distance=float(distances[i]),
            status=statuses[i],
        )
        for i, sample in enumerate(samples)
    ]


def candidate_sightlines(
    index: SceneIndex,
    svi: SviPoint,
    radius: float = DEFAULT_RADIUS,
) -> list[SightLine]:
    """
    Return one `candidate` line per facade sample within `radius` of the SVI
    location, before occlusion is resolved.

    Parameters
    ----------
    index : SceneIndex
        The scene.
    svi : SviPoint
        The observer.
    radius : float, default 50
        The analysis radius in meters.

    Returns
    -------
    list[SightLine]

    """
    radius = validate_positive(radius, "radius")
    rows = index.sample_rows(svi.position, radius)
    targets = index.sample_xy[rows]
    distances = _distances(svi.position, targets)
    angles = _bearings(svi.position, targets, distances)
    samples = [index.samples[i] for i in rows]
    return _lines(svi, samples, angles, distances, [SightlineStatus.CANDIDATE] * len(rows))


def _distances(origin: Point2, targets: np.ndarray) -> np.ndarray:
    dx = targets[:, 0] - origin.x
    dy = targets[:, 1] - origin.y
    return np.sqrt(dx * dx + dy * dy)


def _bearings(origin: Point2, targets: np.ndarray, distances: np.ndarray) -> np.ndarray:
    angles = np.zeros(len(targets))
    apart = distances > 0
    if apart.any():
        angles[apart] = bearings(origin, targets[apart])
    return angles


def compute_sightlines(
    index: SceneIndex,
    svi: SviPoint,
    radius: float = DEFAULT_RADIUS,
    eps: float = DEFAULT_EPS,
) -> list[SightLine]:
    """
    Resolve the lines of sight from one SVI location.

    Every facade sample within `radius` yields one line. The line is
    `occluded` when any footprint near the SVI, the sample's own building
    included, blocks it, and `visible` otherwise. An SVI strictly inside a
    footprint sees nothing; all its lines are occluded. A sample coinciding
    with the SVI location is visible with bearing 0.

    Parameters
    ----------
    index : SceneIndex
        The scene.
    svi : SviPoint
        The observer.
    radius : float, default 50
        The analysis radius in meters.
    eps : float, default 1e-6
        The target shrink distance in meters.

    Returns
    -------
    list[SightLine]
        Lines ordered as the samples were indexed.

    Raises
    ------
    ValueError
        If `radius` or `eps` is not positive.

    """
    radius = validate_positive(radius, "radius")
    eps = validate_positive(eps, "eps")
    origin = svi.position
    rows = index.sample_rows(origin, radius)
    if len(rows) == 0:
        return []

    targets = index.sample_xy[rows]
    distances = _distances(origin, targets)
    angles = _bearings(origin, targets, distances)

    blocked = np.zeros(len(rows), dtype=bool)
    if index.footprint_containing(origin) is not None:
        blocked[:] = True
    else:
        reach = radius + eps
        occluders = index.footprint_rows(
            (origin.x - reach, origin.y - reach, origin.x + reach, origin.y + reach),
        )
        if len(occluders):
            starts, ends, groups, boxes = index.packed_edges(occluders)
            apart = np.flatnonzero(distances > 0)
            for lo in range(0, len(apart), TARGET_CHUNK):
                part = apart[lo : lo + TARGET_CHUNK]
                blocked[part] = blocked_mask(
                    origin,
                    targets[part],
                    starts,
                    ends,
                    groups,
                    boxes,
                    eps,
                )

    samples = [index.samples[i] for i in rows]
    return _lines(svi, samples, angles, distances, [_status(b) for b in blocked.tolist()])


def compute_sightlines_batch(
    index: SceneIndex,
    svis: Iterable[SviPoint],
    radius: float = DEFAULT_RADIUS,
    eps: float = DEFAULT_EPS,
) -> list[SightLine]:
    """
    Resolve the lines of sight from many SVI locations.

    SVI locations inside a footprint are logged with a warning naming their
    count; their lines are all occluded.

    Parameters
    ----------
    index : SceneIndex
        The scene.
    svis : Iterable[SviPoint]
        The observers.
    radius : float, default 50
        The analysis radius in meters.
    eps : float, default 1e-6
        The target shrink distance in meters.

    Returns
    -------
    list[SightLine]
        Lines grouped by SVI in input order.

    """
    lines: list[SightLine] = []
    count = 0
    inside = 0
    for svi in svis:
        count += 1
        if index.footprint_containing(svi.position) is not None:
            inside += 1
        lines.extend(compute_sightlines(index, svi, radius, eps))
    if inside:
        logger.warning("%d of %d SVI points lie inside a footprint", inside, count)
    logger.debug("resolved %d lines of sight from %d SVI points", len(lines), count)
    return lines


def svis_inside_footprints(index: SceneIndex, svis: Iterable[SviPoint]) -> list[str]:
    """
    Return the ids of SVI points strictly inside a footprint.
    """
    return [svi.id for svi in svis if index.footprint_containing(svi.position) is not None]


def brute_force_sightlines(
    footprints: Sequence[Footprint],
    samples: Sequence[FacadeSample],
    svi: SviPoint,
    radius: float = DEFAULT_RADIUS,
    eps: float = DEFAULT_EPS,
) -> list[SightLine]:
    """
    Resolve the lines of sight from one SVI location by testing every ray
    against every footprint.

    This is the reference for `compute_sightlines` and shares its contract.

    Parameters
    ----------
    footprints : Sequence[Footprint]
        All footprints of the scene.
    samples : Sequence[FacadeSample]
        All facade samples of the scene.
    svi : SviPoint
        The observer.
    radius : float, default 50
        The analysis radius in meters.
    eps : float, default 1e-6
        The target shrink distance in meters.

    Returns
    -------
    list[SightLine]

    """
    radius = validate_positive(radius, "radius")
    eps = validate_positive(eps, "eps")
    origin = svi.position
    inside = any(point_strictly_inside(origin, fp) for fp in footprints)

    lines = []
    for sample in samples:
        target = sample.position
        dx = target.x - origin.x
        dy = target.y - origin.y
        if not dx * dx + dy * dy <= radius * radius:
            continue
        distance = math.sqrt(dx * dx + dy * dy)
        if distance == 0:
            blocked = inside
            angle = 0.0
        else:
            blocked = inside or any(segment_blocked(origin, target, fp, eps) for fp in footprints)
            angle = bearing(origin, target)
        lines.append(
            SightLine(
                svi_id=svi.id,
                building_id=sample.building_id,
                sample_index=sample.index,
                bearing=angle,
                distance=distance,
                status=_status(blocked),
            ),
        )
    return lines
