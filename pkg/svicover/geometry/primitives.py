from __future__ import annotations

import math
from collections.abc import Iterable
from collections.abc import Sequence
from dataclasses import dataclass
from dataclasses import field
from typing import NamedTuple

import numpy as np
from shapely.geometry import LinearRing
from shapely.geometry import LineString
from shapely.geometry import Polygon

from svicover.common.constants import UNLABELED
from svicover.common.error import DegenerateGeometryError
from svicover.common.validation import validate_positive


# Relative distance from a whole number at which perimeter / spacing counts as one.
ARC_TOLERANCE = 1e-9


@dataclass(frozen=True)
class Point2:
    """
    A point in a projected, metric planar CRS.

    Raises
    ------
    ValueError
        If a coordinate is NaN or infinite.

    """

    x: float
    y: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"Point2 coordinates must be finite, was ({self.x}, {self.y}).")

    def as_tuple(self) -> tuple[float, float]:
        return (self.x, self.y)


def as_point(value: Point2 | Sequence[float]) -> Point2:
    """
    Coerce an `(x, y)` pair into a `Point2`.
    """
    if isinstance(value, Point2):
        return value
    x, y = value
    return Point2(float(x), float(y))


def _ring_array(ring: Iterable[Point2 | Sequence[float]]) -> np.ndarray:
    coords = np.array([as_point(p).as_tuple() for p in ring], dtype=np.float64).reshape(-1, 2)
    if len(coords) > 1:
        # repeated vertices (including the closing one) carry no edge
        distinct = np.any(coords != np.roll(coords, 1, axis=0), axis=1)
        distinct[0] = True
        coords = coords[distinct]
        if len(coords) > 1 and np.array_equal(coords[0], coords[-1]):
            coords = coords[:-1]
    return coords


def _edge_lengths(coords: np.ndarray) -> np.ndarray:
    delta = np.roll(coords, -1, axis=0) - coords
    return np.sqrt(delta[:, 0] * delta[:, 0] + delta[:, 1] * delta[:, 1])


def perimeter(ring: Sequence[Point2 | Sequence[float]]) -> float:
    """
    Return the length of a closed ring, including the closing edge.

    Parameters
    ----------
    ring : Sequence[Point2 or (x, y)]
        The ring vertices; a repeated closing vertex is ignored.

    Returns
    -------
    float
        The perimeter in meters.

    Raises
    ------
    DegenerateGeometryError
        If the ring has fewer than 3 vertices or zero length.

    """
    coords = _ring_array(ring)
    if len(coords) < 3:
        raise DegenerateGeometryError(
            f"A ring requires at least 3 vertices, was {len(coords)}.",
        )
    length = float(math.fsum(_edge_lengths(coords)))
    if length <= 0:
        raise DegenerateGeometryError("A ring must have a positive perimeter.")
    return length


@dataclass(frozen=True)
class Footprint:
    """
    A building footprint: the observed facade and an occluder.

    Only the exterior ring is modelled. The ring is stored without a repeated
    closing vertex and must be simple.

    Attributes
    ----------
    id : str
        The unique building identifier.
    exterior : tuple[Point2, ...]
        The exterior ring, closed implicitly.
    type_label : str, default "Unlabeled"
        The building type.
    perimeter : float
        The ring length in meters (derived).
    bbox : tuple[float, float, float, float]
        The bounding box as (minx, miny, maxx, maxy) (derived).

    Raises
    ------
    DegenerateGeometryError
        If the ring has fewer than 3 vertices, is not simple, or has zero length.

    """

    id: str
    exterior: tuple[Point2, ...]
    type_label: str = UNLABELED
    perimeter: float = field(init=False, repr=False)
    bbox: tuple[float, float, float, float] = field(init=False, repr=False)
    coords: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        coords = _ring_array(self.exterior)
        if len(coords) < 3:
            raise DegenerateGeometryError(
                f"Footprint `{self.id}` has {len(coords)} vertices; at least 3 are required.",
            )
        if not LinearRing(coords).is_simple:
            raise DegenerateGeometryError(f"Footprint `{self.id}` is not a simple ring.")
        coords.setflags(write=False)
        object.__setattr__(self, "id", str(self.id))
        object.__setattr__(self, "exterior", tuple(Point2(float(x), float(y)) for x, y in coords))
        object.__setattr__(self, "coords", coords)
        object.__setattr__(self, "perimeter", perimeter(self.exterior))
        object.__setattr__(
            self,
            "bbox",
            (
                float(coords[:, 0].min()),
                float(coords[:, 1].min()),
                float(coords[:, 0].max()),
                float(coords[:, 1].max()),
            ),
        )

    @classmethod
    def from_coords(
        cls,
        building_id: str,
        coords: Iterable[Sequence[float]],
        type_label: str = UNLABELED,
    ) -> Footprint:
        return cls(
            id=building_id,
            exterior=tuple(as_point(c) for c in coords),
            type_label=type_label,
        )

    @property
    def polygon(self) -> Polygon:
        return Polygon(self.coords)

    @property
    def centroid(self) -> Point2:
        """
        Return the area centroid of the footprint.
        """
        center = self.polygon.centroid
        return Point2(float(center.x), float(center.y))

    def edges(self) -> tuple[np.ndarray, np.ndarray]:
        """
        Return the edge start and end points as two `(n, 2)` arrays.
        """
        return self.coords, np.roll(self.coords, -1, axis=0)


class FacadeSample(NamedTuple):
    """
    A point placed along a footprint boundary, standing in for a unit of
    facade.

    Attributes
    ----------
    building_id : str
        The host building.
    index : int
        The ordinal along the boundary walk.
    position : Point2
        The location on the ring.
    arc_offset : float
        The distance along the ring from its first vertex, in meters.

    """

    building_id: str
    index: int
    position: Point2
    arc_offset: float


def sample_boundary(footprint: Footprint, spacing: float) -> list[FacadeSample]:
    """
    Place samples along a footprint boundary at a fixed arc-length spacing,
    walking the ring from its first vertex.

    Samples sit at offsets 0, s, 2s, ... strictly below the perimeter, so the
    count is ceil(perimeter / spacing). A perimeter within a relative 1e-9 of a
    multiple of the spacing counts as that multiple. When the spacing is at
    least the perimeter the only sample is the first vertex.

    Parameters
    ----------
    footprint : Footprint
        The footprint to sample.
    spacing : float
        The arc-length spacing in meters.

    Returns
    -------
    list[FacadeSample]

    Raises
    ------
    ValueError
        If `spacing` is not positive.

    """
    spacing = validate_positive(spacing, "spacing")
    coords = footprint.coords
    lengths = _edge_lengths(coords)
    starts = np.concatenate(([0.0], np.cumsum(lengths)[:-1]))

    ratio = footprint.perimeter / spacing
    nearest = round(ratio)
    if nearest >= 1 and abs(ratio - nearest) <= ARC_TOLERANCE * ratio:
        count = nearest
    else:
        count = max(1, math.ceil(ratio))
    offsets = np.arange(count, dtype=np.float64) * spacing
    edge = np.searchsorted(starts, offsets, side="right") - 1
    t = (offsets - starts[edge]) / lengths[edge]
    ends = np.roll(coords, -1, axis=0)
    xs = coords[edge, 0] + t * (ends[edge, 0] - coords[edge, 0])
    ys = coords[edge, 1] + t * (ends[edge, 1] - coords[edge, 1])

    return [
        FacadeSample(
            building_id=footprint.id,
            index=i,
            position=Point2(float(xs[i]), float(ys[i])),
            arc_offset=float(offsets[i]),
        )
        for i in range(count)
    ]


def bearing(origin: Point2, target: Point2) -> float:
    """
    Return the direction from `origin` to `target` as degrees clockwise from
    north (+y), in [0, 360).

    Raises
    ------
    DegenerateGeometryError
        If the points coincide.

    """
    dx = target.x - origin.x
    dy = target.y - origin.y
    if dx == 0 and dy == 0:
        raise DegenerateGeometryError(
            f"A bearing requires two distinct points, was {origin} twice.",
        )
    angle = math.degrees(math.atan2(dx, dy)) % 360.0
    if angle >= 360.0:
        angle -= 360.0
    return angle


def bearings(origin: Point2, targets: np.ndarray) -> np.ndarray:
    """
    Vectorized `bearing` from one origin to an `(n, 2)` array of targets.
    """
    angles = np.degrees(np.arctan2(targets[:, 0] - origin.x, targets[:, 1] - origin.y)) % 360.0
    angles[angles >= 360.0] -= 360.0
    return angles


@dataclass(frozen=True)
class Road:
    """
    A road centerline.

    Attributes
    ----------
    id : str
        The unique road identifier.
    vertices : tuple[Point2, ...]
        The polyline vertices, at least two.
    length : float
        The polyline length in meters (derived).

    Raises
    ------
    DegenerateGeometryError
        If the polyline has fewer than two distinct vertices.

    """

    id: str
    vertices: tuple[Point2, ...]
    length: float = field(init=False, repr=False)

    def __post_init__(self) -> None:
        vertices = tuple(as_point(v) for v in self.vertices)
        kept = [v for i, v in enumerate(vertices) if i == 0 or v != vertices[i - 1]]
        if len(kept) < 2:
            raise DegenerateGeometryError(f"Road `{self.id}` needs two distinct vertices.")
        object.__setattr__(self, "id", str(self.id))
        object.__setattr__(self, "vertices", tuple(kept))
        object.__setattr__(
            self,
            "length",
            math.fsum(math.hypot(b.x - a.x, b.y - a.y) for a, b in zip(kept, kept[1:])),
        )

    @classmethod
    def from_coords(cls, road_id: str, coords: Iterable[Sequence[float]]) -> Road:
        return cls(id=road_id, vertices=tuple(as_point(c) for c in coords))

    @property
    def coords(self) -> np.ndarray:
        return np.array([v.as_tuple() for v in self.vertices], dtype=np.float64)

    @property
    def line(self) -> LineString:
        return LineString(self.coords)
