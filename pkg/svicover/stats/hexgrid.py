"""
A planar hexagonal grid with flat-top cells in axial coordinates.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass
from dataclasses import field
from typing import Final

import numpy as np
import shapely
from shapely.geometry import Polygon

from svicover.common.enums import LevelTag
from svicover.common.validation import validate_enum
from svicover.common.validation import validate_non_negative
from svicover.common.validation import validate_positive
from svicover.geometry.primitives import Point2


SQRT3: Final = math.sqrt(3.0)

# Axial offsets of the six neighbours.
NEIGHBOR_OFFSETS: Final = ((1, 0), (1, -1), (0, -1), (-1, 0), (-1, 1), (0, 1))

# The rounded cell and its neighbours, in lexicographic order so that the
# first minimum is the smallest (q, r).
_CANDIDATE_OFFSETS: Final = np.array(
    sorted([(0, 0), *NEIGHBOR_OFFSETS]),
    dtype=np.int64,
)


@dataclass(frozen=True, order=True)
class CellId:
    """
    A hexagon of a grid level, rendered as `"<level>:<q>:<r>"`.
    """

    level: LevelTag
    q: int
    r: int

    def __str__(self) -> str:
        return f"{self.level.value}:{self.q}:{self.r}"

    @classmethod
    def parse(cls, text: str) -> CellId:
        """
        Parse the string form of a cell id.

        Raises
        ------
        ValueError
            If the text is not a cell id.

        """
        try:
            level, q, r = str(text).split(":")
            return cls(validate_enum(level, LevelTag, "level"), int(q), int(r))
        except ValueError as exc:
            raise ValueError(f"Invalid cell id `{text}`.") from exc


@dataclass(frozen=True)
class HexGrid:
    """
    A flat-top hexagonal tiling of the plane.

    Attributes
    ----------
    edge_length : float
        The hexagon edge (and circumradius) in meters.
    origin : Point2
        The center of cell (0, 0).
    level : LevelTag, default fine
        The tag carried by the grid's cell ids.

    Raises
    ------
    ValueError
        If `edge_length` is not positive.

    """

    edge_length: float
    origin: Point2 = field(default_factory=lambda: Point2(0.0, 0.0))
    level: LevelTag = LevelTag.FINE

    def __post_init__(self) -> None:
        validate_positive(self.edge_length, "edge_length")
        object.__setattr__(self, "level", validate_enum(self.level, LevelTag, "level"))

    @property
    def cell_area(self) -> float:
        return 1.5 * SQRT3 * self.edge_length * self.edge_length

    def cell(self, q: int, r: int) -> CellId:
        return CellId(self.level, int(q), int(r))

    def center(self, cell: CellId) -> Point2:
        s = self.edge_length
        return Point2(
            self.origin.x + 1.5 * s * cell.q,
            self.origin.y + SQRT3 * s * (cell.r + 0.5 * cell.q),
        )

    def polygon(self, cell: CellId) -> Polygon:
        """
        Return the hexagon of a cell, vertices counterclockwise from east.
        """
        c = self.center(cell)
        s = self.edge_length
        angles = [math.radians(60 * k) for k in range(6)]
        return Polygon([(c.x + s * math.cos(a), c.y + s * math.sin(a)) for a in angles])

    def neighbors(self, cell: CellId) -> list[CellId]:
        return [self.cell(cell.q + dq, cell.r + dr) for dq, dr in NEIGHBOR_OFFSETS]

    def axial_of(self, xy: np.ndarray) -> np.ndarray:
        """
        Return the `(n, 2)` axial coordinates of the cells containing an
        `(n, 2)` array of points.

        Points on a shared boundary go to the cell with the smaller (q, r).
        """
        xy = np.asarray(xy, dtype=np.float64).reshape(-1, 2)
        s = self.edge_length
        x = xy[:, 0] - self.origin.x
        y = xy[:, 1] - self.origin.y
        fq = (2.0 / 3.0 * x) / s
        fr = (-x / 3.0 + SQRT3 / 3.0 * y) / s
        fs = -fq - fr
        rq, rr, rs = np.round(fq), np.round(fr), np.round(fs)
        dq, dr, ds = np.abs(rq - fq), np.abs(rr - fr), np.abs(rs - fs)
        fix_q = (dq > dr) & (dq > ds)
        fix_r = ~fix_q & (dr > ds)
        rq = np.where(fix_q, -rr - rs, rq)
        rr = np.where(fix_r, -rq - rs, rr)
        base = np.stack([rq, rr], axis=1).astype(np.int64)

        cand = base[:, None, :] + _CANDIDATE_OFFSETS[None, :, :]
        cx = 1.5 * s * cand[:, :, 0]
        cy = SQRT3 * s * (cand[:, :, 1] + 0.5 * cand[:, :, 0])
        ax = np.abs(x[:, None] - cx)
        ay = np.abs(y[:, None] - cy)
        norm = np.maximum(ay / (SQRT3 / 2.0 * s), (SQRT3 * ax + ay) / (SQRT3 * s))
        pick = np.argmin(norm, axis=1)
        return cand[np.arange(len(xy)), pick]

    def cell_of(self, point: Point2) -> CellId:
        q, r = self.axial_of(np.array([point.as_tuple()]))[0]
        return self.cell(q, r)

    def cells_of(self, points: Sequence[Point2]) -> list[CellId]:
        if not points:
            return []
        axial = self.axial_of(np.array([p.as_tuple() for p in points]))
        return [self.cell(q, r) for q, r in axial.tolist()]

    def cells_in_bbox(self, bbox: tuple[float, float, float, float]) -> list[CellId]:
        """
        Return every cell whose hexagon meets a bounding box, sorted.
        """
        s = self.edge_length
        minx, miny, maxx, maxy = bbox
        q0 = math.floor((minx - self.origin.x) / (1.5 * s)) - 1
        q1 = math.ceil((maxx - self.origin.x) / (1.5 * s)) + 1
        # a flat box degenerates to a line or point instead of an invalid polygon
        box = shapely.envelope(shapely.multipoints([(minx, miny), (maxx, maxy)]))
        cells = []
        for q in range(q0, q1 + 1):
            # rows of column q are centred at y = sqrt3 s (r + q / 2)
            r0 = math.floor((miny - self.origin.y) / (SQRT3 * s) - 0.5 * q) - 1
            r1 = math.ceil((maxy - self.origin.y) / (SQRT3 * s) - 0.5 * q) + 1
            for r in range(r0, r1 + 1):
                cell = self.cell(q, r)
                if self.polygon(cell).intersects(box):
                    cells.append(cell)
        return sorted(cells)


def cell_of(point: Point2, grid: HexGrid) -> CellId:
    """
    Return the cell of `grid` containing `point`.

    Parameters
    ----------
    point : Point2
        The point to locate.
    grid : HexGrid
        The grid.

    Returns
    -------
    CellId
        Boundary points go to the cell with the lexicographically smaller
        (q, r).

    """
    return grid.cell_of(point)


def buffered_mask(grid: HexGrid, cell: CellId, xy: np.ndarray, buffer: float) -> np.ndarray:
    """
    Return which of an `(n, 2)` array of points lie within `buffer` of a
    cell's hexagon.
    """
    buffer = validate_non_negative(buffer, "buffer")
    xy = np.asarray(xy, dtype=np.float64).reshape(-1, 2)
    if len(xy) == 0:
        return np.zeros(0, dtype=bool)
    distance = shapely.distance(grid.polygon(cell), shapely.points(xy))
    return np.asarray(distance <= buffer)


def buffered_members(
    grid: HexGrid,
    cell: CellId,
    items: Sequence[Point2],
    buffer: float,
) -> list[Point2]:
    """
    Return the items inside a cell dilated by `buffer`.

    Parameters
    ----------
    grid : HexGrid
        The grid.
    cell : CellId
        The cell to dilate.
    items : Sequence[Point2]
        The candidate points.
    buffer : float
        The dilation in meters; 0 keeps the hexagon itself.

    Returns
    -------
    list[Point2]
        The members, in input order.

    """
    mask = buffered_mask(grid, cell, np.array([p.as_tuple() for p in items]), buffer)
    return [item for item, inside in zip(items, mask.tolist()) if inside]
