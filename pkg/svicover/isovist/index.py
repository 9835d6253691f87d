from __future__ import annotations

import logging
import math
from collections.abc import Collection
from collections.abc import Iterable
from collections.abc import Sequence

import numpy as np

from svicover.common.validation import validate_non_negative
from svicover.common.validation import validate_positive
from svicover.geometry.intersect import point_strictly_inside
from svicover.geometry.primitives import FacadeSample
from svicover.geometry.primitives import Footprint
from svicover.geometry.primitives import Point2


logger = logging.getLogger(__name__)

BBox = tuple[float, float, float, float]


class SceneIndex:
    """
    A uniform grid over a scene's footprints and facade samples.

    Every footprint is registered in each cell its bounding box touches and
    every sample in the cell containing it. Queries collect the cells
    covering a window and return matches in input order, so results do not
    depend on the cell size.

    Parameters
    ----------
    footprints : Sequence[Footprint]
        The occluders and observation targets.
    samples : Sequence[FacadeSample]
        The facade samples of the footprints.
    cell_size : float
        The grid cell edge in meters.

    Raises
    ------
    ValueError
        If `cell_size` is not positive, or a sample references an unknown
        building.

    """

    def __init__(
        self,
        footprints: Sequence[Footprint],
        samples: Sequence[FacadeSample],
        cell_size: float,
    ) -> None:
        self._cell_size = validate_positive(cell_size, "cell_size")
        self._footprints: tuple[Footprint, ...] = tuple(footprints)
        self._samples: tuple[FacadeSample, ...] = tuple(samples)

        position = {fp.id: i for i, fp in enumerate(self._footprints)}
        try:
            self._sample_owner = np.array(
                [position[s.building_id] for s in self._samples],
                dtype=np.int64,
            )
        except KeyError as exc:
            raise ValueError(f"A sample references unknown building {exc}.") from None
        self._sample_xy = np.array(
            [s.position.as_tuple() for s in self._samples],
            dtype=np.float64,
        ).reshape(-1, 2)

        bboxes = [fp.bbox for fp in self._footprints]
        self._bboxes = np.array(bboxes, dtype=np.float64).reshape(-1, 4)
        if len(self._footprints) or len(self._samples):
            lows = np.vstack([self._bboxes[:, :2], self._sample_xy])
            self._origin = (float(lows[:, 0].min()), float(lows[:, 1].min()))
        else:
            self._origin = (0.0, 0.0)

        edge_counts = np.array([len(fp.coords) for fp in self._footprints], dtype=np.int64)
        self._edge_offsets = np.concatenate(([0], np.cumsum(edge_counts)))
        if len(self._footprints):
            self._edge_starts = np.vstack([fp.coords for fp in self._footprints])
            self._edge_ends = np.vstack([np.roll(fp.coords, -1, axis=0) for fp in self._footprints])
        else:
            self._edge_starts = np.empty((0, 2))
            self._edge_ends = np.empty((0, 2))

        self._footprint_cells: dict[tuple[int, int], list[int]] = {}
        for i, bbox in enumerate(bboxes):
            for cell in self._cells(bbox):
                self._footprint_cells.setdefault(cell, []).append(i)

        self._sample_cells: dict[tuple[int, int], np.ndarray] = {}
        if len(self._samples):
            ix = np.floor((self._sample_xy[:, 0] - self._origin[0]) / self._cell_size)
            iy = np.floor((self._sample_xy[:, 1] - self._origin[1]) / self._cell_size)
            keys = np.stack([ix, iy], axis=1).astype(np.int64)
            order = np.lexsort((np.arange(len(keys)), keys[:, 1], keys[:, 0]))
            cells, first = np.unique(keys[order], axis=0, return_index=True)
            for cell, rows in zip(cells.tolist(), np.split(order, first[1:])):
                self._sample_cells[(cell[0], cell[1])] = rows

        logger.debug(
            "indexed %d footprints and %d samples in %d cells of %.1f m",
            len(self._footprints),
            len(self._samples),
            len(self._footprint_cells),
            self._cell_size,
        )

    @property
    def cell_size(self) -> float:
        return self._cell_size

    @property
    def footprints(self) -> tuple[Footprint, ...]:
        return self._footprints

    @property
    def samples(self) -> tuple[FacadeSample, ...]:
        return self._samples

    @property
    def sample_xy(self) -> np.ndarray:
        return self._sample_xy

    @property
    def sample_owner(self) -> np.ndarray:
        """
        The position in `footprints` of each sample's host building.
        """
        return self._sample_owner

    def cells(self) -> list[tuple[int, int]]:
        """
        Return the grid cells holding at least one footprint, sorted.
        """
        return sorted(self._footprint_cells)

    def footprints_in_cell(self, cell: tuple[int, int]) -> list[Footprint]:
        return [self._footprints[i] for i in self._footprint_cells.get(cell, [])]

    def _cells(self, bbox: BBox) -> Iterable[tuple[int, int]]:
        x0 = math.floor((bbox[0] - self._origin[0]) / self._cell_size)
        x1 = math.floor((bbox[2] - self._origin[0]) / self._cell_size)
        y0 = math.floor((bbox[1] - self._origin[1]) / self._cell_size)
        y1 = math.floor((bbox[3] - self._origin[1]) / self._cell_size)
        for i in range(x0, x1 + 1):
            for j in range(y0, y1 + 1):
                yield (i, j)

    def _window_cells(
        self,
        bbox: BBox,
        occupied: Collection[tuple[int, int]],
    ) -> list[tuple[int, int]]:
        x0 = math.floor((bbox[0] - self._origin[0]) / self._cell_size)
        x1 = math.floor((bbox[2] - self._origin[0]) / self._cell_size)
        y0 = math.floor((bbox[1] - self._origin[1]) / self._cell_size)
        y1 = math.floor((bbox[3] - self._origin[1]) / self._cell_size)
        span = (x1 - x0 + 1) * (y1 - y0 + 1)
        if span > len(occupied):
            # windows far larger than the scene
            return [c for c in occupied if x0 <= c[0] <= x1 and y0 <= c[1] <= y1]
        return list(self._cells(bbox))

    def footprint_rows(self, bbox: BBox) -> np.ndarray:
        """
        Return the positions of footprints whose bounding box meets `bbox`,
        in input order.
        """
        found: set[int] = set()
        for cell in self._window_cells(bbox, self._footprint_cells):
            found.update(self._footprint_cells.get(cell, ()))
        if not found:
            return np.empty(0, dtype=np.int64)
        rows = np.fromiter(sorted(found), dtype=np.int64)
        boxes = self._bboxes[rows]
        meets = (
            (boxes[:, 0] <= bbox[2])
            & (boxes[:, 2] >= bbox[0])
            & (boxes[:, 1] <= bbox[3])
            & (boxes[:, 3] >= bbox[1])
        )
        return rows[meets]

    def sample_rows(self, center: Point2, radius: float) -> np.ndarray:
        """
        Return the positions of samples within `radius` of `center`, in input
        order.
        """
        radius = validate_non_negative(radius, "radius")
        bbox = (center.x - radius, center.y - radius, center.x + radius, center.y + radius)
        parts = [
            self._sample_cells[cell]
            for cell in self._window_cells(bbox, self._sample_cells)
            if cell in self._sample_cells
        ]
        if not parts:
            return np.empty(0, dtype=np.int64)
        rows = np.sort(np.concatenate(parts))
        dx = self._sample_xy[rows, 0] - center.x
        dy = self._sample_xy[rows, 1] - center.y
        return rows[dx * dx + dy * dy <= radius * radius]

    def query(
        self,
        center: Point2,
        radius: float,
    ) -> tuple[list[Footprint], list[FacadeSample]]:
        """
        Return the footprints whose bounding box meets the bounding box of a
        disc, and the samples inside the disc.

        Parameters
        ----------
        center : Point2
            The disc center.
        radius : float
            The disc radius in meters.

        Returns
        -------
        tuple[list[Footprint], list[FacadeSample]]

        """
        bbox = (center.x - radius, center.y - radius, center.x + radius, center.y + radius)
        footprints = [self._footprints[i] for i in self.footprint_rows(bbox)]
        samples = [self._samples[i] for i in self.sample_rows(center, radius)]
        return footprints, samples

    def packed_edges(
        self,
        rows: np.ndarray,
    ) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """
        Return the contiguous edges of the given footprints.

        Returns
        -------
        tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]
            Edge starts, edge ends, the first edge of each footprint and the
            footprint bounding boxes.

        """
        if len(rows) == 0:
            return np.empty((0, 2)), np.empty((0, 2)), np.empty(0, dtype=np.int64), np.empty((0, 4))
        lo = self._edge_offsets[rows]
        hi = self._edge_offsets[rows + 1]
        edges = np.concatenate([np.arange(a, b) for a, b in zip(lo, hi)])
        group_starts = np.concatenate(([0], np.cumsum(hi - lo)[:-1])).astype(np.int64)
        return (
            self._edge_starts[edges],
            self._edge_ends[edges],
            group_starts,
            self._bboxes[rows],
        )

    def footprint_containing(self, point: Point2) -> Footprint | None:
        """
        Return the first footprint, in input order, whose interior contains
        `point`; None for points outside every footprint or on a boundary.
        """
        for row in self.footprint_rows((point.x, point.y, point.x, point.y)):
            footprint = self._footprints[row]
            if point_strictly_inside(point, footprint):
                return footprint
        return None


def build_index(
    footprints: Sequence[Footprint],
    samples: Sequence[FacadeSample],
    cell_size: float,
) -> SceneIndex:
    """
    Build a `SceneIndex` over a scene.

    Parameters
    ----------
    footprints : Sequence[Footprint]
        The scene footprints; may be empty.
    samples : Sequence[FacadeSample]
        The facade samples of those footprints.
    cell_size : float
        The grid cell edge in meters, usually the analysis radius.

    Returns
    -------
    SceneIndex

    Raises
    ------
    ValueError
        If `cell_size` is not positive.

    """
    return SceneIndex(footprints, samples, cell_size)
