"""
Area-level coverage: completeness (CoC-A) and type frequency shares (FoC-A).
"""

from __future__ import annotations

import math
from collections import Counter
from collections.abc import Iterable
from collections.abc import Sequence
from dataclasses import dataclass

from svicover.geometry.primitives import Footprint
from svicover.indicators.building import BuildingCoverage
from svicover.indicators.building import mean_coc_b
from svicover.stats.hexgrid import CellId
from svicover.stats.hexgrid import HexGrid


def coc_a(buildings_in_cell: Sequence[BuildingCoverage]) -> float | None:
    """
    Return the share of buildings seen by at least one line of sight; None
    for an empty cell.

    Examples
    --------
    Three of four buildings seen gives 0.75.

    """
    if not buildings_in_cell:
        return None
    return sum(1 for b in buildings_in_cell if b.covered) / len(buildings_in_cell)


def coc_a_by_type(buildings_in_cell: Sequence[BuildingCoverage], type_label: str) -> float | None:
    """
    Return CoC-A over the buildings of one type; None when the cell has none.
    """
    return coc_a([b for b in buildings_in_cell if b.type_label == type_label])


def foc_a(buildings_in_cell: Iterable[BuildingCoverage], type_label: str) -> float | None:
    """
    Return the share of a building type in the visible line count of a cell.

    The counts are raw visible lines, not weighted by perimeter. None when
    the cell has no visible lines.
    """
    total = 0
    of_type = 0
    for b in buildings_in_cell:
        total += b.v
        if b.type_label == type_label:
            of_type += b.v
    if total == 0:
        return None
    return of_type / total


@dataclass(frozen=True)
class AreaCoverage:
    """
    The coverage of one grid cell.

    Attributes
    ----------
    cell_id : CellId
        The cell.
    n_total : int
        Buildings in the cell.
    n_seen : int
        Buildings with at least one visible sample.
    coc_a : float or None
        `n_seen / n_total`.
    v_by_type : dict[str, int]
        Visible lines per building type.
    foc_a_by_type : dict[str, float]
        Each type's share of the visible lines; empty without visible lines.
    mean_coc_b : float or None
        The mean CoC-B of the valid buildings.
    footprint_count_by_type : dict[str, int]
        Buildings per type.
    dominant_type : str or None
        The type with the highest FoC-A, ties by name.

    """

    cell_id: CellId
    n_total: int
    n_seen: int
    coc_a: float | None
    v_by_type: dict[str, int]
    foc_a_by_type: dict[str, float]
    mean_coc_b: float | None
    footprint_count_by_type: dict[str, int]
    dominant_type: str | None

    def count_share(self, type_label: str) -> float | None:
        """
        Return the share of the cell's buildings that have the given type.
        """
        if self.n_total == 0:
            return None
        return self.footprint_count_by_type.get(type_label, 0) / self.n_total


def cell_of_footprints(footprints: Iterable[Footprint], grid: HexGrid) -> dict[str, CellId]:
    """
    Return the cell of each footprint's area centroid, keyed by building id.
    """
    footprints = list(footprints)
    cells = grid.cells_of([fp.centroid for fp in footprints])
    return {fp.id: cell for fp, cell in zip(footprints, cells)}


def group_by_cell(
    buildings: Iterable[BuildingCoverage],
    cells: dict[str, CellId],
) -> dict[CellId, list[BuildingCoverage]]:
    """
    Group buildings by cell, cells sorted and buildings in input order.
    """
    grouped: dict[CellId, list[BuildingCoverage]] = {}
    for b in buildings:
        grouped.setdefault(cells[b.building_id], []).append(b)
    return dict(sorted(grouped.items()))


def summarize_cell(cell_id: CellId, members: Sequence[BuildingCoverage]) -> AreaCoverage:
    v_by_type: Counter[str] = Counter()
    count_by_type: Counter[str] = Counter()
    for b in members:
        v_by_type[b.type_label] += b.v
        count_by_type[b.type_label] += 1
    total_v = sum(v_by_type.values())
    shares = {}
    if total_v > 0:
        shares = {t: v / total_v for t, v in sorted(v_by_type.items())}
    dominant = None
    if shares:
        dominant = min(shares, key=lambda t: (-shares[t], t))
    return AreaCoverage(
        cell_id=cell_id,
        n_total=len(members),
        n_seen=sum(1 for b in members if b.covered),
        coc_a=coc_a(members),
        v_by_type=dict(sorted(v_by_type.items())),
        foc_a_by_type=shares,
        mean_coc_b=mean_coc_b(members),
        footprint_count_by_type=dict(sorted(count_by_type.items())),
        dominant_type=dominant,
    )


def aggregate_area_coverage(
    buildings: Sequence[BuildingCoverage],
    footprints: Sequence[Footprint],
    grid: HexGrid,
) -> list[AreaCoverage]:
    """
    Summarize building coverage per grid cell.

    Each building belongs to the cell holding its footprint's area centroid.

    Parameters
    ----------
    buildings : Sequence[BuildingCoverage]
        The building records.
    footprints : Sequence[Footprint]
        The footprints of those buildings.
    grid : HexGrid
        The aggregation grid.

    Returns
    -------
    list[AreaCoverage]
        One record per populated cell, sorted by cell.

    """
    cells = cell_of_footprints(footprints, grid)
    return [
        summarize_cell(cell, members)
        for cell, members in group_by_cell(buildings, cells).items()
    ]


def foc_a_shares_sum(area: AreaCoverage) -> float:
    return math.fsum(area.foc_a_by_type.values())
