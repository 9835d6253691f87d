"""
Building-level coverage: completeness (CoC-B) and frequency (FoC-B).
"""

from __future__ import annotations

import dataclasses
import logging
import math
from collections import Counter
from collections.abc import Hashable
from collections.abc import Iterable
from collections.abc import Mapping
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from svicover.common.constants import TOP_FOC_B_FRACTION
from svicover.common.enums import SightlineStatus
from svicover.common.validation import validate_ratio
from svicover.geometry.primitives import FacadeSample
from svicover.geometry.primitives import Footprint
from svicover.isovist.engine import SightLine


logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class BuildingCoverage:
    """
    The coverage of one building.

    Attributes
    ----------
    building_id : str
        The building.
    type_label : str
        The building type.
    u_avail : int
        The facade samples of the building.
    u_seen : int
        The samples with at least one visible line.
    v : int
        The visible lines; a sample seen from several SVI counts once per SVI.
    perimeter : float
        The building perimeter in meters.
    coc_b : float or None
        `u_seen / u_avail`; None for an invalid building.
    foc_b : float
        `v / perimeter`, visible lines per meter.
    size_quintile : int or None
        The perimeter quintile 1..5 within the analyzed buildings.
    top_foc_b : bool
        Whether the building ranks in the top FoC-B share of its cell.

    """

    building_id: str
    type_label: str
    u_avail: int
    u_seen: int
    v: int
    perimeter: float
    coc_b: float | None
    foc_b: float
    size_quintile: int | None = None
    top_foc_b: bool = False

    @property
    def valid(self) -> bool:
        """
        False when the building has no samples; such buildings are left out
        of every mean.
        """
        return self.u_avail > 0

    @property
    def covered(self) -> bool:
        return self.u_seen > 0


def aggregate_building_coverage(
    lines: Iterable[SightLine],
    samples: Sequence[FacadeSample],
    footprints: Sequence[Footprint],
) -> list[BuildingCoverage]:
    """
    Count the coverage of every building from its resolved lines of sight.

    Only `visible` lines count. Buildings without lines are reported with
    zero coverage.

    Parameters
    ----------
    lines : Iterable[SightLine]
        The resolved (and possibly segmentation filtered) lines.
    samples : Sequence[FacadeSample]
        The facade samples of `footprints`.
    footprints : Sequence[Footprint]
        The buildings.

    Returns
    -------
    list[BuildingCoverage]
        One record per footprint, in footprint order.

    Raises
    ------
    ValueError
        If a line references a building that is not in `footprints`.

    """
    available = Counter(s.building_id for s in samples)
    seen: dict[str, set[int]] = {fp.id: set() for fp in footprints}
    visible: Counter[str] = Counter()
    for line in lines:
        if line.status != SightlineStatus.VISIBLE:
            continue
        if line.building_id not in seen:
            raise ValueError(f"A line references unknown building `{line.building_id}`.")
        seen[line.building_id].add(line.sample_index)
        visible[line.building_id] += 1

    result = []
    invalid = 0
    for fp in footprints:
        u_avail = available.get(fp.id, 0)
        u_seen = len(seen[fp.id])
        if u_avail == 0:
            invalid += 1
        result.append(
            BuildingCoverage(
                building_id=fp.id,
                type_label=fp.type_label,
                u_avail=u_avail,
                u_seen=u_seen,
                v=visible[fp.id],
                perimeter=fp.perimeter,
                coc_b=u_seen / u_avail if u_avail > 0 else None,
                foc_b=visible[fp.id] / fp.perimeter,
            ),
        )
    if invalid:
        logger.warning("%d buildings have no facade samples and are flagged invalid", invalid)
    return result


def assign_size_quintiles(buildings: Sequence[BuildingCoverage]) -> list[BuildingCoverage]:
    """
    Rank buildings into perimeter quintiles.

    The cut points are the 20th, 40th, 60th and 80th percentiles of the
    perimeters given; a perimeter equal to a cut point falls in the lower
    quintile.

    Returns
    -------
    list[BuildingCoverage]
        The buildings with `size_quintile` set, in input order.

    """
    if not buildings:
        return []
    perimeters = np.array([b.perimeter for b in buildings], dtype=np.float64)
    cuts = np.percentile(perimeters, [20, 40, 60, 80])
    quintiles = np.searchsorted(cuts, perimeters, side="left") + 1
    return [
        dataclasses.replace(b, size_quintile=int(q)) for b, q in zip(buildings, quintiles.tolist())
    ]


def mark_top_foc_b(
    buildings: Sequence[BuildingCoverage],
    cells: Mapping[str, Hashable],
    fraction: float = TOP_FOC_B_FRACTION,
) -> list[BuildingCoverage]:
    """
    Flag the buildings with the highest FoC-B in each cell.

    In a cell of n seen buildings the ceil(n * fraction) highest FoC-B values
    are flagged, ties broken by building id. Unseen buildings are never
    flagged.

    Parameters
    ----------
    buildings : Sequence[BuildingCoverage]
        The buildings.
    cells : Mapping[str, Hashable]
        The cell of each building id.
    fraction : float, default 0.1
        The flagged share per cell.

    Returns
    -------
    list[BuildingCoverage]
        The buildings with `top_foc_b` set, in input order.

    """
    fraction = validate_ratio(fraction, "fraction")
    grouped: dict[Hashable, list[BuildingCoverage]] = {}
    for b in buildings:
        if b.valid and b.v > 0 and b.building_id in cells:
            grouped.setdefault(cells[b.building_id], []).append(b)
    top: set[str] = set()
    for members in grouped.values():
        count = math.ceil(len(members) * fraction)
        ranked = sorted(members, key=lambda b: (-b.foc_b, b.building_id))
        top.update(b.building_id for b in ranked[:count])
    return [dataclasses.replace(b, top_foc_b=b.building_id in top) for b in buildings]


def mean_coc_b(buildings: Iterable[BuildingCoverage], covered_only: bool = False) -> float | None:
    """
    Return the mean CoC-B of valid buildings, optionally only of those seen at
    least once; None when no building qualifies.
    """
    values = [
        b.coc_b
        for b in buildings
        if b.valid and b.coc_b is not None and (b.covered or not covered_only)
    ]
    return math.fsum(values) / len(values) if values else None


def mean_foc_b(buildings: Iterable[BuildingCoverage], covered_only: bool = False) -> float | None:
    """
    Return the mean FoC-B of valid buildings, optionally only of those seen at
    least once; None when no building qualifies.
    """
    values = [b.foc_b for b in buildings if b.valid and (b.covered or not covered_only)]
    return math.fsum(values) / len(values) if values else None
