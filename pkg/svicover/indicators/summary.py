"""
Grouped coverage summaries and SVI density diagnostics.
"""

from __future__ import annotations

from collections.abc import Sequence
from typing import NamedTuple

import numpy as np
from scipy.spatial import cKDTree

from svicover.common.constants import NEAR_NEIGHBOR_DISTANCE
from svicover.common.enums import Grouping
from svicover.common.validation import validate_enum
from svicover.common.validation import validate_positive
from svicover.geometry.primitives import Point2
from svicover.indicators.building import BuildingCoverage
from svicover.indicators.building import assign_size_quintiles
from svicover.indicators.building import mean_coc_b


class GroupSummary(NamedTuple):
    """
    The coverage of one building group.

    Attributes
    ----------
    group : str
        The type label, or the quintile number as text.
    n : int
        Valid buildings in the group.
    share_covered : float or None
        The share of buildings seen at least once.
    mean_coc_b : float or None
        The mean CoC-B over all buildings.
    mean_coc_b_covered : float or None
        The mean CoC-B over the buildings seen at least once.

    """

    group: str
    n: int
    share_covered: float | None
    mean_coc_b: float | None
    mean_coc_b_covered: float | None


def coverage_summary_by_group(
    buildings: Sequence[BuildingCoverage],
    grouping: Grouping | str,
) -> list[GroupSummary]:
    """
    Summarize coverage per building type or per perimeter quintile.

    Invalid buildings (without facade samples) are left out. Quintiles that
    are not yet assigned are computed over the given buildings.

    Parameters
    ----------
    buildings : Sequence[BuildingCoverage]
        The buildings, at least one.
    grouping : Grouping or str
        `type` or `perimeter-quintile`.

    Returns
    -------
    list[GroupSummary]
        Groups sorted by type name or by quintile.

    Raises
    ------
    ValueError
        If `buildings` is empty.

    """
    grouping = validate_enum(grouping, Grouping, "grouping")
    if not buildings:
        raise ValueError("A coverage summary requires at least one building.")
    if grouping == Grouping.PERIMETER_QUINTILE and any(
        b.size_quintile is None for b in buildings
    ):
        buildings = assign_size_quintiles(buildings)

    groups: dict[str, list[BuildingCoverage]] = {}
    for b in buildings:
        if not b.valid:
            continue
        key = b.type_label if grouping == Grouping.TYPE else str(b.size_quintile)
        groups.setdefault(key, []).append(b)

    rows = []
    # quintile keys are single digits, so text order is numeric order
    for key in sorted(groups):
        members = groups[key]
        covered = sum(1 for b in members if b.covered)
        rows.append(
            GroupSummary(
                group=key,
                n=len(members),
                share_covered=covered / len(members),
                mean_coc_b=mean_coc_b(members),
                mean_coc_b_covered=mean_coc_b(members, covered_only=True),
            ),
        )
    return rows


class SpacingSummary(NamedTuple):
    """
    Nearest-neighbour distances between SVI locations.

    Attributes
    ----------
    n : int
        SVI locations.
    quantiles : dict[str, float]
        The minimum, quartiles and maximum of the distances, in meters.
    share_near : float or None
        The share of locations with a neighbour closer than `near_distance`.
    near_distance : float
        The distance threshold in meters.

    """

    n: int
    quantiles: dict[str, float]
    share_near: float | None
    near_distance: float


SPACING_QUANTILES = {"min": 0.0, "q25": 0.25, "median": 0.5, "q75": 0.75, "max": 1.0}


def svi_spacing(
    positions: Sequence[Point2],
    near_distance: float = NEAR_NEIGHBOR_DISTANCE,
) -> SpacingSummary:
    """
    Describe the density of SVI locations by nearest-neighbour distance.

    Parameters
    ----------
    positions : Sequence[Point2]
        The SVI locations.
    near_distance : float, default 10
        The distance counted as a close neighbour.

    Returns
    -------
    SpacingSummary
        Empty quantiles and no share for fewer than two locations.

    """
    near_distance = validate_positive(near_distance, "near_distance")
    xy = np.array([p.as_tuple() for p in positions], dtype=np.float64).reshape(-1, 2)
    if len(xy) < 2:
        return SpacingSummary(len(xy), {}, None, near_distance)
    distances, _ = cKDTree(xy).query(xy, k=2)
    nearest = distances[:, 1]
    quantiles = {
        name: float(np.quantile(nearest, q)) for name, q in SPACING_QUANTILES.items()
    }
    share = float(np.count_nonzero(nearest < near_distance)) / len(nearest)
    return SpacingSummary(len(xy), quantiles, share, near_distance)
