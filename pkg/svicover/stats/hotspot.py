"""
Getis-Ord Gi* local hotspot statistics on the hexagonal grid.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Collection
from collections.abc import Hashable
from collections.abc import Iterable
from collections.abc import Mapping
from collections.abc import Sequence
from typing import NamedTuple
from typing import TypeVar

import numpy as np
from esda.getisord import G_Local
from libpysal.weights import W

from svicover.common.constants import GI_RANK_FRACTION
from svicover.common.constants import GI_Z_CUTOFF
from svicover.common.enums import HotspotClass
from svicover.common.validation import validate_positive
from svicover.common.validation import validate_ratio
from svicover.stats.hexgrid import CellId
from svicover.stats.hexgrid import HexGrid


logger = logging.getLogger(__name__)

K = TypeVar("K", bound=Hashable)


class GiStar(NamedTuple):
    """
    The Gi* statistic of one cell.

    Attributes
    ----------
    cell_id : Hashable
        The cell.
    z : float or None
        The z-score; None when every value is equal.
    classification : HotspotClass
        Hot or cold by the z cutoff, otherwise neutral.
    rank_class : HotspotClass
        Hot for the top and cold for the bottom fraction of cells by z.

    """

    cell_id: Hashable
    z: float | None
    classification: HotspotClass
    rank_class: HotspotClass


def hex_neighbors(grid: HexGrid, cells: Collection[CellId]) -> dict[CellId, set[CellId]]:
    """
    Return the contiguity neighbourhood of each cell: itself and those of its
    six adjacent cells that are present in `cells`.
    """
    present = set(cells)
    return {
        cell: {cell} | {n for n in grid.neighbors(cell) if n in present} for cell in present
    }


def contiguity_weights(
    keys: Sequence[K],
    neighbors: Mapping[K, Iterable[K]],
) -> W:
    """
    Build binary spatial weights over `keys` from a neighbourhood mapping.

    Self entries and neighbours outside `keys` are dropped; the focal cell is
    weighted back in by `G_Local` when `star` is set.

    Parameters
    ----------
    keys : Sequence[K]
        The cells, in the row order of the weights.
    neighbors : Mapping[K, Iterable[K]]
        The neighbours per cell.

    Returns
    -------
    W

    """
    present = set(keys)
    adjacency = {
        k: sorted((j for j in set(neighbors.get(k, ())) if j in present and j != k), key=str)
        for k in keys
    }
    return W(adjacency, id_order=list(keys), silence_warnings=True)


def classify(z: float | None, z_cutoff: float = GI_Z_CUTOFF) -> HotspotClass:
    if z is None:
        return HotspotClass.NEUTRAL
    if z >= z_cutoff:
        return HotspotClass.HOT
    if z <= -z_cutoff:
        return HotspotClass.COLD
    return HotspotClass.NEUTRAL


def getis_ord_gi_star(
    values: Mapping[K, float],
    neighbors: Mapping[K, Iterable[K]],
    z_cutoff: float = GI_Z_CUTOFF,
    rank_fraction: float = GI_RANK_FRACTION,
) -> list[GiStar]:
    """
    Compute Gi* z-scores with binary contiguity weights.

    Each cell's weight is 1 for itself and every neighbour present in
    `values`, and 0 otherwise. A cell whose neighbourhood spans every cell has
    a zero variance and scores 0.

    Parameters
    ----------
    values : Mapping[K, float]
        The value per cell; at least two cells.
    neighbors : Mapping[K, Iterable[K]]
        The neighbours per cell; the cell itself is always included.
    z_cutoff : float, default 1.96
        The absolute z from which a cell is hot or cold.
    rank_fraction : float, default 0.05
        The share of cells ranked hot and cold by z.

    Returns
    -------
    list[GiStar]
        One record per cell, in the iteration order of `values`.

    Raises
    ------
    ValueError
        If fewer than two cells are given.

    See Also
    --------
    esda.getisord.G_Local

    """
    z_cutoff = validate_positive(z_cutoff, "z_cutoff")
    rank_fraction = validate_ratio(rank_fraction, "rank_fraction")
    keys = list(values)
    n = len(keys)
    if n < 2:
        raise ValueError(f"Gi* requires at least 2 cells, was {n}.")

    y = np.array([float(values[k]) for k in keys], dtype=np.float64)
    if np.all(y == y[0]):
        logger.debug("Gi* undefined: all %d values are equal", n)
        return [GiStar(k, None, HotspotClass.NEUTRAL, HotspotClass.NEUTRAL) for k in keys]

    w = contiguity_weights(keys, neighbors)
    with np.errstate(divide="ignore", invalid="ignore"):
        local = G_Local(y, w, transform="B", permutations=0, star=True)
    zs = np.asarray(local.Zs, dtype=np.float64)
    spans_all = np.array([w.cardinalities[k] + 1 >= n for k in keys])
    zs = np.where(spans_all | ~np.isfinite(zs), 0.0, zs)
    scores = [float(z) for z in zs]

    rank = _rank_classes(keys, scores, rank_fraction)
    return [
        GiStar(k, z, classify(z, z_cutoff), rank[i]) for i, (k, z) in enumerate(zip(keys, scores))
    ]


def _rank_classes(
    keys: list[K],
    scores: list[float],
    fraction: float,
) -> list[HotspotClass]:
    count = int(math.floor(len(keys) * fraction))
    ranks = [HotspotClass.NEUTRAL] * len(keys)
    if count == 0:
        return ranks
    order = sorted(range(len(keys)), key=lambda i: (scores[i], str(keys[i])))
    for i in order[:count]:
        ranks[i] = HotspotClass.COLD
    for i in order[-count:]:
        ranks[i] = HotspotClass.HOT
    return ranks


def hotspot_profile(
    classes: Mapping[K, HotspotClass],
    descriptors: Mapping[K, Mapping[str, float]],
) -> dict[HotspotClass, dict[str, float | None]]:
    """
    Average built-environment descriptors over the hot, cold and neutral
    cells of one metric.

    Parameters
    ----------
    classes : Mapping[K, HotspotClass]
        The class of each cell.
    descriptors : Mapping[K, Mapping[str, float]]
        Named descriptor values per cell, every cell carrying the same names.

    Returns
    -------
    dict[HotspotClass, dict[str, float | None]]
        The mean of each descriptor per class; None for a class without cells.

    """
    names = sorted({name for d in descriptors.values() for name in d})
    profile: dict[HotspotClass, dict[str, float | None]] = {}
    for hotspot_class in HotspotClass:
        members = [k for k, c in classes.items() if c == hotspot_class and k in descriptors]
        profile[hotspot_class] = {
            name: (
                math.fsum(descriptors[k][name] for k in members) / len(members)
                if members
                else None
            )
            for name in names
        }
    return profile
