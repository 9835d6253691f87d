"""
Image-content validation of geometric lines of sight.

Panoramas are split into twelve 30 degree bins. Each bin carries the pixel
area per Cityscapes class id, produced by an upstream segmentation model. A
visible line is kept only when the bin it falls in shows enough building.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Iterable
from collections.abc import Mapping
from collections.abc import Sequence
from dataclasses import dataclass
from typing import NamedTuple

from svicover.common.constants import BIN_COUNT
from svicover.common.constants import BIN_WIDTH_DEG
from svicover.common.constants import BUILDING_CLASS_IDS
from svicover.common.constants import DEFAULT_THRESHOLD
from svicover.common.constants import EXCLUDED_CLASS_IDS
from svicover.common.enums import BinOrigin
from svicover.common.enums import MissingPolicy
from svicover.common.enums import SightlineStatus
from svicover.common.validation import validate_enum
from svicover.common.validation import validate_ratio
from svicover.isovist.engine import SightLine


logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SegmentationBins:
    """
    The per-bin class areas of one panorama.

    Attributes
    ----------
    svi_id : str
        The SVI the panorama belongs to.
    bins : tuple[Mapping[int, float], ...]
        Exactly twelve mappings of class id to pixel area.

    Raises
    ------
    ValueError
        If there are not twelve bins or an area is negative.

    """

    svi_id: str
    bins: tuple[Mapping[int, float], ...]

    def __post_init__(self) -> None:
        if len(self.bins) != BIN_COUNT:
            raise ValueError(
                f"SVI `{self.svi_id}` must have {BIN_COUNT} bins, was {len(self.bins)}.",
            )
        for i, areas in enumerate(self.bins):
            for class_id, area in areas.items():
                if not area >= 0:
                    raise ValueError(
                        f"SVI `{self.svi_id}` bin {i} class {class_id} has negative area {area}.",
                    )
        object.__setattr__(self, "bins", tuple(dict(b) for b in self.bins))

    def proportions(self) -> list[BinProportion]:
        return [building_proportion(areas, self.svi_id, i) for i, areas in enumerate(self.bins)]


class BinProportion(NamedTuple):
    """
    The building share of one bin; `p_building` is None when the bin holds no
    countable pixels.
    """

    svi_id: str
    bin_index: int
    p_building: float | None

    @property
    def defined(self) -> bool:
        return self.p_building is not None


def building_proportion(
    areas: Mapping[int, float],
    svi_id: str = "",
    bin_index: int = 0,
) -> BinProportion:
    """
    Return the share of building elements among the countable pixels of a
    bin.

    The numerator sums buildings, walls and fences (ids 11, 12 and 13). The
    denominator sums every class except void (ids 0 to 6), flat surfaces (ids
    7 to 10) and sky (id 23).

    Parameters
    ----------
    areas : Mapping[int, float]
        The pixel area per class id.
    svi_id : str, optional
        The owning SVI, carried into the result.
    bin_index : int, default 0
        The bin, carried into the result.

    Returns
    -------
    BinProportion

    """
    numerator = math.fsum(a for c, a in areas.items() if c in BUILDING_CLASS_IDS)
    denominator = math.fsum(a for c, a in areas.items() if c not in EXCLUDED_CLASS_IDS)
    p_building = numerator / denominator if denominator > 0 else None
    return BinProportion(svi_id=svi_id, bin_index=bin_index, p_building=p_building)


def bin_of_bearing(line_bearing: float, heading: float) -> int:
    """
    Return the bin a bearing falls in for a panorama with the given heading.

    Bin 0 starts at the heading; bins advance clockwise in 30 degree steps.

    Examples
    --------
    >>> bin_of_bearing(10.0, 350.0)
    0

    """
    relative = (line_bearing - heading) % 360.0
    return min(int(relative // BIN_WIDTH_DEG), BIN_COUNT - 1)


def _passes(proportion: BinProportion, threshold: float) -> bool:
    return proportion.p_building is not None and not proportion.p_building < threshold


def apply_filter(
    lines: Iterable[SightLine],
    bins_by_svi: Mapping[str, SegmentationBins],
    headings: Mapping[str, float],
    threshold: float = DEFAULT_THRESHOLD,
    missing_policy: MissingPolicy | str = MissingPolicy.KEEP,
    bin_origin: BinOrigin | str = BinOrigin.HEADING,
) -> list[SightLine]:
    """
    Demote visible lines whose bin shows too little building.

    A visible line becomes `segmentation_filtered` when the building
    proportion of its bin is below `threshold` or undefined. Lines of SVI
    points absent from `bins_by_svi` stay visible under the `keep` policy and
    are demoted under `drop`. Lines of any other status are passed through.

    Parameters
    ----------
    lines : Iterable[SightLine]
        The resolved lines.
    bins_by_svi : Mapping[str, SegmentationBins]
        The class areas per SVI id.
    headings : Mapping[str, float]
        The heading per SVI id.
    threshold : float, default 0.5
        The minimum building proportion.
    missing_policy : MissingPolicy or str, default 'keep'
        Treatment of lines whose SVI has no bins.
    bin_origin : BinOrigin or str, default 'heading'
        Anchor bin 0 at the heading or at true north.

    Returns
    -------
    list[SightLine]

    Raises
    ------
    ValueError
        If `threshold` is outside [0, 1] or a policy is unknown.

    """
    threshold = validate_ratio(threshold, "threshold")
    policy = validate_enum(missing_policy, MissingPolicy, "missing_policy")
    origin = validate_enum(bin_origin, BinOrigin, "bin_origin")

    passing: dict[str, list[bool]] = {}
    result = []
    demoted = 0
    for line in lines:
        if line.status != SightlineStatus.VISIBLE:
            result.append(line)
            continue
        panorama = bins_by_svi.get(line.svi_id)
        if panorama is None:
            keep = policy == MissingPolicy.KEEP
        else:
            if line.svi_id not in passing:
                passing[line.svi_id] = [_passes(p, threshold) for p in panorama.proportions()]
            anchor = headings[line.svi_id] if origin == BinOrigin.HEADING else 0.0
            keep = passing[line.svi_id][bin_of_bearing(line.bearing, anchor)]
        if keep:
            result.append(line)
        else:
            demoted += 1
            result.append(line._replace(status=SightlineStatus.SEGMENTATION_FILTERED))

    logger.debug("segmentation filter demoted %d lines", demoted)
    return result


def bins_from_records(records: Iterable[Sequence[object]]) -> dict[str, SegmentationBins]:
    """
    Assemble `SegmentationBins` from `(svi_id, bin_index, class_id, area)`
    rows. Bins without rows are empty, which leaves their proportion
    undefined.

    Raises
    ------
    ValueError
        If a bin index lies outside 0..11 or an area is negative.

    """
    grouped: dict[str, list[dict[int, float]]] = {}
    for svi_id, bin_index, class_id, area in records:
        index = int(bin_index)  # type: ignore[call-overload]
        if not 0 <= index < BIN_COUNT:
            raise ValueError(f"SVI `{svi_id}` has bin index {index} outside 0..{BIN_COUNT - 1}.")
        bins = grouped.setdefault(str(svi_id), [{} for _ in range(BIN_COUNT)])
        cid = int(class_id)  # type: ignore[call-overload]
        bins[index][cid] = bins[index].get(cid, 0.0) + float(area)  # type: ignore[arg-type]
    return {
        svi_id: SegmentationBins(svi_id=svi_id, bins=tuple(bins))
        for svi_id, bins in sorted(grouped.items())
    }
