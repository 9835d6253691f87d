"""
Population coverage: residents living in cells weighted by the completeness
of residential coverage there.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Iterable
from collections.abc import Mapping
from collections.abc import Sequence
from dataclasses import dataclass

from svicover.common.constants import RESIDENTIAL
from svicover.common.validation import validate_non_negative
from svicover.common.validation import validate_ratio
from svicover.indicators.area import coc_a_by_type
from svicover.indicators.building import BuildingCoverage


logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PopulationCoverage:
    """
    The population reached by SVI coverage.

    Attributes
    ----------
    cells : tuple[tuple[float | None, float], ...]
        The residential CoC-A and population of every cell.
    total_covered : float
        The sum of CoC-A_r * population, in persons.
    total : float
        The total population.
    ratio : float or None
        `total_covered / total`; None for a zero population.

    """

    cells: tuple[tuple[float | None, float], ...]
    total_covered: float
    total: float
    ratio: float | None


def population_coverage(cells: Iterable[tuple[float | None, float]]) -> PopulationCoverage:
    """
    Weight each cell's population by its residential CoC-A.

    A cell without residential buildings has no CoC-A_r and contributes no
    covered residents; its population still counts towards the total.

    Parameters
    ----------
    cells : Iterable[tuple[float | None, float]]
        `(coc_a_r, population)` pairs.

    Returns
    -------
    PopulationCoverage

    Raises
    ------
    ValueError
        If a population is negative or a CoC-A_r lies outside [0, 1].

    Examples
    --------
    Cells (1.0, 100) and (0.5, 200) cover 200 of 300 residents.

    """
    rows = []
    for coc_a_r, population in cells:
        population = validate_non_negative(population, "population")
        if coc_a_r is not None:
            coc_a_r = validate_ratio(coc_a_r, "coc_a_r")
        rows.append((coc_a_r, population))
    covered = math.fsum((c or 0.0) * p for c, p in rows)
    total = math.fsum(p for _, p in rows)
    levels = {c or 0.0 for c, p in rows if p > 0}
    if total <= 0:
        ratio = None
    elif len(levels) == 1:
        # a uniform coverage is its own population-weighted mean
        ratio = levels.pop()
    else:
        ratio = covered / total
    return PopulationCoverage(tuple(rows), covered, total, ratio)


def residential_cells(
    buildings_by_cell: Mapping[str, Sequence[BuildingCoverage]],
    populations: Mapping[str, float],
    type_label: str = RESIDENTIAL,
) -> dict[str, tuple[float | None, float]]:
    """
    Pair each populated cell with the CoC-A of its residential buildings.

    Cells are keyed by their string id. Populated cells without buildings get
    an undefined CoC-A_r.
    """
    unknown = sorted(set(populations) - set(buildings_by_cell))
    if unknown:
        logger.debug("%d populated cells hold no buildings", len(unknown))
    return {
        cell: (coc_a_by_type(buildings_by_cell.get(cell, ()), type_label), float(population))
        for cell, population in sorted(populations.items())
    }
