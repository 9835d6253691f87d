from __future__ import annotations

import numpy as np
import pytest
from svicover.indicators.building import BuildingCoverage
from svicover.indicators.population import population_coverage
from svicover.indicators.population import residential_cells


def _coverage(building_id: str, type_label: str, seen: bool) -> BuildingCoverage:
    return BuildingCoverage(
        building_id=building_id,
        type_label=type_label,
        u_avail=10,
        u_seen=5 if seen else 0,
        v=5 if seen else 0,
        perimeter=20.0,
        coc_b=0.5 if seen else 0.0,
        foc_b=0.25 if seen else 0.0,
    )


def test_population_coverage() -> None:
    # Arrange, Act
    result = population_coverage([(1.0, 100.0), (0.5, 200.0)])

    # Assert
    assert result.total_covered == 200.0
    assert result.total == 300.0
    assert result.ratio == pytest.approx(2.0 / 3.0)


def test_population_coverage_undefined_cells_count_as_uncovered() -> None:
    # Arrange, Act
    result = population_coverage([(None, 100.0), (1.0, 100.0)])

    # Assert
    assert result.total_covered == 100.0
    assert result.ratio == 0.5


def test_population_coverage_zero_population() -> None:
    # Arrange, Act
    result = population_coverage([(0.5, 0.0)])

    # Assert
    assert result.ratio is None
    assert population_coverage([]).ratio is None


@pytest.mark.parametrize(
    "seed",
    range(10),
)
def test_population_coverage_of_uniform_cells_is_exact(
    seed: int,
) -> None:
    # Arrange
    rng = np.random.default_rng(seed)

    for _ in range(100):
        coverage = float(rng.uniform(0.0, 1.0))
        populations = rng.uniform(0.0, 5000.0, size=int(rng.integers(1, 40)))

        # Act
        result = population_coverage([(coverage, float(p)) for p in populations])

        # Assert
        assert result.ratio == coverage


@pytest.mark.parametrize(
    "cells",
    [
        pytest.param([(0.5, -1.0)], id="negative-population"),
        pytest.param([(1.5, 10.0)], id="ratio-above-one"),
    ],
)
def test_population_coverage_rejects_invalid_cells(
    cells: list[tuple[float | None, float]],
) -> None:
    # Arrange, Act, Assert
    with pytest.raises(ValueError):
        population_coverage(cells)


def test_residential_cells() -> None:
    # Arrange
    by_cell = {
        "fine:0:0": [
            _coverage("a", "Residential", True),
            _coverage("b", "Residential", False),
            _coverage("c", "Retail", True),
        ],
        "fine:1:0": [_coverage("d", "Retail", True)],
    }
    populations = {"fine:1:0": 50.0, "fine:0:0": 100.0, "fine:5:5": 10.0}

    # Act
    cells = residential_cells(by_cell, populations)

    # Assert
    assert cells == {
        "fine:0:0": (0.5, 100.0),
        "fine:1:0": (None, 50.0),
        "fine:5:5": (None, 10.0),
    }
    assert population_coverage(cells.values()).total_covered == 50.0
