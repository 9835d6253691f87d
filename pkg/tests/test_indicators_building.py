from __future__ import annotations

import pytest
from svicover.common.enums import SightlineStatus
from svicover.geometry.primitives import Footprint
from svicover.geometry.primitives import Point2
from svicover.geometry.primitives import sample_boundary
from svicover.indicators.building import BuildingCoverage
from svicover.indicators.building import aggregate_building_coverage
from svicover.indicators.building import assign_size_quintiles
from svicover.indicators.building import mark_top_foc_b
from svicover.indicators.building import mean_coc_b
from svicover.indicators.building import mean_foc_b
from svicover.isovist.engine import SightLine
from svicover.isovist.engine import SviPoint
from svicover.isovist.engine import compute_sightlines_batch
from svicover.isovist.index import build_index


def _coverage(
    building_id: str,
    perimeter: float = 40.0,
    v: int = 1,
    u_avail: int = 20,
    u_seen: int = 1,
) -> BuildingCoverage:
    return BuildingCoverage(
        building_id=building_id,
        type_label="Residential",
        u_avail=u_avail,
        u_seen=u_seen,
        v=v,
        perimeter=perimeter,
        coc_b=u_seen / u_avail if u_avail else None,
        foc_b=v / perimeter,
    )


def test_square_seen_from_one_side(
    square: Footprint,
    south_svi: SviPoint,
) -> None:
    # Arrange
    samples = sample_boundary(square, 2.0)
    index = build_index([square], samples, 50.0)
    lines = compute_sightlines_batch(index, [south_svi], 50.0)

    # Act
    [coverage] = aggregate_building_coverage(lines, samples, [square])

    # Assert
    assert coverage.u_avail == 20
    assert coverage.u_seen == 6
    assert coverage.v == 6
    assert coverage.perimeter == 40.0
    assert coverage.coc_b == pytest.approx(0.3)
    assert coverage.foc_b == pytest.approx(0.15)
    assert coverage.valid
    assert coverage.covered


def test_square_seen_from_two_sides(
    square: Footprint,
    south_svi: SviPoint,
) -> None:
    # Arrange
    samples = sample_boundary(square, 2.0)
    index = build_index([square], samples, 50.0)
    svis = [south_svi, SviPoint("N", Point2(5.0, 30.0))]
    lines = compute_sightlines_batch(index, svis, 50.0)

    # Act
    [coverage] = aggregate_building_coverage(lines, samples, [square])

    # Assert
    assert coverage.u_seen == 12
    assert coverage.v == 12
    assert coverage.coc_b == pytest.approx(0.6)
    assert coverage.foc_b == pytest.approx(0.3)


def test_repeated_sightings_count_once_for_completeness(
    square: Footprint,
) -> None:
    # Arrange
    samples = sample_boundary(square, 2.0)
    lines = [
        SightLine("S1", "B1", 0, 0.0, 5.0, SightlineStatus.VISIBLE),
        SightLine("S2", "B1", 0, 0.0, 5.0, SightlineStatus.VISIBLE),
        SightLine("S2", "B1", 1, 0.0, 5.0, SightlineStatus.SEGMENTATION_FILTERED),
        SightLine("S2", "B1", 2, 0.0, 5.0, SightlineStatus.OCCLUDED),
    ]

    # Act
    [coverage] = aggregate_building_coverage(lines, samples, [square])

    # Assert
    assert coverage.u_seen == 1
    assert coverage.v == 2
    assert coverage.coc_b == pytest.approx(0.05)


def test_unreached_and_invalid_buildings(
    square: Footprint,
    occluder: Footprint,
) -> None:
    # Arrange
    samples = sample_boundary(square, 2.0)

    # Act
    result = aggregate_building_coverage([], samples, [square, occluder])

    # Assert
    assert [b.building_id for b in result] == ["B1", "B2"]
    assert result[0].coc_b == 0.0
    assert result[0].valid
    assert not result[0].covered
    assert result[1].coc_b is None
    assert not result[1].valid


def test_aggregate_rejects_unknown_building(
    square: Footprint,
) -> None:
    # Arrange
    lines = [SightLine("S", "ghost", 0, 0.0, 1.0, SightlineStatus.VISIBLE)]

    # Act, Assert
    with pytest.raises(ValueError):
        aggregate_building_coverage(lines, sample_boundary(square, 2.0), [square])


def test_assign_size_quintiles() -> None:
    # Arrange
    buildings = [_coverage(f"b{i}", perimeter=p) for i, p in enumerate([50, 10, 40, 20, 30])]

    # Act
    result = assign_size_quintiles(buildings)

    # Assert
    assert [b.size_quintile for b in result] == [5, 1, 4, 2, 3]
    assert [b.building_id for b in result] == ["b0", "b1", "b2", "b3", "b4"]


def test_assign_size_quintiles_equal_perimeters() -> None:
    # Arrange
    buildings = [_coverage(f"b{i}") for i in range(7)]

    # Act
    result = assign_size_quintiles(buildings)

    # Assert
    assert {b.size_quintile for b in result} == {1}
    assert assign_size_quintiles([]) == []


@pytest.mark.parametrize(
    "count, expected",
    [
        pytest.param(10, 1, id="ten"),
        pytest.param(11, 2, id="eleven-rounds-up"),
        pytest.param(1, 1, id="single"),
    ],
)
def test_mark_top_foc_b_count(
    count: int,
    expected: int,
) -> None:
    # Arrange
    buildings = [_coverage(f"b{i:02d}", v=i + 1) for i in range(count)]
    cells = {b.building_id: "c" for b in buildings}

    # Act
    result = mark_top_foc_b(buildings, cells)

    # Assert
    flagged = [b.building_id for b in result if b.top_foc_b]
    assert len(flagged) == expected
    assert flagged[-1] == f"b{count - 1:02d}"


def test_mark_top_foc_b_per_cell_with_ties() -> None:
    # Arrange
    buildings = [
        _coverage("b", v=3),
        _coverage("a", v=3),
        _coverage("c", v=1),
        _coverage("d", v=2),
        _coverage("unseen", v=0, u_seen=0),
    ]
    cells = {"a": 1, "b": 1, "c": 1, "d": 2, "unseen": 2}

    # Act
    result = mark_top_foc_b(buildings, cells, fraction=0.3)

    # Assert
    assert {b.building_id for b in result if b.top_foc_b} == {"a", "d"}


def test_means_skip_invalid_buildings() -> None:
    # Arrange
    buildings = [
        _coverage("a", v=4, u_seen=10),
        _coverage("b", v=0, u_seen=0),
        _coverage("c", v=0, u_avail=0, u_seen=0),
    ]

    # Act, Assert
    assert mean_coc_b(buildings) == pytest.approx(0.25)
    assert mean_coc_b(buildings, covered_only=True) == pytest.approx(0.5)
    assert mean_foc_b(buildings) == pytest.approx(0.05)
    assert mean_foc_b(buildings, covered_only=True) == pytest.approx(0.1)
    assert mean_coc_b([]) is None
