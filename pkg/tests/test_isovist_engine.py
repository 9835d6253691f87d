from __future__ import annotations

import time

import numpy as np
import pytest
from svicover.common.config import AnalysisConfig
from svicover.common.enums import SightlineStatus
from svicover.geometry.primitives import Footprint
from svicover.geometry.primitives import Point2
from svicover.geometry.primitives import sample_boundary
from svicover.isovist.engine import SightLine
from svicover.isovist.engine import SviPoint
from svicover.isovist.engine import brute_force_sightlines
from svicover.isovist.engine import candidate_sightlines
from svicover.isovist.engine import compute_sightlines
from svicover.isovist.engine import compute_sightlines_batch
from svicover.isovist.engine import svis_inside_footprints
from svicover.isovist.index import build_index
from svicover.pipeline.partition import sample_footprints
from svicover.pipeline.partition import scene_sightlines
from svicover.pipeline.synth import SynthConfig
from svicover.pipeline.synth import generate_city


def _visible(lines: list[SightLine]) -> list[SightLine]:
    return [line for line in lines if line.status == SightlineStatus.VISIBLE]


def _random_scene(
    seed: int,
    max_footprints: int = 11,
    max_svis: int = 4,
    extent: float = 80.0,
) -> tuple[list[Footprint], list[SviPoint]]:
    rng = np.random.default_rng(seed)
    footprints = []
    for i in range(int(rng.integers(3, max_footprints + 1))):
        x, y = rng.uniform(0.0, extent, size=2)
        w, h = rng.uniform(3.0, 15.0, size=2)
        footprints.append(
            Footprint.from_coords(
                f"b{i}",
                [(x, y), (x + w, y), (x + w, y + h), (x, y + h)],
            ),
        )
    svis = [
        SviPoint(f"s{k}", Point2(float(x), float(y)), heading=float(rng.uniform(0.0, 360.0)))
        for k, (x, y) in enumerate(
            rng.uniform(-10.0, extent + 10.0, size=(int(rng.integers(1, max_svis + 1)), 2)),
        )
    ]
    return footprints, svis


def test_svi_point_heading_range() -> None:
    # Arrange, Act, Assert
    assert SviPoint("a", Point2(0.0, 0.0), heading=359.9).heading == 359.9
    with pytest.raises(ValueError):
        SviPoint("a", Point2(0.0, 0.0), heading=360.0)
    with pytest.raises(ValueError):
        SviPoint("a", Point2(0.0, 0.0), heading=-1.0)


def test_single_square_seen_from_the_south(
    square: Footprint,
    south_svi: SviPoint,
) -> None:
    # Arrange
    samples = sample_boundary(square, 2.0)
    index = build_index([square], samples, 50.0)

    # Act
    lines = compute_sightlines(index, south_svi, 50.0)

    # Assert
    assert len(lines) == 20
    visible = _visible(lines)
    assert len(visible) == 6
    assert sorted(samples[line.sample_index].position.x for line in visible) == [
        0.0,
        2.0,
        4.0,
        6.0,
        8.0,
        10.0,
    ]
    assert all(samples[line.sample_index].position.y == 0.0 for line in visible)
    assert {line.status for line in lines} == {
        SightlineStatus.VISIBLE,
        SightlineStatus.OCCLUDED,
    }


def test_occluder_hides_the_facade(
    square: Footprint,
    occluder: Footprint,
) -> None:
    # Arrange
    footprints = [square, occluder]
    samples = sample_footprints(footprints, 2.0)
    index = build_index(footprints, samples, 50.0)
    svi = SviPoint("S", Point2(5.0, -30.0))

    # Act
    lines = compute_sightlines(index, svi, 50.0)

    # Assert
    on_square = [line for line in lines if line.building_id == "B1"]
    assert len(on_square) == 20
    assert _visible(on_square) == []
    assert len(_visible([line for line in lines if line.building_id == "B2"])) == 6


def test_sightline_attributes(
    square: Footprint,
    south_svi: SviPoint,
) -> None:
    # Arrange
    samples = sample_boundary(square, 2.0)
    index = build_index([square], samples, 50.0)

    # Act
    lines = compute_sightlines(index, south_svi, 50.0)

    # Assert
    first = lines[0]
    assert first.key == ("S", "B1", 0)
    assert first.distance == pytest.approx(np.hypot(5.0, 20.0))
    assert first.bearing == pytest.approx(360.0 - np.degrees(np.arctan2(5.0, 20.0)))
    assert lines[5].bearing == pytest.approx(np.degrees(np.arctan2(5.0, 20.0)))


def test_radius_limits_candidates(
    square: Footprint,
) -> None:
    # Arrange
    samples = sample_boundary(square, 2.0)
    index = build_index([square], samples, 50.0)
    svi = SviPoint("S", Point2(5.0, -20.0))

    # Act
    near = candidate_sightlines(index, svi, 20.1)
    far = candidate_sightlines(index, SviPoint("F", Point2(500.0, 500.0)), 50.0)

    # Assert
    assert [line.sample_index for line in near] == [2, 3]
    assert near[0].status == SightlineStatus.CANDIDATE
    assert far == []


def test_svi_inside_footprint_sees_nothing(
    square: Footprint,
    occluder: Footprint,
) -> None:
    # Arrange
    footprints = [square, occluder]
    samples = sample_footprints(footprints, 2.0)
    index = build_index(footprints, samples, 50.0)
    inside = SviPoint("in", Point2(5.0, 5.0))

    # Act
    lines = compute_sightlines_batch(index, [inside, SviPoint("out", Point2(5.0, -20.0))])

    # Assert
    assert [line for line in lines if line.svi_id == "in"]
    assert _visible([line for line in lines if line.svi_id == "in"]) == []
    assert svis_inside_footprints(index, [inside]) == ["in"]


def test_sample_at_svi_location_is_visible(
    square: Footprint,
) -> None:
    # Arrange
    samples = sample_boundary(square, 2.0)
    index = build_index([square], samples, 50.0)
    svi = SviPoint("corner", Point2(0.0, 0.0))

    # Act
    lines = compute_sightlines(index, svi, 50.0)

    # Assert
    at_corner = [line for line in lines if line.sample_index == 0][0]
    assert at_corner.status == SightlineStatus.VISIBLE
    assert at_corner.bearing == 0.0
    assert at_corner.distance == 0.0


def test_compute_sightlines_rejects_non_positive_radius(
    square: Footprint,
    south_svi: SviPoint,
) -> None:
    # Arrange
    index = build_index([square], sample_boundary(square, 2.0), 50.0)

    # Act, Assert
    with pytest.raises(ValueError):
        compute_sightlines(index, south_svi, 0.0)


@pytest.mark.parametrize(
    "seed",
    range(5),
)
def test_indexed_engine_matches_brute_force(
    seed: int,
) -> None:
    # Arrange
    footprints, svis = _random_scene(seed)
    samples = sample_footprints(footprints, 2.0)
    index = build_index(footprints, samples, 25.0)

    for svi in svis:
        # Act
        lines = compute_sightlines(index, svi, 40.0)
        oracle = brute_force_sightlines(footprints, samples, svi, 40.0)

        # Assert
        assert sorted((line.key, line.status) for line in lines) == sorted(
            (line.key, line.status) for line in oracle
        )


@pytest.mark.parametrize(
    "seed",
    range(10),
)
def test_visible_set_grows_with_radius(
    seed: int,
) -> None:
    # Arrange
    rng = np.random.default_rng(seed)

    for case in range(100):
        footprints, svis = _random_scene(100 * seed + case, max_svis=1)
        index = build_index(footprints, sample_footprints(footprints, 2.0), 25.0)
        small, large = sorted(rng.uniform(5.0, 80.0, size=2))

        # Act
        near = {line.key for line in _visible(compute_sightlines(index, svis[0], small))}
        far = {line.key for line in _visible(compute_sightlines(index, svis[0], large))}

        # Assert
        assert near <= far


@pytest.mark.release
@pytest.mark.parametrize(
    "seed",
    range(50),
)
def test_indexed_engine_matches_brute_force_release(
    seed: int,
) -> None:
    # Arrange
    footprints, svis = _random_scene(1000 + seed, max_footprints=300, max_svis=200, extent=400.0)
    samples = sample_footprints(footprints, 2.0)
    index = build_index(footprints, samples, 50.0)

    for svi in svis:
        # Act
        lines = compute_sightlines(index, svi, 50.0)
        oracle = brute_force_sightlines(footprints, samples, svi, 50.0)

        # Assert
        assert sorted((line.key, line.status) for line in lines) == sorted(
            (line.key, line.status) for line in oracle
        )


@pytest.mark.release
def test_engine_throughput() -> None:
    """
    Test that a city of 5,000 buildings seen from 10,000 SVI points resolves
    within two minutes on a single worker.
    """
    # Arrange
    scene = generate_city(SynthConfig(seed=1, block_rows=24, block_cols=24, svi_spacing=10.0))
    assert len(scene.footprints) >= 5000
    assert len(scene.svi_points) >= 10000

    # Act
    start = time.perf_counter()
    lines = scene_sightlines(scene, AnalysisConfig())
    elapsed = time.perf_counter() - start

    # Assert
    assert lines
    assert elapsed < 120.0


@pytest.mark.release
def test_indexed_engine_outpaces_brute_force() -> None:
    # Arrange
    scene = generate_city(SynthConfig(seed=2, block_rows=7, block_cols=7, svi_spacing=10.0))
    footprints = list(scene.footprints[:500])
    svis = list(scene.svi_points[:500])
    samples = sample_footprints(footprints, 2.0)
    index = build_index(footprints, samples, 50.0)

    # Act
    start = time.perf_counter()
    for svi in svis:
        compute_sightlines(index, svi, 50.0)
    indexed = time.perf_counter() - start
    start = time.perf_counter()
    for svi in svis:
        brute_force_sightlines(footprints, samples, svi, 50.0)
    brute_force = time.perf_counter() - start

    # Assert
    assert brute_force >= 10.0 * indexed
