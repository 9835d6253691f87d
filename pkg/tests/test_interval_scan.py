from __future__ import annotations

import dataclasses

import pytest
from svicover.common.config import AnalysisConfig
from svicover.common.config import IntervalConfig
from svicover.common.enums import FitKind
from svicover.common.enums import OptimumStatus
from svicover.interval.scan import AUTO_KINDS
from svicover.interval.scan import ScanResult
from svicover.interval.scan import detect_optimal_interval
from svicover.interval.scan import fit_comparison
from svicover.interval.scan import interval_spread
from svicover.interval.scan import scan
from svicover.pipeline.scene import Scene
from svicover.pipeline.synth import SynthConfig
from svicover.pipeline.synth import generate_city
from svicover.stats.hexgrid import HexGrid

from tests.data.generator import MANIFEST


INTERVALS = [float(d) for d in range(10, 100, 5)]


def _completeness(d: float) -> float:
    return 1.0 - 0.01 * (d - 10.0)


def _frequency(d: float) -> float:
    return 1.0 - 0.02 * (d - 10.0) + 0.0001 * (d - 10.0) ** 2


@pytest.fixture(name="declining")
def fixture_declining() -> ScanResult:
    """
    Fixture for a scan whose derivative curves meet at an interval of 60 m.

    Returns
    -------
    ScanResult

    """
    return ScanResult.from_means(
        ("all", 50.0, d, _completeness(d), _frequency(d)) for d in INTERVALS
    )


def test_from_means_normalizes_by_smallest_interval() -> None:
    # Arrange
    means = [
        ("c1", 50.0, 20.0, 0.4, 0.2),
        ("c1", 50.0, 10.0, 0.5, 0.4),
        ("c2", 50.0, 10.0, 0.0, 0.1),
        ("c2", 50.0, 20.0, 0.0, 0.05),
    ]

    # Act
    result = ScanResult.from_means(means)

    # Assert
    assert result.cells() == ["c1", "c2"]
    assert result.radii() == [50.0]
    first, second = result.series("c1", 50.0)
    assert (first.interval, first.norm_coc_b, first.norm_foc_b) == (10.0, 1.0, 1.0)
    assert second.norm_coc_b == pytest.approx(0.8)
    assert second.norm_foc_b == pytest.approx(0.5)
    assert [row.norm_coc_b for row in result.series("c2", 50.0)] == [None, None]
    assert [row.norm_foc_b for row in result.series("c2", 50.0)] == pytest.approx([1.0, 0.5])


@pytest.mark.parametrize(
    "fit_kind, tolerance",
    [
        pytest.param(FitKind.POLYNOMIAL, 1e-2, id="polynomial"),
        pytest.param(FitKind.SMOOTHING_SPLINE, 1.0, id="smoothing-spline"),
    ],
)
def test_detect_optimal_interval(
    declining: ScanResult,
    fit_kind: FitKind,
    tolerance: float,
) -> None:
    # Arrange, Act
    [optimum] = detect_optimal_interval(declining, fit_kind)

    # Assert
    assert optimum.status == OptimumStatus.DETECTED
    assert optimum.optimal_interval == pytest.approx(60.0, abs=tolerance)
    assert optimum.fit_kind == fit_kind
    assert optimum.r2_coc is not None and optimum.r2_coc > 0.99
    assert optimum.curves is not None


def test_detect_optimal_interval_auto(
    declining: ScanResult,
) -> None:
    # Arrange, Act
    [optimum] = detect_optimal_interval(declining, "auto")

    # Assert
    assert optimum.status == OptimumStatus.DETECTED
    assert optimum.fit_kind in AUTO_KINDS
    assert optimum.optimal_interval == pytest.approx(60.0, abs=1.0)


def test_detect_optimal_interval_tie() -> None:
    # Arrange
    result = ScanResult.from_means(
        ("all", 50.0, d, _completeness(d), _completeness(d)) for d in INTERVALS
    )

    # Act
    [optimum] = detect_optimal_interval(result, FitKind.POLYNOMIAL)

    # Assert
    assert optimum.status == OptimumStatus.TIE
    assert optimum.optimal_interval == 10.0


def test_detect_optimal_interval_none() -> None:
    # Arrange
    result = ScanResult.from_means(
        ("all", 50.0, d, _completeness(d), 1.0 - 0.005 * (d - 10.0)) for d in INTERVALS
    )

    # Act
    [optimum] = detect_optimal_interval(result, FitKind.POLYNOMIAL, degree=1)

    # Assert
    assert optimum.status == OptimumStatus.NONE
    assert optimum.optimal_interval is None


@pytest.mark.parametrize(
    "intervals, fit_kind, expected",
    [
        pytest.param([10.0, 20.0, 30.0, 40.0], FitKind.SMOOTHING_SPLINE, 4, id="spline-four"),
        pytest.param([10.0, 20.0, 30.0], FitKind.POLYNOMIAL, 3, id="polynomial-three"),
    ],
)
def test_detect_optimal_interval_insufficient(
    intervals: list[float],
    fit_kind: FitKind,
    expected: int,
) -> None:
    # Arrange
    result = ScanResult.from_means(
        ("all", 50.0, d, _completeness(d), _frequency(d)) for d in intervals
    )

    # Act
    [optimum] = detect_optimal_interval(result, fit_kind)

    # Assert
    assert len(result.rows) == expected
    assert optimum.status == OptimumStatus.INSUFFICIENT
    assert optimum.optimal_interval is None


def test_detect_optimal_interval_zero_base() -> None:
    # Arrange
    result = ScanResult.from_means(("c", 50.0, d, 0.0, _frequency(d)) for d in INTERVALS)

    # Act
    [optimum] = detect_optimal_interval(result)

    # Assert
    assert optimum.status == OptimumStatus.ZERO_BASE


def test_fit_comparison(
    declining: ScanResult,
) -> None:
    # Arrange, Act
    rows = fit_comparison(declining)

    # Assert
    assert [row.fit_kind for row in rows] == list(AUTO_KINDS)
    polynomial = [row for row in rows if row.fit_kind == FitKind.POLYNOMIAL][0]
    assert polynomial.r2_coc == pytest.approx(1.0)
    assert polynomial.r2_foc == pytest.approx(1.0)


def test_interval_spread() -> None:
    # Arrange
    result = ScanResult.from_means(
        [
            ("c1", 30.0, 10.0, 0.2, 0.1),
            ("c2", 30.0, 10.0, 0.4, 0.3),
            ("c3", 30.0, 10.0, 0.6, 0.5),
            ("all", 30.0, 10.0, 0.4, 0.3),
        ],
    )

    # Act
    [row] = interval_spread(result)

    # Assert
    assert row.n_cells == 3
    assert row.coc_b_median == pytest.approx(0.4)
    assert row.coc_b_q1 == pytest.approx(0.3)
    assert row.foc_b_q3 == pytest.approx(0.4)


def test_scan_synthetic_city(
    synth_scene: Scene,
    config: AnalysisConfig,
) -> None:
    # Arrange
    grid = HexGrid(config.grid.fine_edge)

    # Act
    result = scan(synth_scene, config, grid)

    # Assert
    assert "all" in result.cells()
    assert result.radii() == [30.0]
    series = result.series("all", 30.0)
    assert [row.interval for row in series] == [10.0, 20.0, 30.0, 40.0, 50.0]
    assert series[0].norm_coc_b == 1.0
    coc = {row.interval: row.mean_coc_b for row in series}
    assert coc[20.0] <= coc[10.0] + 1e-12
    assert coc[40.0] <= coc[20.0] + 1e-12
    assert coc[30.0] <= coc[10.0] + 1e-12


def test_scan_parallel_matches_serial(
    synth_scene: Scene,
    config: AnalysisConfig,
) -> None:
    # Arrange
    grid = HexGrid(config.grid.fine_edge)

    # Act
    serial = scan(synth_scene, config, grid)
    parallel = scan(synth_scene, config.with_overrides(parallelism=2), grid)

    # Assert
    assert parallel == serial


def test_scan_ignores_input_order(
    synth_scene: Scene,
    config: AnalysisConfig,
) -> None:
    # Arrange
    grid = HexGrid(config.grid.fine_edge)
    shuffled = dataclasses.replace(
        synth_scene,
        footprints=synth_scene.footprints[::-1],
        roads=synth_scene.roads[::-1],
        svi_points=synth_scene.svi_points[::-1],
    )

    # Act
    result = scan(shuffled, config, grid)

    # Assert
    assert result == scan(synth_scene, config, grid)


@pytest.mark.release
@pytest.mark.parametrize(
    "seed",
    range(5),
)
def test_nested_intervals_never_raise_coverage(
    seed: int,
) -> None:
    # Arrange
    scene = generate_city(SynthConfig(**{**MANIFEST["dense_core"], "seed": seed}))
    config = AnalysisConfig(
        interval=IntervalConfig(intervals=(10.0, 20.0, 40.0, 80.0), radii=(30.0, 50.0)),
    )

    # Act
    result = scan(scene, config, HexGrid(config.grid.fine_edge))

    # Assert
    for cell in result.cells():
        for radius in result.radii():
            series = result.series(cell, radius)
            for wide, narrow in zip(series, series[1:]):
                assert narrow.mean_coc_b <= wide.mean_coc_b + 1e-12
                assert narrow.mean_foc_b <= wide.mean_foc_b + 1e-12


@pytest.mark.release
def test_frequency_shrinks_faster_than_completeness() -> None:
    # Arrange
    synth_config = SynthConfig(**MANIFEST["dense_core"])
    scene = generate_city(synth_config)
    config = AnalysisConfig(interval=IntervalConfig(intervals=(10.0, 15.0), radii=(50.0,)))

    # Act
    result = scan(scene, config, HexGrid(config.grid.fine_edge))

    # Assert
    outcomes = []
    for cell in result.cells():
        if cell == "all":
            continue
        _, second = result.series(cell, 50.0)
        if second.norm_coc_b is None or second.norm_foc_b is None:
            continue
        outcomes.append(1.0 - second.norm_foc_b >= 1.0 - second.norm_coc_b)
    assert outcomes
    assert sum(outcomes) >= 0.8 * len(outcomes)
