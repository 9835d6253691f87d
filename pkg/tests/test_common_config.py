from __future__ import annotations

import json
from pathlib import Path
from typing import Any

import pytest
from svicover.common import constants
from svicover.common.config import AnalysisConfig
from svicover.common.config import IntervalConfig
from svicover.common.enums import BinOrigin
from svicover.common.enums import FitKind
from svicover.common.enums import MissingPolicy
from svicover.common.error import ConfigError


def test_default_config_matches_study_defaults() -> None:
    # Arrange, Act
    config = AnalysisConfig()

    # Assert
    assert config.isovist.radius == 50.0
    assert config.isovist.spacing == 2.0
    assert config.isovist.index_cell_size() == 50.0
    assert config.isovist.index_cell_size(30.0) == 30.0
    assert config.segmentation.threshold == 0.5
    assert config.segmentation.missing_policy == MissingPolicy.KEEP
    assert config.segmentation.bin_origin == BinOrigin.HEADING
    assert config.grid.coarse_edge == 1400.0
    assert config.grid.fine_edge == 174.0
    assert config.road.buffer_radius == 50.0
    assert config.hotspot.z_cutoff == 1.96
    assert config.interval.intervals == tuple(float(d) for d in range(10, 100, 5))
    assert config.interval.radii == (30.0, 40.0, 50.0)
    assert config.interval.fit_kind == FitKind.SMOOTHING_SPLINE
    assert config.parallelism == 1


def test_configured_index_cell_size_wins() -> None:
    # Arrange
    config = AnalysisConfig.from_mapping({"isovist": {"cell_size": 80.0}})

    # Act, Assert
    assert config.isovist.index_cell_size() == 80.0
    assert config.isovist.index_cell_size(30.0) == 80.0


def test_from_toml(
    tmp_path: Path,
) -> None:
    # Arrange
    path = tmp_path / "analysis.toml"
    path.write_text(
        "\n".join(
            [
                "parallelism = 2",
                "[isovist]",
                "radius = 40.0",
                "[segmentation]",
                'missing_policy = "drop"',
                'bin_origin = "north"',
                "[interval]",
                "intervals = [10.0, 20.0, 30.0]",
                'fit_kind = "polynomial"',
                "[synth]",
                "seed = 3",
            ],
        ),
    )

    # Act
    config = AnalysisConfig.from_toml(path)

    # Assert
    assert config.parallelism == 2
    assert config.isovist.radius == 40.0
    assert config.segmentation.missing_policy == MissingPolicy.DROP
    assert config.segmentation.bin_origin == BinOrigin.NORTH
    assert config.interval.intervals == (10.0, 20.0, 30.0)
    assert config.interval.fit_kind == FitKind.POLYNOMIAL
    assert config.synth == {"seed": 3}


@pytest.mark.parametrize(
    "document",
    [
        pytest.param({"isovistt": {}}, id="unknown-section"),
        pytest.param({"isovist": {"radios": 5}}, id="unknown-key"),
        pytest.param({"isovist": {"radius": -5}}, id="negative-radius"),
        pytest.param({"segmentation": {"threshold": 1.5}}, id="threshold-range"),
        pytest.param({"interval": {"intervals": [20, 10]}}, id="decreasing-intervals"),
        pytest.param({"interval": {"fit_kind": "cubic"}}, id="unknown-fit"),
        pytest.param({"parallelism": 0}, id="parallelism"),
        pytest.param({"grid": 5}, id="not-a-table"),
    ],
)
def test_from_mapping_rejects_invalid_documents(
    document: dict[str, Any],
) -> None:
    # Arrange, Act, Assert
    with pytest.raises(ConfigError):
        AnalysisConfig.from_mapping(document)


def test_from_toml_unreadable(
    tmp_path: Path,
) -> None:
    # Arrange
    path = tmp_path / "broken.toml"
    path.write_text("[isovist\nradius = ")

    # Act, Assert
    with pytest.raises(ConfigError):
        AnalysisConfig.from_toml(path)

    with pytest.raises(ConfigError):
        AnalysisConfig.from_toml(tmp_path / "missing.toml")


def test_with_overrides() -> None:
    # Arrange
    config = AnalysisConfig()

    # Act
    overridden = config.with_overrides(
        radius=30.0,
        interval=25.0,
        threshold=0.3,
        grid_edge=100.0,
        seed=11,
        parallelism=4,
        geometric_only=True,
    )

    # Assert
    assert overridden.isovist.radius == 30.0
    assert overridden.interval.radii == (30.0,)
    assert overridden.interval.intervals == (25.0,)
    assert overridden.segmentation.threshold == 0.3
    assert overridden.segmentation.geometric_only
    assert overridden.grid.fine_edge == 100.0
    assert overridden.synth["seed"] == 11
    assert overridden.parallelism == 4
    assert config == AnalysisConfig()


def test_with_overrides_none_keeps_values() -> None:
    # Arrange
    config = AnalysisConfig().with_overrides(radius=40.0)

    # Act, Assert
    assert config.with_overrides() == config


def test_with_overrides_invalid() -> None:
    # Arrange, Act, Assert
    with pytest.raises(ConfigError):
        AnalysisConfig().with_overrides(threshold=2.0)


def test_to_dict_is_json_serializable() -> None:
    # Arrange
    config = AnalysisConfig().with_overrides(seed=5)

    # Act
    document = config.to_dict()

    # Assert
    text = json.dumps(document, sort_keys=True)
    assert json.loads(text)["isovist"]["radius"] == constants.DEFAULT_RADIUS
    assert document["segmentation"]["missing_policy"] == "keep"
    assert document["interval"]["fit_kind"] == "smoothing-spline"
    assert document["synth"] == {"seed": 5}


@pytest.mark.parametrize(
    "snap_tolerance, interval, expected",
    [
        pytest.param(None, 30.0, 15.0, id="half-interval"),
        pytest.param(2.0, 30.0, 2.0, id="fixed"),
    ],
)
def test_interval_tolerance_for(
    snap_tolerance: float | None,
    interval: float,
    expected: float,
) -> None:
    # Arrange
    sweep = IntervalConfig(snap_tolerance=snap_tolerance)

    # Act, Assert
    assert sweep.tolerance_for(interval) == expected
