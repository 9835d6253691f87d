from __future__ import annotations

import dataclasses
import json
import pathlib

import pandas as pd
import pytest
from svicover.common.enums import SightlineStatus
from svicover.geometry.primitives import Point2
from svicover.isovist.engine import SviPoint
from svicover.pipeline.cli import main
from svicover.pipeline.scene import Scene
from svicover.pipeline.scene import load_scene_dir
from svicover.pipeline.scene import write_scene
from svicover.pipeline.tables import read_sightlines

from tests.data.generator import SMALL_CITY


@pytest.fixture(name="config_path")
def fixture_config_path(
    tmp_path: pathlib.Path,
) -> pathlib.Path:
    """
    Fixture for a configuration file with a short interval sweep and the
    small synthetic city.

    Returns
    -------
    pathlib.Path

    """
    low, high = SMALL_CITY["building_size_range"]
    synth = "\n".join(
        f"{key} = {value}" for key, value in SMALL_CITY.items() if key != "building_size_range"
    )
    path = tmp_path / "analysis.toml"
    path.write_text(
        "[isovist]\n"
        "radius = 30.0\n"
        "\n"
        "[grid]\n"
        "fine_edge = 30.0\n"
        "\n"
        "[interval]\n"
        "intervals = [10.0, 20.0, 30.0, 40.0, 50.0]\n"
        "radii = [30.0]\n"
        'fit_kind = "polynomial"\n'
        "\n"
        "[synth]\n"
        f"{synth}\n"
        f"building_size_range = [{low}, {high}]\n",
    )
    return path


def _run(command: str, *args: str | pathlib.Path) -> int:
    return main([command, *(str(a) for a in args)])


def test_synth(
    tmp_path: pathlib.Path,
    config_path: pathlib.Path,
    synth_scene: Scene,
) -> None:
    # Arrange
    out = tmp_path / "city"

    # Act
    code = _run("synth", "--config", config_path, "--out", out)

    # Assert
    assert code == 0
    assert sorted(p.name for p in out.iterdir()) == [
        "footprints.geojson",
        "manifest.json",
        "roads.geojson",
        "svi.geojson",
    ]
    loaded = load_scene_dir(out)
    assert loaded.footprints == synth_scene.footprints
    assert loaded.svi_points == synth_scene.svi_points


@pytest.mark.parametrize(
    "command, expected",
    [
        pytest.param("coverage", ["sightlines.csv"], id="coverage"),
        pytest.param("indicators", ["buildings.csv"], id="indicators"),
        pytest.param("grid-agg", ["cells_agg.csv", "foc_a.csv"], id="grid-agg"),
        pytest.param("road-coverage", ["road_coverage.csv"], id="road-coverage"),
        pytest.param(
            "hotspot",
            ["cells.csv", "cells.geojson", "hotspot_profile.csv", "hotspots.csv"],
            id="hotspot",
        ),
        pytest.param(
            "bias-regression",
            ["bias_points.csv", "bias_regression.csv"],
            id="bias-regression",
        ),
        pytest.param("interval-scan", ["interval_spread.csv", "scan.csv"], id="interval-scan"),
        pytest.param(
            "optimal-interval",
            ["fit_comparison.csv", "optima.csv"],
            id="optimal-interval",
        ),
        pytest.param(
            "summary",
            ["summary_size.csv", "summary_type.csv", "svi_spacing.csv"],
            id="summary",
        ),
    ],
)
def test_command_outputs(
    tmp_path: pathlib.Path,
    scene_dir: pathlib.Path,
    config_path: pathlib.Path,
    command: str,
    expected: list[str],
) -> None:
    # Arrange
    out = tmp_path / "out"

    # Act
    code = _run(command, "--scene", scene_dir, "--config", config_path, "--out", out)

    # Assert
    assert code == 0
    assert sorted(p.name for p in out.iterdir()) == sorted([*expected, "manifest.json"])
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["command"] == command
    assert sorted(manifest["outputs"]) == sorted(expected)
    input_names = {pathlib.Path(record["path"]).name for record in manifest["inputs"]}
    assert {"analysis.toml", "footprints.geojson", "roads.geojson", "svi.geojson"} <= input_names


def test_outputs_are_reproducible(
    tmp_path: pathlib.Path,
    scene_dir: pathlib.Path,
    config_path: pathlib.Path,
) -> None:
    # Arrange
    first = tmp_path / "first"
    second = tmp_path / "second"

    # Act
    for out in (first, second):
        assert _run("hotspot", "--scene", scene_dir, "--config", config_path, "--out", out) == 0

    # Assert
    names = sorted(p.name for p in first.iterdir() if p.name != "manifest.json")
    assert names
    for name in names:
        assert (first / name).read_bytes() == (second / name).read_bytes()


def test_parallel_outputs_match_serial(
    tmp_path: pathlib.Path,
    scene_dir: pathlib.Path,
    config_path: pathlib.Path,
) -> None:
    # Arrange
    serial = tmp_path / "serial"
    parallel = tmp_path / "parallel"

    # Act
    _run("indicators", "--scene", scene_dir, "--config", config_path, "--out", serial)
    _run(
        "indicators",
        "--scene",
        scene_dir,
        "--config",
        config_path,
        "--parallelism",
        "2",
        "--out",
        parallel,
    )

    # Assert
    assert (serial / "buildings.csv").read_bytes() == (parallel / "buildings.csv").read_bytes()


def test_reuse_sightlines(
    tmp_path: pathlib.Path,
    scene_dir: pathlib.Path,
    config_path: pathlib.Path,
) -> None:
    # Arrange
    coverage = tmp_path / "coverage"
    common = ["--scene", scene_dir, "--config", config_path]
    _run("coverage", *common, "--sightlines-format", "parquet", "--out", coverage)

    # Act
    fresh = tmp_path / "fresh"
    reused = tmp_path / "reused"
    _run("indicators", *common, "--out", fresh)
    code = _run(
        "indicators",
        *common,
        "--sightlines",
        coverage / "sightlines.parquet",
        "--out",
        reused,
    )

    # Assert
    assert code == 0
    assert read_sightlines(coverage / "sightlines.parquet")
    assert (fresh / "buildings.csv").read_bytes() == (reused / "buildings.csv").read_bytes()


def test_optimal_interval_from_scan_table(
    tmp_path: pathlib.Path,
    scene_dir: pathlib.Path,
    config_path: pathlib.Path,
) -> None:
    # Arrange
    common = ["--scene", scene_dir, "--config", config_path]
    _run("interval-scan", *common, "--out", tmp_path / "scan")
    _run("optimal-interval", *common, "--out", tmp_path / "fresh")

    # Act
    code = _run(
        "optimal-interval",
        "--config",
        config_path,
        "--scan",
        tmp_path / "scan" / "scan.csv",
        "--out",
        tmp_path / "from-table",
    )

    # Assert
    assert code == 0
    fresh = pd.read_csv(tmp_path / "fresh" / "optima.csv")
    from_table = pd.read_csv(tmp_path / "from-table" / "optima.csv")
    assert list(fresh.columns) == list(from_table.columns)
    assert from_table["cell_id"].tolist() == fresh["cell_id"].tolist()
    assert from_table["status"].tolist() == fresh["status"].tolist()


@pytest.mark.parametrize(
    "args",
    [
        pytest.param(["coverage"], id="missing-scene"),
        pytest.param(["coverage", "--scene", "no-such-dir"], id="scene-not-found"),
        pytest.param(["indicators", "--radius", "-1"], id="negative-radius"),
        pytest.param(["synth", "--config", "missing.toml"], id="config-not-found"),
    ],
)
def test_command_errors(
    tmp_path: pathlib.Path,
    args: list[str],
) -> None:
    # Arrange, Act
    code = main([*args, "--out", str(tmp_path / "out")])

    # Assert
    assert code == 1


def test_unknown_config_section(
    tmp_path: pathlib.Path,
    scene_dir: pathlib.Path,
) -> None:
    # Arrange
    config_path = tmp_path / "bad.toml"
    config_path.write_text("[unknown]\nvalue = 1\n")

    # Act
    code = _run("coverage", "--scene", scene_dir, "--config", config_path, "--out", tmp_path)

    # Assert
    assert code == 1


def test_unknown_command_exits(
    tmp_path: pathlib.Path,
) -> None:
    # Arrange, Act, Assert
    with pytest.raises(SystemExit):
        main(["no-such-command", "--out", str(tmp_path)])


def test_manifest_flags_svis_inside_footprints(
    tmp_path: pathlib.Path,
    small_scene: Scene,
) -> None:
    # Arrange
    scene_dir = tmp_path / "inside"
    write_scene(
        dataclasses.replace(
            small_scene,
            svi_points=(*small_scene.svi_points, SviPoint("S3", Point2(5.0, 5.0))),
        ),
        scene_dir,
    )
    out = tmp_path / "out"

    # Act
    code = _run("coverage", "--scene", scene_dir, "--out", out)

    # Assert
    assert code == 0
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["scene"] == {
        "crs_note": "scene inside",
        "skipped_features": 0,
        "svis_inside_footprint": ["S3"],
    }
    lines = read_sightlines(out / "sightlines.csv")
    from_inside = [line for line in lines if line.svi_id == "S3"]
    assert from_inside
    assert {line.status for line in from_inside} == {SightlineStatus.OCCLUDED}


def test_synth_manifest_records_the_scene(
    tmp_path: pathlib.Path,
    config_path: pathlib.Path,
) -> None:
    # Arrange, Act
    _run("synth", "--config", config_path, "--out", tmp_path / "city")

    # Assert
    manifest = json.loads((tmp_path / "city" / "manifest.json").read_text())
    assert manifest["scene"]["crs_note"].startswith("synthetic planar meters")
    assert manifest["scene"]["svis_inside_footprint"] == []
