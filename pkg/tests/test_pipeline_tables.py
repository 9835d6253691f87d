from __future__ import annotations

import json
import pathlib

import pytest
from svicover.common.enums import SightlineStatus
from svicover.common.error import SceneError
from svicover.interval.scan import ScanResult
from svicover.isovist.engine import SightLine
from svicover.pipeline.tables import read_scan
from svicover.pipeline.tables import read_sightlines
from svicover.pipeline.tables import records_frame
from svicover.pipeline.tables import scan_frame
from svicover.pipeline.tables import write_cells_geojson
from svicover.pipeline.tables import write_csv
from svicover.pipeline.tables import write_sightlines
from svicover.stats.hexgrid import HexGrid


@pytest.fixture(name="lines")
def fixture_lines() -> list[SightLine]:
    return [
        SightLine("S1", "B1", 0, 345.96375653207352, 20.615528128088304, SightlineStatus.VISIBLE),
        SightLine("S1", "B1", 1, 348.69006752597977, 20.396078054371138, SightlineStatus.OCCLUDED),
        SightLine("S2", "007", 4, 0.0, 5.0, SightlineStatus.SEGMENTATION_FILTERED),
    ]


def test_write_csv_format(
    tmp_path: pathlib.Path,
) -> None:
    # Arrange
    frame = records_frame(
        [("a", 1.0 / 3.0, None), ("b", 2.0, 0.5)],
        ["cell_id", "value", "optional"],
        nullable=("optional",),
    )

    # Act
    path = write_csv(frame, tmp_path / "table.csv")

    # Assert
    assert path.read_bytes() == b"cell_id,value,optional\na,0.333333333,\nb,2,0.5\n"


def test_sightlines_csv_read_back(
    tmp_path: pathlib.Path,
    lines: list[SightLine],
) -> None:
    # Arrange
    path = write_sightlines(lines, tmp_path / "sightlines.csv")

    # Act
    loaded = read_sightlines(path)

    # Assert
    assert [line.key for line in loaded] == [line.key for line in lines]
    assert [line.status for line in loaded] == [line.status for line in lines]
    assert loaded[2].building_id == "007"
    assert [line.bearing for line in loaded] == pytest.approx(
        [line.bearing for line in lines],
        rel=1e-8,
    )


def test_sightlines_parquet_read_back(
    tmp_path: pathlib.Path,
    lines: list[SightLine],
) -> None:
    # Arrange
    path = write_sightlines(lines, tmp_path / "sightlines.parquet", "parquet")

    # Act, Assert
    assert read_sightlines(path) == lines


def test_read_sightlines_rejects_bad_tables(
    tmp_path: pathlib.Path,
) -> None:
    # Arrange
    path = tmp_path / "sightlines.csv"
    path.write_text("svi_id,building_id\nS1,B1\n")

    # Act, Assert
    with pytest.raises(SceneError):
        read_sightlines(path)


def test_read_scan(
    tmp_path: pathlib.Path,
) -> None:
    # Arrange
    result = ScanResult.from_means(
        [
            ("all", 30.0, 10.0, 0.5, 0.4),
            ("all", 30.0, 20.0, 0.25, 0.1),
            ("fine:0:0", 30.0, 10.0, 0.0, 0.0),
        ],
    )
    path = write_csv(scan_frame(result), tmp_path / "scan.csv")

    # Act
    loaded = read_scan(path)

    # Assert
    assert loaded == result
    assert "fine:0:0,30,10,0,0,,\n" in path.read_text()


def test_write_cells_geojson(
    tmp_path: pathlib.Path,
) -> None:
    # Arrange
    grid = HexGrid(10.0)
    frame = records_frame(
        [(str(grid.cell(0, 0)), 0.123456789012, None), (str(grid.cell(1, 0)), 1.0, 2.0)],
        ["cell_id", "mean_coc_b", "gi_z"],
        nullable=("gi_z",),
    )

    # Act
    path = write_cells_geojson(frame, grid, tmp_path / "cells.geojson")

    # Assert
    document = json.loads(path.read_text())
    first, second = document["features"]
    assert first["geometry"]["type"] == "Polygon"
    assert len(first["geometry"]["coordinates"][0]) == 7
    assert first["properties"] == {
        "cell_id": "fine:0:0",
        "mean_coc_b": 0.123456789,
        "gi_z": None,
    }
    assert second["properties"]["gi_z"] == 2.0
