"""
Tabular outputs: record to `pd.DataFrame` conversion and byte-stable CSV,
Parquet and GeoJSON writers.
"""

from __future__ import annotations

import json
import logging
from collections.abc import Iterable
from collections.abc import Sequence
from os import PathLike
from pathlib import Path
from typing import Any

import numpy as np
import pandas as pd
import pyarrow as pa
import pyarrow.parquet as pq
from shapely.geometry import mapping

from svicover.common import constants
from svicover.common.enums import SightlineStatus
from svicover.common.enums import TableFormat
from svicover.common.error import SceneError
from svicover.common.validation import validate_enum
from svicover.common.validation import validate_file_read_path
from svicover.common.validation import validate_file_write_path
from svicover.indicators.area import AreaCoverage
from svicover.indicators.building import BuildingCoverage
from svicover.indicators.road import RoadCoverage
from svicover.interval.scan import FitComparison
from svicover.interval.scan import Optimum
from svicover.interval.scan import ScanResult
from svicover.interval.scan import SpreadRow
from svicover.isovist.engine import SightLine
from svicover.stats.hexgrid import CellId
from svicover.stats.hexgrid import HexGrid


logger = logging.getLogger(__name__)


def write_csv(frame: pd.DataFrame, path: PathLike[str] | str) -> Path:
    """
    Write a table as CSV with nine significant digits, `.` decimals, `\\n`
    line endings and empty cells for undefined values.
    """
    file_path = validate_file_write_path(path, "path", exist_ok=True)
    frame.to_csv(
        file_path,
        index=False,
        float_format=constants.FLOAT_FORMAT,
        lineterminator="\n",
        na_rep="",
    )
    logger.debug("wrote %d rows to %s", len(frame), file_path)
    return file_path


def write_parquet(frame: pd.DataFrame, path: PathLike[str] | str) -> Path:
    file_path = validate_file_write_path(path, "path", exist_ok=True)
    pq.write_table(pa.Table.from_pandas(frame, preserve_index=False), file_path)
    return file_path


def _optional_int(values: Iterable[int | None]) -> pd.arrays.IntegerArray:
    return pd.array(list(values), dtype="Int64")


def _optional_float(values: Iterable[float | None]) -> np.ndarray:
    # undefined values become NaN, written as empty cells
    return np.array([np.nan if v is None else v for v in values], dtype=np.float64)


def sightlines_frame(lines: Sequence[SightLine]) -> pd.DataFrame:
    return pd.DataFrame(
        {
            "svi_id": [line.svi_id for line in lines],
            "building_id": [line.building_id for line in lines],
            "sample_index": pd.array([line.sample_index for line in lines], dtype="int64"),
            "bearing_deg": pd.array([line.bearing for line in lines], dtype="float64"),
            "distance_m": pd.array([line.distance for line in lines], dtype="float64"),
            "status": [str(line.status) for line in lines],
        },
        columns=constants.SIGHTLINE_COLUMNS,
    )


def write_sightlines(
    lines: Sequence[SightLine],
    path: PathLike[str] | str,
    table_format: TableFormat | str = TableFormat.CSV,
) -> Path:
    """
    Write lines of sight as CSV or Parquet.
    """
    table_format = validate_enum(table_format, TableFormat, "table_format")
    frame = sightlines_frame(lines)
    if table_format == TableFormat.PARQUET:
        return write_parquet(frame, path)
    return write_csv(frame, path)


def read_sightlines(path: PathLike[str] | str) -> list[SightLine]:
    """
    Read a sightlines table written by `write_sightlines`; the format follows
    the file suffix.

    Raises
    ------
    SceneError
        If the table cannot be read or lacks columns.

    """
    file_path = validate_file_read_path(path, "sightlines")
    try:
        if file_path.suffix == ".parquet":
            frame = pq.read_table(file_path).to_pandas()
        else:
            frame = pd.read_csv(file_path, dtype={"svi_id": str, "building_id": str})
        missing = sorted(set(constants.SIGHTLINE_COLUMNS) - set(frame.columns))
        if missing:
            raise ValueError(f"missing columns {missing}")
        return [
            SightLine(
                svi_id=str(svi_id),
                building_id=str(building_id),
                sample_index=int(sample_index),
                bearing=float(bearing_deg),
                distance=float(distance_m),
                status=SightlineStatus(status),
            )
            for svi_id, building_id, sample_index, bearing_deg, distance_m, status in frame[
                constants.SIGHTLINE_COLUMNS
            ].itertuples(index=False, name=None)
        ]
    except (OSError, ValueError, pa.ArrowException) as exc:
        raise SceneError(f"invalid sightlines table: {exc}", path=file_path) from exc


def buildings_frame(buildings: Sequence[BuildingCoverage]) -> pd.DataFrame:
    return pd.DataFrame(
        {
            "building_id": [b.building_id for b in buildings],
            "type": [b.type_label for b in buildings],
            "perimeter_m": pd.array([b.perimeter for b in buildings], dtype="float64"),
            "u_avail": pd.array([b.u_avail for b in buildings], dtype="int64"),
            "u_seen": pd.array([b.u_seen for b in buildings], dtype="int64"),
            "v": pd.array([b.v for b in buildings], dtype="int64"),
            "coc_b": _optional_float(b.coc_b for b in buildings),
            "foc_b": pd.array([b.foc_b for b in buildings], dtype="float64"),
            "quintile": _optional_int(b.size_quintile for b in buildings),
            "top_foc_b": pd.array([int(b.top_foc_b) for b in buildings], dtype="int64"),
        },
        columns=constants.BUILDING_COLUMNS,
    )


def area_frame(areas: Sequence[AreaCoverage]) -> pd.DataFrame:
    return pd.DataFrame(
        {
            "cell_id": [str(a.cell_id) for a in areas],
            "n_total": pd.array([a.n_total for a in areas], dtype="int64"),
            "n_seen": pd.array([a.n_seen for a in areas], dtype="int64"),
            "coc_a": _optional_float(a.coc_a for a in areas),
            "mean_coc_b": _optional_float(a.mean_coc_b for a in areas),
            "v_total": pd.array([sum(a.v_by_type.values()) for a in areas], dtype="int64"),
            "dominant_type": [a.dominant_type for a in areas],
        },
    )


def foc_a_frame(areas: Sequence[AreaCoverage]) -> pd.DataFrame:
    """
    Return one row per cell and building type present in the cell.
    """
    rows = []
    for a in areas:
        for type_label in sorted(a.footprint_count_by_type):
            rows.append(
                (
                    str(a.cell_id),
                    type_label,
                    a.footprint_count_by_type[type_label],
                    a.count_share(type_label),
                    a.v_by_type.get(type_label, 0),
                    a.foc_a_by_type.get(type_label),
                ),
            )
    frame = pd.DataFrame(
        rows,
        columns=["cell_id", "type", "n_buildings", "count_share", "v", "foc_a"],
    )
    return frame.astype({"count_share": "float64", "foc_a": "float64"})


def road_frame(roads: Sequence[RoadCoverage]) -> pd.DataFrame:
    return pd.DataFrame(
        {
            "cell_id": [str(r.cell_id) for r in roads],
            "covered_length_m": pd.array([r.covered_length for r in roads], dtype="float64"),
            "total_length_m": pd.array([r.total_length for r in roads], dtype="float64"),
            "completeness": _optional_float(r.completeness for r in roads),
        },
    )


def records_frame(
    records: Iterable[Sequence[Any]],
    columns: Sequence[str],
    nullable: Sequence[str] = (),
) -> pd.DataFrame:
    """
    Build a frame from row tuples, giving the `nullable` columns a float
    dtype in which undefined values are NaN.
    """
    frame = pd.DataFrame(list(records), columns=list(columns))
    return frame.astype({name: "float64" for name in nullable})


def scan_frame(result: ScanResult) -> pd.DataFrame:
    return records_frame(
        (
            (
                r.cell_id,
                r.radius,
                r.interval,
                r.mean_coc_b,
                r.mean_foc_b,
                r.norm_coc_b,
                r.norm_foc_b,
            )
            for r in result.rows
        ),
        constants.SCAN_COLUMNS,
        nullable=("norm_coc_b", "norm_foc_b"),
    )


def read_scan(path: PathLike[str] | str) -> ScanResult:
    """
    Read a scan table; normalized values are recomputed from the means.

    Raises
    ------
    SceneError
        If the table cannot be read or lacks columns.

    """
    file_path = validate_file_read_path(path, "scan")
    columns = ["cell_id", "radius_m", "interval_m", "mean_coc_b", "mean_foc_b"]
    try:
        frame = pd.read_csv(file_path, dtype={"cell_id": str})
        missing = sorted(set(columns) - set(frame.columns))
        if missing:
            raise ValueError(f"missing columns {missing}")
        return ScanResult.from_means(frame[columns].itertuples(index=False, name=None))
    except (OSError, ValueError) as exc:
        raise SceneError(f"invalid scan table: {exc}", path=file_path) from exc


def spread_frame(spread: Sequence[SpreadRow]) -> pd.DataFrame:
    return records_frame(
        spread,
        [
            "radius_m",
            "interval_m",
            "n_cells",
            "coc_b_q1",
            "coc_b_median",
            "coc_b_q3",
            "foc_b_q1",
            "foc_b_median",
            "foc_b_q3",
        ],
    )


def optima_frame(optima: Sequence[Optimum]) -> pd.DataFrame:
    return records_frame(
        (
            (
                o.cell_id,
                o.radius,
                str(o.fit_kind),
                o.r2_coc,
                o.r2_foc,
                o.optimal_interval,
                str(o.status),
            )
            for o in optima
        ),
        constants.OPTIMA_COLUMNS,
        nullable=("r2_coc", "r2_foc", "optimal_interval_m"),
    )


def fit_comparison_frame(rows: Sequence[FitComparison]) -> pd.DataFrame:
    return records_frame(
        ((r.cell_id, r.radius, str(r.fit_kind), r.r2_coc, r.r2_foc) for r in rows),
        ["cell_id", "radius_m", "fit_kind", "r2_coc", "r2_foc"],
    )


def write_cells_geojson(
    frame: pd.DataFrame,
    grid: HexGrid,
    path: PathLike[str] | str,
) -> Path:
    """
    Write the hexagons of a cell table with the table's columns as feature
    properties; undefined values become null.
    """
    file_path = validate_file_write_path(path, "path", exist_ok=True)
    features = []
    for record in frame.to_dict(orient="records"):
        cell = CellId.parse(str(record["cell_id"]))
        features.append(
            {
                "type": "Feature",
                "geometry": mapping(grid.polygon(cell)),
                "properties": {k: _json_value(v) for k, v in record.items()},
            },
        )
    with open(file_path, "w", encoding="utf-8", newline="\n") as output:
        json.dump({"type": "FeatureCollection", "features": features}, output, sort_keys=True)
        output.write("\n")
    return file_path


def _json_value(value: Any) -> Any:
    if value is None or value is pd.NA:
        return None
    if isinstance(value, float):
        if value != value:
            return None
        return float(constants.FLOAT_FORMAT % value)
    if hasattr(value, "item"):
        return _json_value(value.item())
    return value

