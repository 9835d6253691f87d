"""
Scene assembly: reading and writing footprints, roads, SVI locations,
segmentation bins and population tables.
"""

from __future__ import annotations

import json
import logging
import math
import warnings
from collections.abc import Iterable
from collections.abc import Iterator
from collections.abc import Mapping
from dataclasses import dataclass
from dataclasses import field
from os import PathLike
from pathlib import Path
from typing import Any

import pandas as pd
from shapely.geometry import LineString
from shapely.geometry import Point
from shapely.geometry import Polygon
from shapely.geometry import mapping
from shapely.geometry import shape
from shapely.errors import ShapelyError
from shapely.geometry.base import BaseGeometry

from svicover.common import constants
from svicover.common.error import DegenerateGeometryError
from svicover.common.error import SceneError
from svicover.common.error import SviCoverWarning
from svicover.common.validation import validate_file_read_path
from svicover.common.validation import validate_path
from svicover.common.validation import validate_semantic_string
from svicover.geometry.primitives import Footprint
from svicover.geometry.primitives import Point2
from svicover.geometry.primitives import Road
from svicover.indicators.typemap import TypeMap
from svicover.indicators.typemap import load_type_map
from svicover.indicators.typemap import map_building_type
from svicover.isovist.engine import SviPoint
from svicover.segmentation.filter import SegmentationBins
from svicover.segmentation.filter import bins_from_records


logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Scene:
    """
    The inputs of an analysis, in a projected metric CRS.

    Attributes
    ----------
    footprints : tuple[Footprint, ...]
        The buildings.
    roads : tuple[Road, ...]
        The road centerlines.
    svi_points : tuple[SviPoint, ...]
        The SVI locations.
    bins : Mapping[str, SegmentationBins], optional
        The segmentation class areas per SVI id.
    populations : Mapping[str, float], optional
        The population per fine cell id.
    crs_note : str
        Free text describing the coordinate system.
    skipped : int
        Input features rejected while loading.

    Raises
    ------
    SceneError
        If ids repeat within a collection.

    """

    footprints: tuple[Footprint, ...] = ()
    roads: tuple[Road, ...] = ()
    svi_points: tuple[SviPoint, ...] = ()
    bins: Mapping[str, SegmentationBins] | None = None
    populations: Mapping[str, float] | None = None
    crs_note: str = ""
    skipped: int = field(default=0, compare=False)

    def __post_init__(self) -> None:
        for name, items in (
            ("footprints", self.footprints),
            ("roads", self.roads),
            ("svi_points", self.svi_points),
        ):
            seen: set[str] = set()
            for item in items:
                if item.id in seen:
                    raise SceneError(f"duplicate id in {name}", feature_id=item.id)
                seen.add(item.id)

    @property
    def headings(self) -> dict[str, float]:
        return {svi.id: svi.heading for svi in self.svi_points}

    @property
    def bbox(self) -> tuple[float, float, float, float] | None:
        """
        Return the bounding box of every geometry, or None for an empty scene.
        """
        xs: list[float] = []
        ys: list[float] = []
        for fp in self.footprints:
            xs.extend((fp.bbox[0], fp.bbox[2]))
            ys.extend((fp.bbox[1], fp.bbox[3]))
        for road in self.roads:
            xs.extend(v.x for v in road.vertices)
            ys.extend(v.y for v in road.vertices)
        for svi in self.svi_points:
            xs.append(svi.position.x)
            ys.append(svi.position.y)
        if not xs:
            return None
        return (min(xs), min(ys), max(xs), max(ys))


def _features(path: Path) -> Iterator[tuple[str | None, BaseGeometry | None, dict[str, Any]]]:
    try:
        with open(path, encoding="utf-8") as geojson:
            document = json.load(geojson)
    except (OSError, ValueError) as exc:
        raise SceneError(f"could not parse GeoJSON: {exc}", path=path) from exc
    if document.get("type") != "FeatureCollection":
        raise SceneError("expected a GeoJSON FeatureCollection", path=path)
    for feature in document.get("features", []):
        properties = feature.get("properties") or {}
        feature_id = properties.get("id", feature.get("id"))
        if feature_id is not None:
            try:
                feature_id = validate_semantic_string(str(feature_id), "id")
            except ValueError as exc:
                raise SceneError(str(exc), path=path) from exc
        yield feature_id, _geometry(feature_id, feature.get("geometry")), properties


def _geometry(feature_id: str | None, geometry: Any) -> BaseGeometry | None:
    if not geometry:
        return None
    try:
        parsed = shape(geometry)
    except (AttributeError, KeyError, ShapelyError, TypeError, ValueError) as exc:
        logger.debug("invalid geometry on feature `%s`: %s", feature_id, exc)
        return None
    return None if parsed.is_empty else parsed


def _label(value: Any) -> str | None:
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return None
    return str(value)


def read_footprints(
    path: PathLike[str] | str,
    type_map: TypeMap | None = None,
) -> tuple[list[Footprint], int]:
    """
    Read building footprints from a GeoJSON FeatureCollection of Polygons.

    The building type is the `type` property when present, otherwise it is
    derived from the `ccrp_landuse` and `building` properties. Degenerate
    rings are skipped with a warning naming the feature.

    Parameters
    ----------
    path : PathLike[str] or str
        The GeoJSON file.
    type_map : TypeMap, optional
        The OSM label table; the bundled table when unset.

    Returns
    -------
    tuple[list[Footprint], int]
        The footprints and the number of skipped features.

    Raises
    ------
    SceneError
        If the file cannot be parsed or a feature has no id.

    """
    file_path = validate_file_read_path(path, "footprints")
    mapping_table = type_map if type_map is not None else load_type_map()
    footprints = []
    skipped = 0
    for feature_id, geometry, properties in _features(file_path):
        if feature_id is None:
            raise SceneError("footprint feature without an id", path=file_path)
        if geometry is None or geometry.geom_type != "Polygon":
            logger.warning("skipping footprint `%s`: no valid Polygon geometry", feature_id)
            skipped += 1
            continue
        type_label = _label(properties.get("type"))
        if type_label is None:
            type_label = map_building_type(
                _label(properties.get("ccrp_landuse")),
                _label(properties.get("building")),
                mapping_table,
            )
        try:
            footprints.append(
                Footprint.from_coords(feature_id, geometry.exterior.coords, type_label),
            )
        except (DegenerateGeometryError, ValueError) as exc:
            logger.warning("skipping footprint `%s`: %s", feature_id, exc)
            skipped += 1
    return footprints, skipped


def read_roads(path: PathLike[str] | str) -> tuple[list[Road], int]:
    """
    Read road centerlines from a GeoJSON FeatureCollection.

    A MultiLineString becomes one road per part, with ids suffixed `:<k>`.

    Returns
    -------
    tuple[list[Road], int]
        The roads and the number of skipped features.

    """
    file_path = validate_file_read_path(path, "roads")
    roads = []
    skipped = 0
    for feature_id, geometry, _ in _features(file_path):
        if feature_id is None:
            raise SceneError("road feature without an id", path=file_path)
        kind = geometry.geom_type if geometry is not None else None
        if kind == "LineString":
            parts = [(feature_id, list(geometry.coords))]
        elif kind == "MultiLineString":
            parts = [
                (f"{feature_id}:{k}", list(line.coords)) for k, line in enumerate(geometry.geoms)
            ]
        else:
            logger.warning("skipping road `%s`: not a LineString", feature_id)
            skipped += 1
            continue
        for road_id, coords in parts:
            try:
                roads.append(Road.from_coords(road_id, coords))
            except (DegenerateGeometryError, ValueError) as exc:
                logger.warning("skipping road `%s`: %s", road_id, exc)
                skipped += 1
    return roads, skipped


def read_svi(path: PathLike[str] | str) -> tuple[list[SviPoint], int]:
    """
    Read SVI locations from a GeoJSON FeatureCollection of Points carrying a
    `heading` property. Headings are taken modulo 360.

    Returns
    -------
    tuple[list[SviPoint], int]
        The SVI points and the number of skipped features.

    """
    file_path = validate_file_read_path(path, "svi")
    points = []
    skipped = 0
    for feature_id, geometry, properties in _features(file_path):
        if feature_id is None:
            raise SceneError("SVI feature without an id", path=file_path)
        if geometry is None or geometry.geom_type != "Point":
            logger.warning("skipping SVI `%s`: not a Point", feature_id)
            skipped += 1
            continue
        try:
            x, y = geometry.x, geometry.y
            heading = float(properties.get("heading", 0.0)) % 360.0
            points.append(
                SviPoint(
                    id=feature_id,
                    position=Point2(float(x), float(y)),
                    heading=heading,
                    capture_tag=_label(properties.get("capture_tag")),
                ),
            )
        except (TypeError, ValueError) as exc:
            logger.warning("skipping SVI `%s`: %s", feature_id, exc)
            skipped += 1
    return points, skipped


def read_bins(path: PathLike[str] | str) -> dict[str, SegmentationBins]:
    """
    Read the segmentation class areas table `svi_id,bin_index,class_id,area`.

    Raises
    ------
    SceneError
        If the table cannot be read or holds invalid rows.

    """
    file_path = validate_file_read_path(path, "bins")
    try:
        frame = pd.read_csv(file_path, dtype={"svi_id": str})
        missing = sorted(set(constants.BINS_COLUMNS) - set(frame.columns))
        if missing:
            raise ValueError(f"missing columns {missing}")
        records = frame[constants.BINS_COLUMNS].itertuples(index=False, name=None)
        return bins_from_records(records)
    except (OSError, ValueError) as exc:
        raise SceneError(f"invalid segmentation bins: {exc}", path=file_path) from exc


def read_population(path: PathLike[str] | str) -> dict[str, float]:
    """
    Read the population table `cell_id,population`.

    Raises
    ------
    SceneError
        If the table cannot be read, a cell repeats or a population is
        negative.

    """
    file_path = validate_file_read_path(path, "population")
    try:
        frame = pd.read_csv(file_path, dtype={"cell_id": str})
        missing = sorted(set(constants.POPULATION_COLUMNS) - set(frame.columns))
        if missing:
            raise ValueError(f"missing columns {missing}")
    except (OSError, ValueError) as exc:
        raise SceneError(f"invalid population table: {exc}", path=file_path) from exc
    populations: dict[str, float] = {}
    for cell_id, population in frame[constants.POPULATION_COLUMNS].itertuples(
        index=False,
        name=None,
    ):
        if cell_id in populations:
            raise SceneError("duplicate population cell", path=file_path, feature_id=cell_id)
        value = float(population)
        if not math.isfinite(value) or value < 0:
            raise SceneError(
                f"population must be a non-negative number, was {population}",
                path=file_path,
                feature_id=cell_id,
            )
        populations[str(cell_id)] = value
    return populations


def _looks_geographic(scene: Scene) -> bool:
    bbox = scene.bbox
    if bbox is None:
        return False
    minx, miny, maxx, maxy = bbox
    return max(abs(minx), abs(maxx)) <= 180.0 and max(abs(miny), abs(maxy)) <= 90.0


def load_scene(
    footprints_path: PathLike[str] | str,
    roads_path: PathLike[str] | str,
    svi_path: PathLike[str] | str,
    bins_path: PathLike[str] | str | None = None,
    population_path: PathLike[str] | str | None = None,
    type_map: TypeMap | None = None,
    crs_note: str = "",
) -> Scene:
    """
    Load and validate a scene.

    Parameters
    ----------
    footprints_path : PathLike[str] or str
        The footprints GeoJSON.
    roads_path : PathLike[str] or str
        The roads GeoJSON.
    svi_path : PathLike[str] or str
        The SVI GeoJSON.
    bins_path : PathLike[str] or str, optional
        The segmentation bins CSV.
    population_path : PathLike[str] or str, optional
        The population CSV.
    type_map : TypeMap, optional
        The building type table; the bundled table when unset.
    crs_note : str, optional
        A note on the coordinate system, carried into outputs.

    Returns
    -------
    Scene

    Raises
    ------
    SceneError
        If a file cannot be parsed or ids repeat.

    Warns
    -----
    SviCoverWarning
        If every coordinate looks like longitude and latitude.

    """
    footprints, skipped_fp = read_footprints(footprints_path, type_map)
    roads, skipped_roads = read_roads(roads_path)
    svi_points, skipped_svi = read_svi(svi_path)
    scene = Scene(
        footprints=tuple(footprints),
        roads=tuple(roads),
        svi_points=tuple(svi_points),
        bins=read_bins(bins_path) if bins_path is not None else None,
        populations=read_population(population_path) if population_path is not None else None,
        crs_note=crs_note,
        skipped=skipped_fp + skipped_roads + skipped_svi,
    )
    logger.info(
        "loaded %d footprints, %d roads, %d SVI points (%d features skipped)",
        len(scene.footprints),
        len(scene.roads),
        len(scene.svi_points),
        scene.skipped,
    )
    if _looks_geographic(scene):
        message = (
            "All coordinates lie within longitude/latitude ranges; "
            "the analysis expects a projected CRS in meters."
        )
        logger.warning(message)
        warnings.warn(message, SviCoverWarning, stacklevel=2)
    return scene


def scene_paths(directory: PathLike[str] | str) -> dict[str, Path | None]:
    """
    Return the conventional input files of a scene directory; optional files
    that do not exist map to None.
    """
    root = validate_path(directory, "scene")
    bins = root / constants.BINS_FILE
    population = root / constants.POPULATION_FILE
    return {
        "footprints_path": root / constants.FOOTPRINTS_FILE,
        "roads_path": root / constants.ROADS_FILE,
        "svi_path": root / constants.SVI_FILE,
        "bins_path": bins if bins.is_file() else None,
        "population_path": population if population.is_file() else None,
    }


def load_scene_dir(directory: PathLike[str] | str, type_map: TypeMap | None = None) -> Scene:
    """
    Load a scene from a directory holding `footprints.geojson`,
    `roads.geojson`, `svi.geojson` and the optional `bins.csv` and
    `population.csv`.
    """
    if not Path(directory).is_dir():
        raise SceneError("scene directory does not exist", path=directory)
    paths = scene_paths(directory)
    return load_scene(type_map=type_map, **paths)  # type: ignore[arg-type]


def _write_collection(path: Path, features: Iterable[dict[str, Any]]) -> None:
    document = {"type": "FeatureCollection", "features": list(features)}
    with open(path, "w", encoding="utf-8", newline="\n") as output:
        json.dump(document, output, indent=1, sort_keys=True)
        output.write("\n")


def _feature(geometry: Any, properties: dict[str, Any]) -> dict[str, Any]:
    return {"type": "Feature", "geometry": mapping(geometry), "properties": properties}


def write_scene(scene: Scene, directory: PathLike[str] | str) -> list[str]:
    """
    Write a scene as a scene directory: the three GeoJSON files, and the
    segmentation bins and population tables when the scene has them.

    Returns
    -------
    list[str]
        The written file names.

    """
    root = validate_path(directory, "out")
    root.mkdir(parents=True, exist_ok=True)
    _write_collection(
        root / constants.FOOTPRINTS_FILE,
        (
            _feature(Polygon(fp.coords), {"id": fp.id, "type": fp.type_label})
            for fp in scene.footprints
        ),
    )
    _write_collection(
        root / constants.ROADS_FILE,
        (_feature(LineString(road.coords), {"id": road.id}) for road in scene.roads),
    )
    _write_collection(
        root / constants.SVI_FILE,
        (
            _feature(
                Point(svi.position.x, svi.position.y),
                {"id": svi.id, "heading": svi.heading, "capture_tag": svi.capture_tag},
            )
            for svi in scene.svi_points
        ),
    )
    written = [constants.FOOTPRINTS_FILE, constants.ROADS_FILE, constants.SVI_FILE]
    if scene.bins:
        frame = pd.DataFrame(bins_records(scene.bins), columns=constants.BINS_COLUMNS)
        frame.to_csv(root / constants.BINS_FILE, index=False, lineterminator="\n")
        written.append(constants.BINS_FILE)
    if scene.populations:
        frame = pd.DataFrame(
            sorted(scene.populations.items()),
            columns=constants.POPULATION_COLUMNS,
        )
        frame.to_csv(root / constants.POPULATION_FILE, index=False, lineterminator="\n")
        written.append(constants.POPULATION_FILE)
    return written


def bins_records(bins: Mapping[str, SegmentationBins]) -> list[tuple[str, int, int, float]]:
    """
    Flatten segmentation bins into `(svi_id, bin_index, class_id, area)` rows.
    """
    rows = []
    for svi_id in sorted(bins):
        for index, areas in enumerate(bins[svi_id].bins):
            rows.extend((svi_id, index, cid, float(areas[cid])) for cid in sorted(areas))
    return rows
