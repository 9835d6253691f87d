"""
The analysis commands. Each command reads a scene (or an earlier output),
runs one experiment and writes its tables under the output directory
together with a run manifest.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Callable
from collections.abc import Mapping
from collections.abc import Sequence
from dataclasses import dataclass
from dataclasses import field
from pathlib import Path

import pandas as pd

from svicover.common import constants
from svicover.common.config import AnalysisConfig
from svicover.common.enums import Grouping
from svicover.common.enums import HotspotClass
from svicover.common.enums import LevelTag
from svicover.common.enums import SightlineStatus
from svicover.common.enums import TableFormat
from svicover.common.error import FitError
from svicover.common.error import SceneError
from svicover.geometry.primitives import Point2
from svicover.indicators.area import AreaCoverage
from svicover.indicators.area import aggregate_area_coverage
from svicover.indicators.area import cell_of_footprints
from svicover.indicators.area import group_by_cell
from svicover.indicators.building import BuildingCoverage
from svicover.indicators.building import aggregate_building_coverage
from svicover.indicators.building import assign_size_quintiles
from svicover.indicators.building import mark_top_foc_b
from svicover.indicators.population import population_coverage
from svicover.indicators.population import residential_cells
from svicover.indicators.road import road_coverage
from svicover.indicators.road import road_length_by_cell
from svicover.indicators.summary import SPACING_QUANTILES
from svicover.indicators.summary import coverage_summary_by_group
from svicover.indicators.summary import svi_spacing
from svicover.indicators.typemap import load_type_map
from svicover.interval.scan import ScanResult
from svicover.interval.scan import detect_optimal_interval
from svicover.interval.scan import fit_comparison
from svicover.interval.scan import interval_spread
from svicover.interval.scan import scan
from svicover.isovist.engine import SightLine
from svicover.isovist.engine import svis_inside_footprints
from svicover.isovist.index import build_index
from svicover.pipeline import tables
from svicover.pipeline.manifest import RunManifest
from svicover.pipeline.partition import sample_footprints
from svicover.pipeline.partition import scene_sightlines
from svicover.pipeline.scene import Scene
from svicover.pipeline.scene import load_scene
from svicover.pipeline.scene import scene_paths
from svicover.pipeline.scene import write_scene
from svicover.pipeline.synth import SynthConfig
from svicover.pipeline.synth import generate_city
from svicover.stats.hexgrid import CellId
from svicover.stats.hexgrid import HexGrid
from svicover.stats.hotspot import getis_ord_gi_star
from svicover.stats.hotspot import hex_neighbors
from svicover.stats.hotspot import hotspot_profile
from svicover.stats.regression import ols_fit


logger = logging.getLogger(__name__)

# Cell metrics tested for hotspots, as (metric name, cells table column).
HOTSPOT_METRICS = (
    ("coc_a", "gi_z_coc_a"),
    ("mean_coc_b", "gi_z_mean_coc_b"),
    ("road_completeness", "gi_z_road"),
)


@dataclass
class CommandContext:
    """
    The resolved inputs of one command run.

    Attributes
    ----------
    config : AnalysisConfig
        The configuration with command line overrides applied.
    out : Path
        The output directory.
    manifest : RunManifest
        The run record.
    scene_dir : Path, optional
        The scene directory.
    sightlines : Path, optional
        A sightlines table to reuse instead of resolving lines of sight.
    sightlines_format : TableFormat, default csv
        The format of the sightlines table written by `coverage`.
    scan : Path, optional
        A scan table for `optimal-interval`.

    """

    config: AnalysisConfig
    out: Path
    manifest: RunManifest
    scene_dir: Path | None = None
    sightlines: Path | None = None
    sightlines_format: TableFormat = TableFormat.CSV
    scan: Path | None = None
    _scene: Scene | None = field(default=None, init=False, repr=False)

    def fine_grid(self) -> HexGrid:
        grid = self.config.grid
        return HexGrid(grid.fine_edge, Point2(grid.origin_x, grid.origin_y), LevelTag.FINE)

    def load(self) -> Scene:
        """
        Load the scene once, recording every input file.

        Raises
        ------
        SceneError
            If no scene directory was given or it cannot be read.

        """
        if self._scene is not None:
            return self._scene
        if self.scene_dir is None:
            raise SceneError(f"the `{self.manifest.command}` command requires --scene")
        if not self.scene_dir.is_dir():
            raise SceneError("scene directory does not exist", path=self.scene_dir)
        paths = scene_paths(self.scene_dir)
        for path in paths.values():
            if path is not None and path.is_file():
                self.manifest.add_input(path)
        type_map_path = self.config.typemap.path
        if type_map_path is not None:
            self.manifest.add_input(type_map_path)
        with self.manifest.stage("load"):
            self._scene = load_scene(
                type_map=load_type_map(type_map_path),
                crs_note=f"scene {self.scene_dir.name}",
                **paths,  # type: ignore[arg-type]
            )
            self._record_scene(self._scene)
        return self._scene

    def _record_scene(self, scene: Scene) -> None:
        isovist = self.config.isovist
        index = build_index(
            scene.footprints,
            sample_footprints(scene.footprints, isovist.spacing),
            isovist.index_cell_size(),
        )
        inside = svis_inside_footprints(index, scene.svi_points)
        if inside:
            logger.warning("SVI points inside a footprint see nothing: %s", ", ".join(inside))
        self.manifest.record_scene(scene.crs_note, scene.skipped, inside)

    def write(self, frame: pd.DataFrame, name: str) -> None:
        with self.manifest.stage("write"):
            tables.write_csv(frame, self.out / name)
        self.manifest.add_output(name)


def _sightlines(context: CommandContext, scene: Scene) -> list[SightLine]:
    if context.sightlines is not None:
        context.manifest.add_input(context.sightlines)
        with context.manifest.stage("read_sightlines"):
            return tables.read_sightlines(context.sightlines)
    with context.manifest.stage("sightlines"):
        return scene_sightlines(scene, context.config)


def _buildings(
    context: CommandContext,
    scene: Scene,
    grid: HexGrid,
) -> list[BuildingCoverage]:
    lines = _sightlines(context, scene)
    with context.manifest.stage("indicators"):
        samples = sample_footprints(scene.footprints, context.config.isovist.spacing)
        buildings = aggregate_building_coverage(lines, samples, scene.footprints)
        buildings = assign_size_quintiles(buildings)
        cells = cell_of_footprints(scene.footprints, grid)
        return mark_top_foc_b(buildings, cells)


def _areas(
    context: CommandContext,
    scene: Scene,
    grid: HexGrid,
) -> tuple[list[BuildingCoverage], list[AreaCoverage]]:
    buildings = _buildings(context, scene, grid)
    with context.manifest.stage("grid"):
        areas = aggregate_area_coverage(buildings, scene.footprints, grid)
    return buildings, areas


def command_synth(context: CommandContext) -> None:
    """
    Generate a synthetic city scene.
    """
    synth_config = SynthConfig.from_mapping(context.config.synth)
    with context.manifest.stage("synth"):
        scene = generate_city(synth_config)
    context.manifest.record_scene(scene.crs_note, scene.skipped)
    with context.manifest.stage("write"):
        names = write_scene(scene, context.out)
    for name in names:
        context.manifest.add_output(name)


def command_coverage(context: CommandContext) -> None:
    """
    Resolve every line of sight of the scene.
    """
    scene = context.load()
    with context.manifest.stage("sightlines"):
        lines = scene_sightlines(scene, context.config)
    name = f"sightlines.{context.sightlines_format}"
    with context.manifest.stage("write"):
        tables.write_sightlines(lines, context.out / name, context.sightlines_format)
    context.manifest.add_output(name)
    logger.info(
        "%d lines, %d visible",
        len(lines),
        sum(1 for line in lines if line.status == SightlineStatus.VISIBLE),
    )


def command_indicators(context: CommandContext) -> None:
    """
    Compute the building indicators.
    """
    scene = context.load()
    buildings = _buildings(context, scene, context.fine_grid())
    context.write(tables.buildings_frame(buildings), "buildings.csv")


def command_grid_agg(context: CommandContext) -> None:
    """
    Aggregate building coverage per fine cell.
    """
    scene = context.load()
    _, areas = _areas(context, scene, context.fine_grid())
    context.write(tables.area_frame(areas), "cells_agg.csv")
    context.write(tables.foc_a_frame(areas), "foc_a.csv")


def command_road_coverage(context: CommandContext) -> None:
    """
    Measure road completeness per fine cell and over the whole network.
    """
    scene = context.load()
    grid = context.fine_grid()
    positions = [svi.position for svi in scene.svi_points]
    radius = context.config.road.buffer_radius
    with context.manifest.stage("road"):
        per_cell = road_coverage(scene.roads, positions, radius, grid)
        overall = road_coverage(scene.roads, positions, radius)
    context.write(tables.road_frame([*per_cell, *overall]), "road_coverage.csv")


def _cell_values(
    areas: Sequence[AreaCoverage],
    roads: Mapping[CellId, float | None],
) -> dict[CellId, dict[str, float | None]]:
    cells: dict[CellId, dict[str, float | None]] = {}
    for area in areas:
        cells[area.cell_id] = {
            "n_total": area.n_total,
            "n_seen": area.n_seen,
            "coc_a": area.coc_a,
            "mean_coc_b": area.mean_coc_b,
            "road_completeness": None,
        }
    for cell, completeness in roads.items():
        values = cells.setdefault(
            cell,
            {"n_total": 0, "n_seen": 0, "coc_a": None, "mean_coc_b": None},
        )
        values["road_completeness"] = completeness
    return dict(sorted(cells.items()))


def _descriptors(
    scene: Scene,
    grid: HexGrid,
    buildings: Sequence[BuildingCoverage],
) -> dict[CellId, dict[str, float]]:
    """
    Describe the built environment of every cell that holds buildings.
    """
    by_cell = group_by_cell(buildings, cell_of_footprints(scene.footprints, grid))
    road_lengths = road_length_by_cell(scene.roads, grid)
    svi_counts: dict[CellId, int] = {}
    for cell in grid.cells_of([svi.position for svi in scene.svi_points]):
        svi_counts[cell] = svi_counts.get(cell, 0) + 1
    area_km2 = grid.cell_area / 1e6
    return {
        cell: {
            "building_count": float(len(members)),
            "mean_perimeter_m": math.fsum(b.perimeter for b in members) / len(members),
            "road_density_m_per_km2": road_lengths.get(cell, 0.0) / area_km2,
            "svi_count": float(svi_counts.get(cell, 0)),
        }
        for cell, members in by_cell.items()
    }


def command_hotspot(context: CommandContext) -> None:
    """
    Compute Gi* hotspots of completeness and road coverage per fine cell.
    """
    scene = context.load()
    grid = context.fine_grid()
    buildings, areas = _areas(context, scene, grid)
    with context.manifest.stage("road"):
        roads = road_coverage(
            scene.roads,
            [svi.position for svi in scene.svi_points],
            context.config.road.buffer_radius,
            grid,
        )
    cells = _cell_values(areas, {CellId.parse(str(r.cell_id)): r.completeness for r in roads})
    descriptors = _descriptors(scene, grid, buildings)

    hotspot_rows = []
    profile_rows = []
    z_columns: dict[str, dict[CellId, float | None]] = {}
    hotspot = context.config.hotspot
    with context.manifest.stage("hotspot"):
        for metric, column in HOTSPOT_METRICS:
            values = {c: v[metric] for c, v in cells.items() if v[metric] is not None}
            z_columns[column] = {}
            if len(values) < 2:
                logger.warning("too few cells with %s for Gi*: %d", metric, len(values))
                continue
            stars = getis_ord_gi_star(
                values,
                hex_neighbors(grid, list(values)),
                hotspot.z_cutoff,
                hotspot.rank_fraction,
            )
            for star in stars:
                z_columns[column][star.cell_id] = star.z  # type: ignore[index]
                hotspot_rows.append(
                    (
                        metric,
                        str(star.cell_id),
                        star.z,
                        str(star.classification),
                        str(star.rank_class),
                    ),
                )
            for scheme, classes in (
                ("cutoff", {s.cell_id: s.classification for s in stars}),
                ("rank", {s.cell_id: s.rank_class for s in stars}),
            ):
                profile_rows.extend(_profile_rows(metric, scheme, classes, descriptors))

    cells_frame = tables.records_frame(
        (
            (
                str(cell),
                v["n_total"],
                v["n_seen"],
                v["coc_a"],
                v["mean_coc_b"],
                v["road_completeness"],
                *(z_columns[column].get(cell) for _, column in HOTSPOT_METRICS),
            )
            for cell, v in cells.items()
        ),
        constants.CELL_COLUMNS,
        nullable=constants.CELL_COLUMNS[3:],
    )
    context.write(cells_frame, "cells.csv")
    with context.manifest.stage("write"):
        tables.write_cells_geojson(cells_frame, grid, context.out / "cells.geojson")
    context.manifest.add_output("cells.geojson")
    context.write(
        tables.records_frame(
            sorted(hotspot_rows, key=lambda row: (row[0], row[1])),
            ["metric", "cell_id", "z", "classification", "rank_class"],
            nullable=["z"],
        ),
        "hotspots.csv",
    )
    names = sorted({name for d in descriptors.values() for name in d})
    context.write(
        tables.records_frame(
            profile_rows,
            ["metric", "scheme", "class", "n_cells", *names],
            nullable=names,
        ),
        "hotspot_profile.csv",
    )


def _profile_rows(
    metric: str,
    scheme: str,
    classes: Mapping[object, HotspotClass],
    descriptors: Mapping[CellId, Mapping[str, float]],
) -> list[tuple[object, ...]]:
    profile = hotspot_profile(classes, descriptors)  # type: ignore[arg-type]
    names = sorted({name for d in descriptors.values() for name in d})
    rows = []
    for hotspot_class in (HotspotClass.HOT, HotspotClass.COLD, HotspotClass.NEUTRAL):
        count = sum(
            1 for cell, c in classes.items() if c == hotspot_class and cell in descriptors
        )
        means = profile[hotspot_class]
        rows.append(
            (metric, scheme, str(hotspot_class), count, *(means.get(n) for n in names)),
        )
    return rows


def command_bias_regression(context: CommandContext) -> None:
    """
    Regress each type's FoC-A on its share of the cell's buildings.
    """
    scene = context.load()
    _, areas = _areas(context, scene, context.fine_grid())
    points: dict[str, list[tuple[str, float, float]]] = {}
    for area in areas:
        for type_label, foc_a in area.foc_a_by_type.items():
            share = area.count_share(type_label)
            if share is not None:
                points.setdefault(type_label, []).append((str(area.cell_id), share, foc_a))

    rows = []
    with context.manifest.stage("regression"):
        for type_label in sorted(points):
            members = points[type_label]
            try:
                fit = ols_fit([p[1] for p in members], [p[2] for p in members])
            except FitError as exc:
                logger.debug("no regression for %s: %s", type_label, exc)
                rows.append((type_label, len(members), None, None, None))
                continue
            rows.append((type_label, fit.n, fit.slope, fit.intercept, fit.pearson_r))
    context.write(
        tables.records_frame(
            rows,
            ["type", "n", "slope", "intercept", "pearson_r"],
            nullable=["slope", "intercept", "pearson_r"],
        ),
        "bias_regression.csv",
    )
    context.write(
        tables.records_frame(
            (
                (cell_id, type_label, share, foc_a)
                for type_label in sorted(points)
                for cell_id, share, foc_a in points[type_label]
            ),
            ["cell_id", "type", "count_share", "foc_a"],
        ),
        "bias_points.csv",
    )


def _scan(context: CommandContext) -> ScanResult:
    scene = context.load()
    with context.manifest.stage("scan"):
        return scan(scene, context.config, context.fine_grid())


def command_interval_scan(context: CommandContext) -> None:
    """
    Sweep SVI collection intervals and radii.
    """
    result = _scan(context)
    context.write(tables.scan_frame(result), "scan.csv")
    context.write(tables.spread_frame(interval_spread(result)), "interval_spread.csv")


def command_optimal_interval(context: CommandContext) -> None:
    """
    Detect the optimal collection interval of every cell from a scan table or
    a fresh scan of the scene.
    """
    if context.scan is not None:
        context.manifest.add_input(context.scan)
        result = tables.read_scan(context.scan)
    else:
        result = _scan(context)
    sweep = context.config.interval
    with context.manifest.stage("fit"):
        optima = detect_optimal_interval(result, sweep.fit_kind, sweep.poly_degree, sweep.step)
        comparison = fit_comparison(result, sweep.poly_degree)
    context.write(tables.optima_frame(optima), "optima.csv")
    context.write(tables.fit_comparison_frame(comparison), "fit_comparison.csv")


def command_summary(context: CommandContext) -> None:
    """
    Summarize coverage by building type and size, SVI spacing and, with
    population input, the residents reached.
    """
    scene = context.load()
    grid = context.fine_grid()
    buildings = _buildings(context, scene, grid)
    columns = ["group", "n", "share_covered", "mean_coc_b", "mean_coc_b_covered"]
    nullable = columns[2:]
    if buildings:
        context.write(
            tables.records_frame(
                coverage_summary_by_group(buildings, Grouping.TYPE),
                columns,
                nullable,
            ),
            "summary_type.csv",
        )
        context.write(
            tables.records_frame(
                coverage_summary_by_group(buildings, Grouping.PERIMETER_QUINTILE),
                columns,
                nullable,
            ),
            "summary_size.csv",
        )
    else:
        logger.warning("the scene has no buildings; coverage summaries are skipped")

    spacing = svi_spacing([svi.position for svi in scene.svi_points])
    quantile_columns = [f"{name}_m" for name in SPACING_QUANTILES]
    context.write(
        tables.records_frame(
            [
                (
                    spacing.n,
                    *(spacing.quantiles.get(name) for name in SPACING_QUANTILES),
                    spacing.share_near,
                    spacing.near_distance,
                ),
            ],
            ["n", *quantile_columns, "share_near", "near_distance_m"],
            nullable=[*quantile_columns, "share_near"],
        ),
        "svi_spacing.csv",
    )

    if scene.populations is not None:
        by_cell = group_by_cell(buildings, cell_of_footprints(scene.footprints, grid))
        pairs = residential_cells(
            {str(cell): members for cell, members in by_cell.items()},
            scene.populations,
        )
        coverage = population_coverage(pairs.values())
        rows: list[tuple[str, float | None, float, float]] = [
            (cell, coc_a_r, population, (coc_a_r or 0.0) * population)
            for cell, (coc_a_r, population) in pairs.items()
        ]
        rows.append((constants.ALL_CELLS, coverage.ratio, coverage.total, coverage.total_covered))
        context.write(
            tables.records_frame(
                rows,
                ["cell_id", "coc_a_r", "population", "covered_population"],
                nullable=["coc_a_r"],
            ),
            "population.csv",
        )


COMMANDS: dict[str, Callable[[CommandContext], None]] = {
    "synth": command_synth,
    "coverage": command_coverage,
    "indicators": command_indicators,
    "grid-agg": command_grid_agg,
    "road-coverage": command_road_coverage,
    "hotspot": command_hotspot,
    "bias-regression": command_bias_regression,
    "interval-scan": command_interval_scan,
    "optimal-interval": command_optimal_interval,
    "summary": command_summary,
}


def run_command(name: str, context: CommandContext) -> list[str]:
    """
    Run a command and write its manifest.

    Returns
    -------
    list[str]
        The output file names, manifest last.

    Raises
    ------
    ValueError
        If the command is unknown.

    """
    command = COMMANDS.get(name)
    if command is None:
        raise ValueError(f"Unknown command `{name}`. Use any of {sorted(COMMANDS)}.")
    context.out.mkdir(parents=True, exist_ok=True)
    logger.info("running %s into %s", name, context.out)
    command(context)
    context.manifest.write(context.out)
    return [*context.manifest.outputs, constants.MANIFEST_FILE]
