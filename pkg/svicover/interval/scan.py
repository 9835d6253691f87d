"""
The collection-interval experiment: indicator means per cell across SVI
resampling intervals and radii, and detection of the interval at which the
decline of frequency meets the decline of completeness.
"""

from __future__ import annotations

import concurrent.futures
import logging
import math
from collections.abc import Iterable
from collections.abc import Sequence
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from svicover.common.config import AnalysisConfig
from svicover.common.constants import ALL_CELLS
from svicover.common.constants import MIN_FIT_POINTS
from svicover.common.enums import FitKind
from svicover.common.enums import OptimumStatus
from svicover.common.error import FitError
from svicover.common.validation import validate_enum
from svicover.indicators.area import cell_of_footprints
from svicover.indicators.building import BuildingCoverage
from svicover.indicators.building import aggregate_building_coverage
from svicover.indicators.building import mean_coc_b
from svicover.indicators.building import mean_foc_b
from svicover.interval.resample import resample_along_roads
from svicover.interval.resample import snap_to_svi
from svicover.pipeline.partition import PreparedScene
from svicover.pipeline.scene import Scene
from svicover.stats.curves import SPLINE_MIN_POINTS
from svicover.stats.curves import FittedCurve
from svicover.stats.curves import curves_coincide
from svicover.stats.curves import derivative
from svicover.stats.curves import find_intersection
from svicover.stats.curves import fit_curve
from svicover.stats.hexgrid import HexGrid


logger = logging.getLogger(__name__)

# Families compared when the fit kind is `auto`, in tie-breaking order.
AUTO_KINDS = (FitKind.SMOOTHING_SPLINE, FitKind.POLYNOMIAL, FitKind.POWER, FitKind.LOGARITHM)


class ScanRow(NamedTuple):
    """
    The mean indicators of one cell at one radius and interval.

    The normalized values are relative to the cell's value at the smallest
    interval; None when that value is zero.
    """

    cell_id: str
    radius: float
    interval: float
    mean_coc_b: float
    mean_foc_b: float
    norm_coc_b: float | None
    norm_foc_b: float | None


@dataclass(frozen=True)
class ScanResult:
    """
    The rows of an interval scan, sorted by cell, radius and interval.
    """

    rows: tuple[ScanRow, ...]

    def cells(self) -> list[str]:
        return sorted({row.cell_id for row in self.rows})

    def radii(self) -> list[float]:
        return sorted({row.radius for row in self.rows})

    def series(self, cell_id: str, radius: float) -> list[ScanRow]:
        """
        Return the rows of one cell and radius, by increasing interval.
        """
        return [r for r in self.rows if r.cell_id == cell_id and r.radius == radius]

    @classmethod
    def from_means(
        cls,
        means: Iterable[tuple[str, float, float, float, float]],
    ) -> ScanResult:
        """
        Build a scan from `(cell_id, radius, interval, mean_coc_b, mean_foc_b)`
        tuples, normalizing every series by its smallest interval.
        """
        grouped: dict[tuple[str, float], list[tuple[float, float, float]]] = {}
        for cell_id, radius, interval, coc, foc in means:
            grouped.setdefault((str(cell_id), float(radius)), []).append(
                (float(interval), float(coc), float(foc)),
            )
        rows = []
        for (cell_id, radius), values in sorted(grouped.items()):
            values.sort()
            base_coc, base_foc = values[0][1], values[0][2]
            if base_coc == 0 or base_foc == 0:
                logger.debug("cell %s at radius %g has a zero base value", cell_id, radius)
            for interval, coc, foc in values:
                rows.append(
                    ScanRow(
                        cell_id=cell_id,
                        radius=radius,
                        interval=interval,
                        mean_coc_b=coc,
                        mean_foc_b=foc,
                        norm_coc_b=coc / base_coc if base_coc > 0 else None,
                        norm_foc_b=foc / base_foc if base_foc > 0 else None,
                    ),
                )
        return cls(tuple(rows))


def _cell_means(
    buildings: Sequence[BuildingCoverage],
    cells: dict[str, str],
    covered_only: bool,
) -> dict[str, tuple[float, float]]:
    grouped: dict[str, list[BuildingCoverage]] = {}
    for b in buildings:
        grouped.setdefault(cells[b.building_id], []).append(b)
    means = {}
    for cell_id, members in grouped.items():
        coc = mean_coc_b(members, covered_only)
        foc = mean_foc_b(members, covered_only)
        if coc is None or foc is None:
            # no building qualifies; the cell is left out at this interval
            continue
        means[cell_id] = (coc, foc)
    if means:
        means[ALL_CELLS] = (
            math.fsum(v[0] for v in means.values()) / len(means),
            math.fsum(v[1] for v in means.values()) / len(means),
        )
    return means


_WORKER_CONTEXT: dict[str, object] = {}


def _init_worker(prepared: PreparedScene, scene: Scene, config: AnalysisConfig) -> None:
    _WORKER_CONTEXT.update(prepared=prepared, scene=scene, config=config)


def _scan_pair(
    radius: float,
    interval: float,
    cells: dict[str, str],
    prepared: PreparedScene | None = None,
    scene: Scene | None = None,
    config: AnalysisConfig | None = None,
) -> list[tuple[str, float, float, float, float]]:
    prepared = prepared or _WORKER_CONTEXT["prepared"]  # type: ignore[assignment]
    scene = scene or _WORKER_CONTEXT["scene"]  # type: ignore[assignment]
    config = config or _WORKER_CONTEXT["config"]  # type: ignore[assignment]
    positions = resample_along_roads(scene.roads, interval)
    svis = snap_to_svi(positions, scene.svi_points, config.interval.tolerance_for(interval))
    lines = prepared.sightlines(
        svis,
        radius,
        config.isovist.eps,
        scene.bins,
        config.segmentation,
    )
    buildings = aggregate_building_coverage(lines, prepared.samples, prepared.footprints)
    means = _cell_means(buildings, cells, config.interval.covered_only)
    logger.debug(
        "radius %g interval %g: %d SVI, %d cells",
        radius,
        interval,
        len(svis),
        len(means),
    )
    return [(cell, radius, interval, coc, foc) for cell, (coc, foc) in means.items()]


def scan(scene: Scene, config: AnalysisConfig, grid: HexGrid) -> ScanResult:
    """
    Run the interval experiment.

    For every radius and interval the SVI locations are resampled along the
    roads, snapped to the nearest available SVI, and resolved into lines of
    sight. Each fine cell then reports the mean CoC-B and FoC-B of its valid
    buildings; unreached buildings count as zero. The synthetic cell `all`
    holds the mean over the populated cells.

    Parameters
    ----------
    scene : Scene
        The scene; roads, footprints and SVI locations are used.
    config : AnalysisConfig
        The analysis configuration; `interval` holds the sweep.
    grid : HexGrid
        The aggregation grid.

    Returns
    -------
    ScanResult

    """
    sweep = config.interval
    prepared = PreparedScene.build(
        scene.footprints,
        config.isovist.spacing,
        config.isovist.index_cell_size(max(sweep.radii)),
    )
    cells = {k: str(v) for k, v in cell_of_footprints(scene.footprints, grid).items()}
    pairs = [(radius, interval) for radius in sweep.radii for interval in sweep.intervals]
    logger.info(
        "interval scan over %d radii and %d intervals",
        len(sweep.radii),
        len(sweep.intervals),
    )

    means: list[tuple[str, float, float, float, float]] = []
    if config.parallelism <= 1:
        for radius, interval in pairs:
            means.extend(_scan_pair(radius, interval, cells, prepared, scene, config))
    else:
        with concurrent.futures.ProcessPoolExecutor(
            max_workers=config.parallelism,
            initializer=_init_worker,
            initargs=(prepared, scene, config),
        ) as executor:
            futures = [executor.submit(_scan_pair, r, d, cells) for r, d in pairs]
            for future in concurrent.futures.as_completed(futures):
                means.extend(future.result())
    return ScanResult.from_means(means)


class SpreadRow(NamedTuple):
    """
    The quartiles across cells of the mean indicators at one radius and
    interval.
    """

    radius: float
    interval: float
    n_cells: int
    coc_b_q1: float
    coc_b_median: float
    coc_b_q3: float
    foc_b_q1: float
    foc_b_median: float
    foc_b_q3: float


def interval_spread(result: ScanResult) -> list[SpreadRow]:
    """
    Summarize the spread of cell means per radius and interval, leaving out
    the `all` cell.
    """
    grouped: dict[tuple[float, float], list[ScanRow]] = {}
    for row in result.rows:
        if row.cell_id != ALL_CELLS:
            grouped.setdefault((row.radius, row.interval), []).append(row)
    spread = []
    for (radius, interval), rows in sorted(grouped.items()):
        coc = np.quantile([r.mean_coc_b for r in rows], [0.25, 0.5, 0.75])
        foc = np.quantile([r.mean_foc_b for r in rows], [0.25, 0.5, 0.75])
        spread.append(
            SpreadRow(radius, interval, len(rows), *map(float, coc), *map(float, foc)),
        )
    return spread


class Optimum(NamedTuple):
    """
    The detected optimal interval of one cell and radius.

    Attributes
    ----------
    cell_id : str
        The cell, or `all`.
    radius : float
        The analysis radius.
    fit_kind : FitKind
        The curve family used.
    r2_coc, r2_foc : float or None
        The fit quality of the completeness and frequency curves.
    optimal_interval : float or None
        The interval where the derivative curves meet.
    status : OptimumStatus
        The detection outcome.
    curves : tuple[FittedCurve, FittedCurve] or None
        The completeness and frequency fits.

    """

    cell_id: str
    radius: float
    fit_kind: FitKind
    r2_coc: float | None
    r2_foc: float | None
    optimal_interval: float | None
    status: OptimumStatus
    curves: tuple[FittedCurve, FittedCurve] | None = None


class FitComparison(NamedTuple):
    cell_id: str
    radius: float
    fit_kind: FitKind
    r2_coc: float
    r2_foc: float


def _normalized_points(
    rows: Sequence[ScanRow],
) -> tuple[list[tuple[float, float]], list[tuple[float, float]]] | None:
    if any(r.norm_coc_b is None or r.norm_foc_b is None for r in rows):
        return None
    coc = [(r.interval, float(r.norm_coc_b)) for r in rows]  # type: ignore[arg-type]
    foc = [(r.interval, float(r.norm_foc_b)) for r in rows]  # type: ignore[arg-type]
    return coc, foc


def _fit_pair(
    coc: Sequence[tuple[float, float]],
    foc: Sequence[tuple[float, float]],
    kind: FitKind,
    degree: int,
) -> tuple[FittedCurve, FittedCurve]:
    return fit_curve(coc, kind, degree), fit_curve(foc, kind, degree)


def _best_fit(
    coc: Sequence[tuple[float, float]],
    foc: Sequence[tuple[float, float]],
    degree: int,
) -> tuple[FittedCurve, FittedCurve] | None:
    best: tuple[float, tuple[FittedCurve, FittedCurve]] | None = None
    for kind in AUTO_KINDS:
        try:
            pair = _fit_pair(coc, foc, kind, degree)
        except FitError as exc:
            logger.debug("%s fit skipped: %s", kind, exc)
            continue
        score = (pair[0].r2 + pair[1].r2) / 2.0
        if best is None or score > best[0]:
            best = (score, pair)
    return None if best is None else best[1]


def detect_optimal_interval(
    result: ScanResult,
    fit_kind: FitKind | str = FitKind.SMOOTHING_SPLINE,
    degree: int = 3,
    step: float = 0.1,
) -> list[Optimum]:
    """
    Find, per cell and radius, the interval at which the derivatives of the
    fitted completeness and frequency curves meet.

    Both normalized series are fitted with `fit_kind`; with `auto` every
    family is fitted and the one with the highest mean R2 is used. The
    optimum is the first crossing of the derivative curves between the
    smallest and the largest interval.

    Parameters
    ----------
    result : ScanResult
        The scan.
    fit_kind : FitKind or str, default 'smoothing-spline'
        The curve family, or `auto`.
    degree : int, default 3
        The polynomial degree.
    step : float, default 0.1
        The scan step of the crossing search.

    Returns
    -------
    list[Optimum]
        One record per cell and radius, sorted.

    """
    fit_kind = validate_enum(fit_kind, FitKind, "fit_kind")
    optima = []
    for cell_id in result.cells():
        for radius in result.radii():
            rows = result.series(cell_id, radius)
            if rows:
                optima.append(_detect(cell_id, radius, rows, fit_kind, degree, step))
    return optima


def _detect(
    cell_id: str,
    radius: float,
    rows: Sequence[ScanRow],
    fit_kind: FitKind,
    degree: int,
    step: float,
) -> Optimum:
    def outcome(status: OptimumStatus) -> Optimum:
        return Optimum(cell_id, radius, fit_kind, None, None, None, status)

    points = _normalized_points(rows)
    if points is None:
        return outcome(OptimumStatus.ZERO_BASE)
    coc, foc = points
    needed = SPLINE_MIN_POINTS if fit_kind == FitKind.SMOOTHING_SPLINE else MIN_FIT_POINTS
    if len(rows) < needed:
        return outcome(OptimumStatus.INSUFFICIENT)

    if fit_kind == FitKind.AUTO:
        pair = _best_fit(coc, foc, degree)
        if pair is None:
            return outcome(OptimumStatus.INSUFFICIENT)
    else:
        try:
            pair = _fit_pair(coc, foc, fit_kind, degree)
        except FitError as exc:
            logger.debug("fit failed for cell %s at radius %g: %s", cell_id, radius, exc)
            return outcome(OptimumStatus.INSUFFICIENT)

    coc_curve, foc_curve = pair
    d_coc, d_foc = derivative(coc_curve), derivative(foc_curve)
    domain = (rows[0].interval, rows[-1].interval)
    if curves_coincide(d_coc, d_foc, domain, step):
        status, optimum = OptimumStatus.TIE, domain[0]
    else:
        optimum = find_intersection(d_coc, d_foc, domain, step)
        status = OptimumStatus.NONE if optimum is None else OptimumStatus.DETECTED
    return Optimum(
        cell_id,
        radius,
        coc_curve.kind,
        coc_curve.r2,
        foc_curve.r2,
        optimum,
        status,
        pair,
    )


def fit_comparison(result: ScanResult, degree: int = 3) -> list[FitComparison]:
    """
    Fit every curve family to every normalized series and report the R2 of
    each; families that cannot be fitted to a series are left out.
    """
    rows = []
    for cell_id in result.cells():
        for radius in result.radii():
            points = _normalized_points(result.series(cell_id, radius))
            if points is None:
                continue
            for kind in AUTO_KINDS:
                try:
                    coc_curve, foc_curve = _fit_pair(*points, kind, degree)
                except FitError:
                    continue
                rows.append(FitComparison(cell_id, radius, kind, coc_curve.r2, foc_curve.r2))
    return rows
