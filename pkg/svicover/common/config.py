"""
Analysis configuration.

All thresholds of the analysis live in one TOML document. Every section maps
onto a frozen dataclass whose defaults are the study defaults, so an empty
file (or no file at all) reproduces the reference settings.
"""

from __future__ import annotations

import dataclasses
import logging
import sys
from collections.abc import Mapping
from dataclasses import dataclass
from dataclasses import field
from os import PathLike
from typing import Any

from svicover.common import constants
from svicover.common.enums import BinOrigin
from svicover.common.enums import FitKind
from svicover.common.enums import MissingPolicy
from svicover.common.error import ConfigError
from svicover.common.validation import validate_enum
from svicover.common.validation import validate_file_read_path
from svicover.common.validation import validate_finite
from svicover.common.validation import validate_non_negative
from svicover.common.validation import validate_positive
from svicover.common.validation import validate_ratio


if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib


logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class IsovistConfig:
    """
    Parameters of the geometric line-of-sight stage.

    Attributes
    ----------
    radius : float, default 50
        The analysis radius in meters.
    spacing : float, default 2
        The facade sampling interval in meters.
    eps : float, default 1e-6
        The target shrink distance in meters.
    cell_size : float, optional
        The scene index cell size; the radius when unset.

    """

    radius: float = constants.DEFAULT_RADIUS
    spacing: float = constants.DEFAULT_SPACING
    eps: float = constants.DEFAULT_EPS
    cell_size: float | None = None

    def __post_init__(self) -> None:
        validate_positive(self.radius, "radius")
        validate_positive(self.spacing, "spacing")
        validate_positive(self.eps, "eps")
        if self.cell_size is not None:
            validate_positive(self.cell_size, "cell_size")

    def index_cell_size(self, radius: float | None = None) -> float:
        """
        Return the scene index cell size; the configured cell size when set,
        otherwise `radius`, or the configured radius when that is unset too.
        """
        if self.cell_size is not None:
            return self.cell_size
        return self.radius if radius is None else radius


@dataclass(frozen=True)
class SegmentationConfig:
    """
    Parameters of the image-content filter.

    Attributes
    ----------
    threshold : float, default 0.5
        The minimum building proportion of a bin.
    missing_policy : MissingPolicy, default keep
        Treatment of SVI points absent from the bins table.
    bin_origin : BinOrigin, default heading
        The anchor of bin 0.
    geometric_only : bool, default False
        Skip the filter even when bins are available.

    """

    threshold: float = constants.DEFAULT_THRESHOLD
    missing_policy: MissingPolicy = MissingPolicy.KEEP
    bin_origin: BinOrigin = BinOrigin.HEADING
    geometric_only: bool = False

    def __post_init__(self) -> None:
        validate_ratio(self.threshold, "threshold")
        object.__setattr__(
            self,
            "missing_policy",
            validate_enum(self.missing_policy, MissingPolicy, "missing_policy"),
        )
        object.__setattr__(
            self,
            "bin_origin",
            validate_enum(self.bin_origin, BinOrigin, "bin_origin"),
        )


@dataclass(frozen=True)
class GridConfig:
    """
    Parameters of the two-level hexagonal grid.

    Attributes
    ----------
    coarse_edge : float, default 1400
        Edge length of partition cells in meters.
    fine_edge : float, default 174
        Edge length of aggregation cells in meters.
    buffer : float, default 200
        Dilation of partition cells in meters.
    origin_x, origin_y : float, default 0
        The grid origin.

    """

    coarse_edge: float = constants.DEFAULT_COARSE_EDGE
    fine_edge: float = constants.DEFAULT_FINE_EDGE
    buffer: float = constants.DEFAULT_PARTITION_BUFFER
    origin_x: float = 0.0
    origin_y: float = 0.0

    def __post_init__(self) -> None:
        validate_positive(self.coarse_edge, "coarse_edge")
        validate_positive(self.fine_edge, "fine_edge")
        validate_non_negative(self.buffer, "buffer")
        validate_finite(self.origin_x, "origin_x")
        validate_finite(self.origin_y, "origin_y")


@dataclass(frozen=True)
class RoadConfig:
    """
    Parameters of road-length coverage.
    """

    buffer_radius: float = constants.DEFAULT_ROAD_BUFFER

    def __post_init__(self) -> None:
        validate_positive(self.buffer_radius, "buffer_radius")


@dataclass(frozen=True)
class HotspotConfig:
    """
    Parameters of the Gi* classification.
    """

    z_cutoff: float = constants.GI_Z_CUTOFF
    rank_fraction: float = constants.GI_RANK_FRACTION

    def __post_init__(self) -> None:
        validate_positive(self.z_cutoff, "z_cutoff")
        validate_ratio(self.rank_fraction, "rank_fraction")


@dataclass(frozen=True)
class IntervalConfig:
    """
    Parameters of the collection-interval experiment.

    Attributes
    ----------
    intervals : tuple[float, ...], default 10..95 step 5
        Resampling intervals in meters, strictly increasing.
    radii : tuple[float, ...], default (30, 40, 50)
        Analysis radii in meters.
    fit_kind : FitKind, default smoothing-spline
        The curve family used for optimum detection.
    poly_degree : int, default 3
        Degree of polynomial fits.
    step : float, default 0.1
        Scan step of the derivative intersection search.
    snap_tolerance : float, optional
        Snap distance; half the interval when unset.
    covered_only : bool, default False
        Restrict means to buildings with at least one visible sample.

    """

    intervals: tuple[float, ...] = constants.DEFAULT_INTERVALS
    radii: tuple[float, ...] = constants.DEFAULT_RADII
    fit_kind: FitKind = FitKind.SMOOTHING_SPLINE
    poly_degree: int = 3
    step: float = constants.DEFAULT_INTERSECTION_STEP
    snap_tolerance: float | None = None
    covered_only: bool = False

    def __post_init__(self) -> None:
        intervals = tuple(validate_positive(d, "intervals") for d in self.intervals)
        if not intervals:
            raise ValueError("The `intervals` cannot be empty.")
        if any(b <= a for a, b in zip(intervals, intervals[1:])):
            raise ValueError(f"The `intervals` must be strictly increasing, was {intervals}.")
        radii = tuple(validate_positive(r, "radii") for r in self.radii)
        if not radii:
            raise ValueError("The `radii` cannot be empty.")
        object.__setattr__(self, "intervals", intervals)
        object.__setattr__(self, "radii", radii)
        object.__setattr__(self, "fit_kind", validate_enum(self.fit_kind, FitKind, "fit_kind"))
        if int(self.poly_degree) != self.poly_degree or self.poly_degree < 1:
            raise ValueError(
                f"The `poly_degree` must be a positive integer, was {self.poly_degree}.",
            )
        validate_positive(self.step, "step")
        if self.snap_tolerance is not None:
            validate_positive(self.snap_tolerance, "snap_tolerance")

    def tolerance_for(self, interval: float) -> float:
        """
        Return the snap tolerance used for the given interval.
        """
        if self.snap_tolerance is not None:
            return self.snap_tolerance
        return interval / 2.0


@dataclass(frozen=True)
class TypemapConfig:
    """
    Location of a replacement building type table.
    """

    path: str | None = None


@dataclass(frozen=True)
class AnalysisConfig:
    """
    The complete analysis configuration.

    Examples
    --------
    > from svicover.common.config import AnalysisConfig
    > config = AnalysisConfig.from_toml("analysis.toml").with_overrides(radius=40)

    """

    isovist: IsovistConfig = field(default_factory=IsovistConfig)
    segmentation: SegmentationConfig = field(default_factory=SegmentationConfig)
    grid: GridConfig = field(default_factory=GridConfig)
    road: RoadConfig = field(default_factory=RoadConfig)
    hotspot: HotspotConfig = field(default_factory=HotspotConfig)
    interval: IntervalConfig = field(default_factory=IntervalConfig)
    typemap: TypemapConfig = field(default_factory=TypemapConfig)
    synth: Mapping[str, Any] = field(default_factory=dict)
    parallelism: int = 1

    def __post_init__(self) -> None:
        if int(self.parallelism) != self.parallelism or self.parallelism < 1:
            raise ValueError(
                f"The `parallelism` must be a positive integer, was {self.parallelism}.",
            )

    @classmethod
    def from_mapping(cls, document: Mapping[str, Any]) -> AnalysisConfig:
        """
        Build a configuration from a parsed TOML document.

        Parameters
        ----------
        document : Mapping[str, Any]
            The parsed document.

        Returns
        -------
        AnalysisConfig

        Raises
        ------
        ConfigError
            If a section or key is unknown, or a value is invalid.

        """
        sections: dict[str, type[Any]] = {
            "isovist": IsovistConfig,
            "segmentation": SegmentationConfig,
            "grid": GridConfig,
            "road": RoadConfig,
            "hotspot": HotspotConfig,
            "interval": IntervalConfig,
            "typemap": TypemapConfig,
        }
        kwargs: dict[str, Any] = {}
        for key, value in document.items():
            if key == "synth":
                kwargs["synth"] = dict(value)
            elif key == "parallelism":
                kwargs["parallelism"] = value
            elif key in sections:
                if not isinstance(value, Mapping):
                    raise ConfigError(f"The `[{key}]` section must be a table.")
                section_type = sections[key]
                known = {f.name for f in dataclasses.fields(section_type)}
                unknown = sorted(set(value) - known)
                if unknown:
                    raise ConfigError(f"Unknown keys in `[{key}]`: {unknown}.")
                values = {
                    k: tuple(v) if isinstance(v, list) else v for k, v in value.items()
                }
                try:
                    kwargs[key] = section_type(**values)
                except (TypeError, ValueError) as exc:
                    raise ConfigError(f"Invalid `[{key}]` section: {exc}") from exc
            else:
                raise ConfigError(f"Unknown configuration section `{key}`.")
        try:
            return cls(**kwargs)
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def from_toml(cls, path: PathLike[str] | str) -> AnalysisConfig:
        """
        Read a configuration from a TOML file.

        Parameters
        ----------
        path : PathLike[str] or str
            The configuration file.

        Returns
        -------
        AnalysisConfig

        Raises
        ------
        ConfigError
            If the file cannot be read or parsed, or holds invalid values.

        """
        try:
            config_path = validate_file_read_path(path, "config")
            with open(config_path, "rb") as config_file:
                document = tomllib.load(config_file)
        except (OSError, tomllib.TOMLDecodeError) as exc:
            raise ConfigError(f"Could not read configuration `{path}`: {exc}") from exc
        logger.debug("loaded configuration from %s", path)
        return cls.from_mapping(document)

    def with_overrides(
        self,
        radius: float | None = None,
        interval: float | None = None,
        threshold: float | None = None,
        grid_edge: float | None = None,
        seed: int | None = None,
        parallelism: int | None = None,
        geometric_only: bool | None = None,
    ) -> AnalysisConfig:
        """
        Return a copy with command line overrides applied. Arguments left as
        `None` keep the configured value.

        A single `interval` replaces the interval sweep with that one value;
        `radius` sets both the isovist radius and the sweep radii.

        Returns
        -------
        AnalysisConfig

        Raises
        ------
        ConfigError
            If an override value is invalid.

        """
        config = self
        try:
            if radius is not None:
                config = dataclasses.replace(
                    config,
                    isovist=dataclasses.replace(config.isovist, radius=radius),
                    interval=dataclasses.replace(config.interval, radii=(radius,)),
                )
            if interval is not None:
                config = dataclasses.replace(
                    config,
                    interval=dataclasses.replace(config.interval, intervals=(interval,)),
                )
            if threshold is not None:
                config = dataclasses.replace(
                    config,
                    segmentation=dataclasses.replace(config.segmentation, threshold=threshold),
                )
            if geometric_only is not None:
                config = dataclasses.replace(
                    config,
                    segmentation=dataclasses.replace(
                        config.segmentation,
                        geometric_only=geometric_only,
                    ),
                )
            if grid_edge is not None:
                config = dataclasses.replace(
                    config,
                    grid=dataclasses.replace(config.grid, fine_edge=grid_edge),
                )
            if seed is not None:
                config = dataclasses.replace(config, synth={**config.synth, "seed": seed})
            if parallelism is not None:
                config = dataclasses.replace(config, parallelism=parallelism)
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc
        return config

    def to_dict(self) -> dict[str, Any]:
        """
        Return the configuration as plain data, for run manifests.
        """
        document = dataclasses.asdict(self)
        document["synth"] = dict(self.synth)
        return _plain(document)


def _plain(value: Any) -> Any:
    if isinstance(value, Mapping):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, str):
        return str(value)
    return value
