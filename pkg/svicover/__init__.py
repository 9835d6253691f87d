import logging

from svicover.common import covlogging
from svicover.common.config import AnalysisConfig
from svicover.common.enums import BinOrigin
from svicover.common.enums import FitKind
from svicover.common.enums import Grouping
from svicover.common.enums import HotspotClass
from svicover.common.enums import LevelTag
from svicover.common.enums import MissingPolicy
from svicover.common.enums import OptimumStatus
from svicover.common.enums import SightlineStatus
from svicover.common.enums import TableFormat
from svicover.common.error import ConfigError
from svicover.common.error import DegenerateGeometryError
from svicover.common.error import FitError
from svicover.common.error import SceneError
from svicover.common.error import SviCoverError
from svicover.common.error import SviCoverWarning
from svicover.geometry.primitives import Footprint
from svicover.geometry.primitives import Point2
from svicover.geometry.primitives import Road
from svicover.indicators.building import BuildingCoverage
from svicover.isovist.engine import SightLine
from svicover.isovist.engine import SviPoint
from svicover.pipeline.scene import Scene
from svicover.pipeline.scene import load_scene
from svicover.pipeline.scene import load_scene_dir
from svicover.pipeline.synth import SynthConfig
from svicover.pipeline.synth import generate_city
from svicover.stats.hexgrid import CellId
from svicover.stats.hexgrid import HexGrid
from svicover.version import __version__  # noqa


__all__ = [
    "AnalysisConfig",
    "BinOrigin",
    "BuildingCoverage",
    "CellId",
    "ConfigError",
    "DegenerateGeometryError",
    "FitError",
    "FitKind",
    "Footprint",
    "Grouping",
    "HexGrid",
    "HotspotClass",
    "LevelTag",
    "MissingPolicy",
    "OptimumStatus",
    "Point2",
    "Road",
    "Scene",
    "SceneError",
    "SightLine",
    "SightlineStatus",
    "SviCoverError",
    "SviCoverWarning",
    "SviPoint",
    "SynthConfig",
    "TableFormat",
    "generate_city",
    "load_scene",
    "load_scene_dir",
]

# Setup logging
logging.getLogger(__name__).addHandler(logging.NullHandler())

# Convenience imports
enable_logging = covlogging.enable_logging
