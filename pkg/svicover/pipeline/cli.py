from __future__ import annotations

import argparse
import logging
import sys
from collections.abc import Sequence
from pathlib import Path

from svicover.common.config import AnalysisConfig
from svicover.common.covlogging import enable_logging
from svicover.common.enums import TableFormat
from svicover.common.error import SviCoverError
from svicover.pipeline.commands import COMMANDS
from svicover.pipeline.commands import CommandContext
from svicover.pipeline.commands import run_command
from svicover.pipeline.manifest import RunManifest


logger = logging.getLogger(__name__)


def _common_arguments() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="the analysis configuration TOML file")
    common.add_argument("--scene", type=Path, help="the scene directory")
    common.add_argument("--out", type=Path, required=True, help="the output directory")
    common.add_argument("--radius", type=float, help="the analysis radius in meters")
    common.add_argument("--interval", type=float, help="a single collection interval in meters")
    common.add_argument("--threshold", type=float, help="the segmentation building threshold")
    common.add_argument("--grid-edge", type=float, help="the fine hexagon edge in meters")
    common.add_argument("--seed", type=int, help="the synthetic city seed")
    common.add_argument("--parallelism", type=int, help="the number of worker processes")
    common.add_argument(
        "--geometric-only",
        action="store_true",
        default=None,
        help="skip the segmentation filter",
    )
    common.add_argument(
        "--sightlines",
        type=Path,
        help="a sightlines table to reuse instead of resolving lines of sight",
    )
    common.add_argument(
        "--sightlines-format",
        default=str(TableFormat.CSV),
        choices=[str(f) for f in TableFormat],
        help="the format of the sightlines table; defaults to `csv`",
    )
    common.add_argument("--scan", type=Path, help="a scan table for `optimal-interval`")
    common.add_argument(
        "--log-level",
        default="INFO",
        help="the log level; defaults to `INFO`",
    )
    return common


_HELP = {
    "synth": "generate a synthetic city scene",
    "coverage": "resolve the lines of sight of a scene",
    "indicators": "compute building coverage indicators",
    "grid-agg": "aggregate coverage per fine hexagon",
    "road-coverage": "measure road length covered by SVI",
    "hotspot": "compute Gi* hotspots per fine hexagon",
    "bias-regression": "regress FoC-A on building type shares",
    "interval-scan": "sweep SVI collection intervals and radii",
    "optimal-interval": "detect the optimal collection interval",
    "summary": "summarize coverage by type, size and population",
}

parser = argparse.ArgumentParser(
    prog="svicover",
    description="Street view imagery coverage of building facades.",
)
subparsers = parser.add_subparsers(dest="command", required=True)
_common = _common_arguments()
for _name in COMMANDS:
    subparsers.add_parser(_name, parents=[_common], help=_HELP[_name])


def main(argv: Sequence[str] | None = None) -> int:
    """
    Run one command.

    Parameters
    ----------
    argv : Sequence[str], optional
        The arguments; `sys.argv[1:]` when unset.

    Returns
    -------
    int
        0 on success, 1 on any error.

    """
    params = parser.parse_args(sys.argv[1:] if argv is None else list(argv))
    enable_logging(params.log_level)

    try:
        config = AnalysisConfig()
        if params.config is not None:
            config = AnalysisConfig.from_toml(params.config)
        config = config.with_overrides(
            radius=params.radius,
            interval=params.interval,
            threshold=params.threshold,
            grid_edge=params.grid_edge,
            seed=params.seed,
            parallelism=params.parallelism,
            geometric_only=params.geometric_only,
        )
        manifest = RunManifest(params.command, config)
        if params.config is not None:
            manifest.add_input(params.config)
        context = CommandContext(
            config=config,
            out=params.out,
            manifest=manifest,
            scene_dir=params.scene,
            sightlines=params.sightlines,
            sightlines_format=TableFormat(params.sightlines_format),
            scan=params.scan,
        )
        outputs = run_command(params.command, context)
    except (SviCoverError, OSError, ValueError) as exc:
        logger.error("%s failed: %s", params.command, exc)
        return 1

    logger.info("%s wrote %s", params.command, ", ".join(outputs))
    return 0
