"""
Pytest fixtures.
"""

import logging
import pathlib
from collections.abc import Generator
from collections.abc import Iterable

import pytest
from svicover.common.config import AnalysisConfig
from svicover.common.config import IntervalConfig
from svicover.geometry.primitives import Footprint
from svicover.geometry.primitives import Point2
from svicover.geometry.primitives import Road
from svicover.isovist.engine import SviPoint
from svicover.pipeline.scene import Scene
from svicover.pipeline.scene import write_scene
from svicover.pipeline.synth import SynthConfig
from svicover.pipeline.synth import generate_city

from tests.data.generator import SMALL_CITY


def pytest_addoption(parser: pytest.Parser) -> None:
    """
    Customize pytest cli options. This should not be invoked directly.

    Parameters
    ----------
    parser : pytest.Parser
        The pytest argument parser.

    See Also
    --------
    pytest.addoption

    """
    # Add a --release flag
    parser.addoption(
        "--release",
        action="store_true",
        help="indicates release tests should be run",
    )


def pytest_configure(config: pytest.Config) -> None:
    """
    Configure pytest. This should not be invoked directly.

    Parameters
    ----------
    config : pytest.Config
        The pytest configuration.

    """
    # Add custom mark for `release`
    config.addinivalue_line(
        "markers",
        "release: mark tests as release tests (run with --release)",
    )


def pytest_collection_modifyitems(
    config: pytest.Config,
    items: Iterable[pytest.Item],
) -> None:
    """
    Customize test items. This should not be invoked directly.

    Parameters
    ----------
    config : pytest.Config
        The pytest configuration.
    items : Iterable[pytest.Item]
        The pytest test item.

    """
    skip_release = pytest.mark.skip(
        reason="skipping release test (invoke pytest with --release to execute)",
    )

    for item in items:
        # Skip release tests if `--release` was not specified
        if "release" in item.keywords and not config.getoption("--release"):
            item.add_marker(skip_release)


@pytest.fixture(autouse=True)
def fixture_log_capture(
    caplog: pytest.LogCaptureFixture,
) -> Generator[None, None, None]:
    with caplog.at_level(logging.DEBUG):
        yield


@pytest.fixture(name="square")
def fixture_square() -> Footprint:
    """
    Fixture for a 10 m square building with its first vertex at the origin.

    Returns
    -------
    Footprint

    """
    return Footprint.from_coords(
        "B1",
        [(0.0, 0.0), (10.0, 0.0), (10.0, 10.0), (0.0, 10.0)],
        "Residential",
    )


@pytest.fixture(name="occluder")
def fixture_occluder() -> Footprint:
    """
    Fixture for a 10 m square building south of `square`.

    Returns
    -------
    Footprint

    """
    return Footprint.from_coords(
        "B2",
        [(0.0, -15.0), (10.0, -15.0), (10.0, -5.0), (0.0, -5.0)],
        "Retail",
    )


@pytest.fixture(name="south_svi")
def fixture_south_svi() -> SviPoint:
    return SviPoint("S", Point2(5.0, -20.0))


@pytest.fixture(name="small_scene")
def fixture_small_scene(
    square: Footprint,
) -> Scene:
    """
    Fixture for a scene with one building, one road south of it and two SVI
    locations on that road.

    Returns
    -------
    Scene

    """
    return Scene(
        footprints=(square,),
        roads=(Road.from_coords("R1", [(-20.0, -20.0), (30.0, -20.0)]),),
        svi_points=(
            SviPoint("S1", Point2(5.0, -20.0), heading=90.0),
            SviPoint("S2", Point2(25.0, -20.0), heading=90.0),
        ),
        crs_note="test meters",
    )


@pytest.fixture(name="synth_config")
def fixture_synth_config() -> SynthConfig:
    return SynthConfig(**SMALL_CITY)


@pytest.fixture(name="synth_scene")
def fixture_synth_scene(
    synth_config: SynthConfig,
) -> Scene:
    """
    Fixture for a small synthetic city.

    Returns
    -------
    Scene

    """
    return generate_city(synth_config)


@pytest.fixture(name="scene_dir")
def fixture_scene_dir(
    tmp_path: pathlib.Path,
    synth_scene: Scene,
) -> pathlib.Path:
    """
    Fixture for a scene directory holding the small synthetic city.

    Returns
    -------
    pathlib.Path

    """
    directory = tmp_path / "scene"
    write_scene(synth_scene, directory)
    return directory


@pytest.fixture(name="config")
def fixture_config() -> AnalysisConfig:
    """
    Fixture for an analysis configuration with a short interval sweep.

    Returns
    -------
    AnalysisConfig

    """
    return AnalysisConfig(
        interval=IntervalConfig(
            intervals=(10.0, 20.0, 30.0, 40.0, 50.0),
            radii=(30.0,),
        ),
        synth=dict(SMALL_CITY),
    )
