import platform
from importlib import metadata
from typing import Final

from svicover.version import __version__


PLATFORM_NAME: Final = platform.system()
PLATFORM_VERSION: Final = platform.release()
PYTHON_VERSION: Final = platform.python_version()

TRACKED_LIBRARIES: Final = ("numpy", "pandas", "scipy", "shapely", "pyarrow")


def library_versions() -> dict[str, str]:
    """
    Return the versions of svicover, Python and the numerical libraries the
    results depend on, for run manifests.

    Returns
    -------
    dict[str, str]

    """
    versions = {
        "svicover": __version__,
        "python": PYTHON_VERSION,
        "platform": f"{PLATFORM_NAME}-{PLATFORM_VERSION}",
    }
    for name in TRACKED_LIBRARIES:
        try:
            versions[name] = metadata.version(name)
        except metadata.PackageNotFoundError:
            versions[name] = "not installed"
    return versions
