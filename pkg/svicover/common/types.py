from __future__ import annotations

from typing import Any
from typing import TypedDict


class InputRecordDict(TypedDict):
    """
    Represents one input file recorded in a run manifest.

    Parameters
    ----------
    path : str
        The path as given on the command line.
    sha256 : str
        The hex digest of the file contents.
    nbytes : int
        The size of the file in bytes.

    """

    path: str
    sha256: str
    nbytes: int


class SceneRecordDict(TypedDict):
    """
    Represents the scene summary recorded in a run manifest.

    Parameters
    ----------
    crs_note : str
        The note on the coordinate system of the scene.
    skipped_features : int
        Input features rejected while loading.
    svis_inside_footprint : list[str]
        The ids of SVI points strictly inside a footprint; every line of sight
        from them is occluded.

    """

    crs_note: str
    skipped_features: int
    svis_inside_footprint: list[str]


class RunManifestDict(TypedDict):
    """
    Represents the run manifest written alongside every command output.

    Parameters
    ----------
    command : str
        The CLI command that was run.
    inputs : list[InputRecordDict]
        The input files read by the command.
    parameters : dict[str, Any]
        The resolved analysis parameters.
    versions : dict[str, str]
        Package, interpreter and library versions.
    durations_s : dict[str, float]
        Wall-clock seconds per stage.
    outputs : list[str]
        The output file names written by the command.
    scene : SceneRecordDict or None
        The scene summary; None for commands that read no scene.

    """

    command: str
    inputs: list[InputRecordDict]
    parameters: dict[str, Any]
    versions: dict[str, str]
    durations_s: dict[str, float]
    outputs: list[str]
    scene: SceneRecordDict | None
