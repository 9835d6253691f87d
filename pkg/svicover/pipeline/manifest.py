"""
Run manifests: the inputs, parameters, versions and stage durations of one
command run.
"""

from __future__ import annotations

import hashlib
import json
import logging
import time
from collections.abc import Iterator
from collections.abc import Sequence
from contextlib import contextmanager
from os import PathLike
from pathlib import Path

from svicover.common import constants
from svicover.common.config import AnalysisConfig
from svicover.common.system import library_versions
from svicover.common.types import InputRecordDict
from svicover.common.types import RunManifestDict
from svicover.common.types import SceneRecordDict
from svicover.common.validation import validate_file_read_path
from svicover.common.validation import validate_path


logger = logging.getLogger(__name__)

HASH_READ_SIZE = 8_000_000


def file_sha256(path: PathLike[str] | str) -> str:
    """
    Return the hex SHA-256 digest of a file's contents.
    """
    digest = hashlib.sha256()
    with open(validate_file_read_path(path, "path"), "rb") as fd:
        while chunk := fd.read(HASH_READ_SIZE):
            digest.update(chunk)
    return digest.hexdigest()


class RunManifest:
    """
    Collects the record of one command run and writes it as
    `manifest.json` next to the outputs.

    Parameters
    ----------
    command : str
        The command name.
    config : AnalysisConfig
        The resolved configuration of the run.

    """

    def __init__(self, command: str, config: AnalysisConfig) -> None:
        self._command = command
        self._config = config
        self._inputs: list[InputRecordDict] = []
        self._durations: dict[str, float] = {}
        self._outputs: list[str] = []
        self._scene: SceneRecordDict | None = None

    @property
    def command(self) -> str:
        return self._command

    @property
    def outputs(self) -> list[str]:
        return list(self._outputs)

    def add_input(self, path: PathLike[str] | str) -> None:
        file_path = Path(path)
        self._inputs.append(
            {
                "path": str(path),
                "sha256": file_sha256(file_path),
                "nbytes": file_path.stat().st_size,
            },
        )

    def record_scene(
        self,
        crs_note: str,
        skipped_features: int,
        svis_inside_footprint: Sequence[str] = (),
    ) -> None:
        """
        Record the coordinate note, the rejected feature count and the SVI
        points inside footprints of the analysed scene.
        """
        self._scene = {
            "crs_note": crs_note,
            "skipped_features": skipped_features,
            "svis_inside_footprint": sorted(svis_inside_footprint),
        }

    def add_output(self, name: str) -> None:
        if name not in self._outputs:
            self._outputs.append(name)

    @contextmanager
    def stage(self, name: str) -> Iterator[None]:
        """
        Time the enclosed block as a named stage; repeated stages accumulate.
        """
        start = time.perf_counter()
        try:
            yield
        finally:
            elapsed = time.perf_counter() - start
            self._durations[name] = self._durations.get(name, 0.0) + elapsed
            logger.info("stage %s took %.3f s", name, elapsed)

    def to_dict(self) -> RunManifestDict:
        return {
            "command": self._command,
            "inputs": list(self._inputs),
            "parameters": self._config.to_dict(),
            "versions": library_versions(),
            "durations_s": dict(self._durations),
            "outputs": list(self._outputs),
            "scene": self._scene,
        }

    def write(self, directory: PathLike[str] | str) -> Path:
        path = validate_path(directory, "out") / constants.MANIFEST_FILE
        with open(path, "w", encoding="utf-8", newline="\n") as output:
            json.dump(self.to_dict(), output, indent=2, sort_keys=True)
            output.write("\n")
        return path
