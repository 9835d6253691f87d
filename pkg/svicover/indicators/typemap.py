"""
Building type assignment from land use and OSM building labels.
"""

from __future__ import annotations

import logging
import sys
from collections.abc import Mapping
from collections.abc import Sequence
from dataclasses import dataclass
from importlib import resources
from os import PathLike
from typing import Any

from svicover.common.constants import UNCLASSIFIED
from svicover.common.constants import UNLABELED
from svicover.common.error import ConfigError
from svicover.common.validation import validate_file_read_path


if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib


logger = logging.getLogger(__name__)

DEFAULT_TABLE = "building_types.toml"


@dataclass(frozen=True)
class TypeMap:
    """
    An ordered table of land use categories and the OSM labels they absorb.

    Attributes
    ----------
    rows : tuple[tuple[str, tuple[str, ...]], ...]
        The categories with their OSM labels, in priority order.

    """

    rows: tuple[tuple[str, tuple[str, ...]], ...]

    def __post_init__(self) -> None:
        exact: dict[str, str] = {}
        folded: dict[str, str] = {}
        for name, labels in self.rows:
            for label in labels:
                exact.setdefault(label, name)
                folded.setdefault(label.casefold(), name)
        object.__setattr__(self, "_exact", exact)
        object.__setattr__(self, "_folded", folded)

    @property
    def types(self) -> list[str]:
        return [name for name, _ in self.rows]

    def lookup(self, osm_label: str) -> str | None:
        """
        Return the category of an OSM label, matching exactly first and then
        ignoring case; None for unknown labels.
        """
        exact: dict[str, str] = getattr(self, "_exact")
        folded: dict[str, str] = getattr(self, "_folded")
        return exact.get(osm_label) or folded.get(osm_label.casefold())

    @classmethod
    def from_mapping(cls, document: Mapping[str, Any]) -> TypeMap:
        """
        Build a table from a parsed TOML document holding `[[types]]` entries
        with `name` and `osm` keys.

        Raises
        ------
        ConfigError
            If the document is malformed.

        """
        entries = document.get("types")
        if not isinstance(entries, Sequence) or not entries:
            raise ConfigError("A building type table needs a non-empty `[[types]]` array.")
        rows = []
        for entry in entries:
            try:
                name = str(entry["name"])
                labels = tuple(str(label) for label in entry.get("osm", ()))
            except (KeyError, TypeError) as exc:
                raise ConfigError(f"Malformed building type entry {entry!r}.") from exc
            rows.append((name, labels))
        return cls(tuple(rows))


def load_type_map(path: PathLike[str] | str | None = None) -> TypeMap:
    """
    Load a building type table; the bundled table when `path` is None.

    Parameters
    ----------
    path : PathLike[str] or str, optional
        A replacement table in TOML.

    Returns
    -------
    TypeMap

    Raises
    ------
    ConfigError
        If the file cannot be read or is malformed.

    """
    try:
        if path is None:
            text = resources.files("svicover.data").joinpath(DEFAULT_TABLE).read_text("utf-8")
        else:
            text = validate_file_read_path(path, "typemap").read_text("utf-8")
        document = tomllib.loads(text)
    except (OSError, ValueError) as exc:
        raise ConfigError(f"Could not read building type table `{path}`: {exc}") from exc
    return TypeMap.from_mapping(document)


def map_building_type(
    ccrp_label: str | None,
    osm_label: str | None,
    mapping: TypeMap,
) -> str:
    """
    Assign a building type.

    A land use label wins when present. Otherwise the OSM label is translated
    through the table; labels the table does not know are Unclassified. With
    neither label the building is Unlabeled.

    Parameters
    ----------
    ccrp_label : str, optional
        The land use category.
    osm_label : str, optional
        The OSM `building` tag.
    mapping : TypeMap
        The translation table.

    Returns
    -------
    str

    Examples
    --------
    > map_building_type(None, "apartments", load_type_map())
    'Residential'

    """
    if ccrp_label is not None and str(ccrp_label).strip():
        return str(ccrp_label).strip()
    if osm_label is not None and str(osm_label).strip():
        label = str(osm_label).strip()
        category = mapping.lookup(label)
        if category is None:
            logger.debug("unknown OSM building label %r mapped to %s", label, UNCLASSIFIED)
            return UNCLASSIFIED
        return category
    return UNLABELED
