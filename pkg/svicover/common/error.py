from __future__ import annotations

from os import PathLike


class SviCoverError(Exception):
    """
    Represents a svicover specific error.
    """


class DegenerateGeometryError(SviCoverError, ValueError):
    """
    Represents a geometry that cannot be analyzed, such as a ring with fewer
    than three vertices, a self-intersecting ring, or two coincident points
    where a direction is required.
    """


class SceneError(SviCoverError):
    """
    Represents an input scene that could not be read or validated.

    Parameters
    ----------
    message : str
        The error message.
    path : PathLike[str] or str, optional
        The input file the error originates from.
    feature_id : str, optional
        The id of the offending feature, if any.

    """

    def __init__(
        self,
        message: str,
        path: PathLike[str] | str | None = None,
        feature_id: str | None = None,
    ) -> None:
        super().__init__(message)
        self.message = message
        self.path = path
        self.feature_id = feature_id

    def __str__(self) -> str:
        msg = self.message
        if self.feature_id is not None:
            msg = f"feature `{self.feature_id}`: {msg}"
        if self.path is not None:
            msg = f"{self.path}: {msg}"
        return msg

    def __repr__(self) -> str:
        return (
            f"{type(self).__name__}("
            f"path={self.path}, "
            f"feature_id={self.feature_id}, "
            f"message={self.message})"
        )


class ConfigError(SviCoverError, ValueError):
    """
    Represents an invalid or unreadable analysis configuration.
    """


class FitError(SviCoverError, ValueError):
    """
    Represents a regression or curve fit that cannot be computed from the
    given observations.
    """


class SviCoverWarning(Warning):
    """
    Represents a svicover specific warning.
    """
