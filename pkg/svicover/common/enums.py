from __future__ import annotations

from enum import Enum
from enum import unique
from typing import Callable
from typing import TypeVar


M = TypeVar("M", bound=Enum)


def coercible(enum_type: type[M]) -> type[M]:
    """
    Decorate coercible enumerations.

    Decorating an Enum class with this function will intercept calls to
    __new__ and perform a type coercion for the passed value. The type conversion
    function is chosen based on the subclass of the Enum type.

    Currently supported subclasses types:
        int
            values are passed to int()
        str
            values are passed to str(), the result is also lowercased

    When the coerced value is not a member value, the value is retried as a
    member name, with `.` and `-` read as `_`. This lets `"smoothing_spline"`
    and `"SMOOTHING-SPLINE"` both resolve to `FitKind.SMOOTHING_SPLINE`.

    Parameters
    ----------
    enum_type : EnumMeta
        The decorated Enum type.

    Returns
    -------
    EnumMeta

    Raises
    ------
    ValueError
        If an invalid value of the Enum is given.

    """
    _new: Callable[[type[M], object], M] = enum_type.__new__

    def _cast_str(value: object) -> str:
        return str(value).lower()

    coerce_fn: Callable[[object], str | int]
    if issubclass(enum_type, int):
        coerce_fn = int
    elif issubclass(enum_type, str):
        coerce_fn = _cast_str
    else:
        raise TypeError(f"{enum_type} does not a subclass a coercible type.")

    def coerced_new(enum: type[M], value: object) -> M:
        if value is None:
            raise ValueError(
                f"value `{value}` is not coercible to {enum_type.__name__}.",
            )
        try:
            return _new(enum, coerce_fn(value))
        except ValueError:
            name_to_try = str(value).replace(".", "_").replace("-", "_").upper()
            named = enum._member_map_.get(name_to_try)
            if named is not None:
                return named
            enum_values = list(value for value in enum._value2member_map_)

            raise ValueError(
                f"The `{value}` was not a valid value of {enum_type.__name__}"
                f", was '{value}'. Use any of {enum_values}.",
            ) from None

    setattr(enum_type, "__new__", coerced_new)

    return enum_type


class StringyMixin:
    """
    Mixin class for overloading __str__ on Enum types. For string
    enumerations the value is returned, otherwise the lowercase member name.
    """

    def __str__(self) -> str:
        if isinstance(self, int):
            return getattr(self, "name").lower()
        return getattr(self, "value")


@unique
@coercible
class SightlineStatus(StringyMixin, str, Enum):
    """
    Represents the resolution state of a line of sight.

    Transitions only move forward: a candidate becomes occluded or visible,
    and a visible line may be demoted to segmentation_filtered.

    """

    CANDIDATE = "candidate"
    OCCLUDED = "occluded"
    SEGMENTATION_FILTERED = "segmentation_filtered"
    VISIBLE = "visible"


@unique
@coercible
class MissingPolicy(StringyMixin, str, Enum):
    """
    Represents how visible lines of an SVI point without segmentation bins
    are treated by the segmentation filter.

    - KEEP: lines stay visible (geometric-only mode).
    - DROP: lines are demoted to segmentation_filtered.

    """

    KEEP = "keep"
    DROP = "drop"


@unique
@coercible
class BinOrigin(StringyMixin, str, Enum):
    """
    Represents the anchor of angular bin 0 of a panorama.
    """

    HEADING = "heading"
    NORTH = "north"


@unique
@coercible
class FitKind(StringyMixin, str, Enum):
    """
    Represents a curve family for indicator-versus-interval fits.
    """

    POLYNOMIAL = "polynomial"
    POWER = "power"
    LOGARITHM = "logarithm"
    SMOOTHING_SPLINE = "smoothing-spline"
    AUTO = "auto"


@unique
@coercible
class Grouping(StringyMixin, str, Enum):
    """
    Represents a building grouping for coverage summaries.
    """

    TYPE = "type"
    PERIMETER_QUINTILE = "perimeter-quintile"


@unique
@coercible
class HotspotClass(StringyMixin, str, Enum):
    """
    Represents the classification of a Gi* z-score.
    """

    HOT = "hot"
    COLD = "cold"
    NEUTRAL = "neutral"


@unique
@coercible
class LevelTag(StringyMixin, str, Enum):
    """
    Represents the level of a hexagonal grid in the two-level hierarchy.
    """

    COARSE = "coarse"
    FINE = "fine"


@unique
@coercible
class OptimumStatus(StringyMixin, str, Enum):
    """
    Represents the outcome of an optimal interval detection.

    - DETECTED: the derivative curves cross inside the interval range.
    - NONE: the derivative curves do not cross.
    - TIE: the derivative curves coincide; the minimum interval is reported.
    - ZERO_BASE: an indicator is zero at the minimum interval.
    - INSUFFICIENT: fewer intervals than a fit requires.

    """

    DETECTED = "detected"
    NONE = "none"
    TIE = "tie"
    ZERO_BASE = "zero_base"
    INSUFFICIENT = "insufficient"


@unique
@coercible
class TableFormat(StringyMixin, str, Enum):
    """
    Represents the file format of the sightlines table.
    """

    CSV = "csv"
    PARQUET = "parquet"
