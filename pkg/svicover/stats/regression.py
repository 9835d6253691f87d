from __future__ import annotations

from collections.abc import Sequence
from typing import NamedTuple

import numpy as np
from scipy import stats

from svicover.common.error import FitError


class OlsFit(NamedTuple):
    """
    An ordinary least squares line.
    """

    slope: float
    intercept: float
    pearson_r: float
    n: int

    def __call__(self, x: float) -> float:
        return self.slope * x + self.intercept


def ols_fit(x: Sequence[float], y: Sequence[float]) -> OlsFit:
    """
    Fit a least squares line of `y` on `x`.

    Parameters
    ----------
    x : Sequence[float]
        The predictor values.
    y : Sequence[float]
        The response values, as many as `x`.

    Returns
    -------
    OlsFit
        The slope, intercept and Pearson correlation. The correlation is 0
        when `y` is constant.

    Raises
    ------
    FitError
        If there are fewer than two points, the lengths differ, or `x` has no
        variance.

    """
    xs = np.asarray(x, dtype=np.float64)
    ys = np.asarray(y, dtype=np.float64)
    if xs.shape != ys.shape:
        raise FitError(f"x and y must have equal length, were {len(xs)} and {len(ys)}.")
    if len(xs) < 2:
        raise FitError(f"A line requires at least 2 points, was {len(xs)}.")
    if np.all(xs == xs[0]):
        raise FitError("A line cannot be fitted when all x values are identical.")
    result = stats.linregress(xs, ys)
    return OlsFit(
        slope=float(result.slope),
        intercept=float(result.intercept),
        pearson_r=float(np.clip(result.rvalue, -1.0, 1.0)),
        n=len(xs),
    )
