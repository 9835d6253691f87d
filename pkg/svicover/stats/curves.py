"""
Curve families for indicator-versus-interval series, their derivatives, and
the search for the point where two derivative curves cross.
"""

from __future__ import annotations

import functools
import logging
import math
from collections.abc import Callable
from collections.abc import Sequence
from dataclasses import dataclass
from dataclasses import field
from typing import Any
from typing import Final

import numpy as np
from numpy.polynomial import Polynomial
from scipy import stats
from scipy.interpolate import BSpline
from scipy.interpolate import make_smoothing_spline

from svicover.common import constants
from svicover.common.enums import FitKind
from svicover.common.error import FitError
from svicover.common.validation import validate_enum
from svicover.common.validation import validate_positive


logger = logging.getLogger(__name__)

# The penalized spline solver needs one point more than the other families.
SPLINE_MIN_POINTS: Final = 5

# Differences at or below this magnitude count as zero when comparing curves.
COINCIDENCE_TOLERANCE: Final = 1e-12

SPLINE_PENALTIES: Final = np.logspace(
    math.log10(constants.SPLINE_PENALTY_RANGE[0]),
    math.log10(constants.SPLINE_PENALTY_RANGE[1]),
    constants.SPLINE_PENALTY_CANDIDATES,
)

Evaluable = Callable[[Any], Any]


@dataclass(frozen=True)
class FittedCurve:
    """
    A fitted curve; call it with a number or an array of x values.

    Attributes
    ----------
    kind : FitKind
        The curve family.
    parameters : dict[str, float]
        The fitted parameters: `c0`.. `cN` for polynomials (ascending
        powers), `a` and `b` for `a * x**b` and `a + b * ln(x)`, and `lam`
        for smoothing splines.
    domain : tuple[float, float]
        The x range of the fitted points.
    r2 : float
        The coefficient of determination on the original scale.

    """

    kind: FitKind
    parameters: dict[str, float]
    domain: tuple[float, float]
    r2: float
    spline: BSpline | None = field(default=None, repr=False, compare=False)

    @property
    def degree(self) -> int | None:
        if self.kind != FitKind.POLYNOMIAL:
            return None
        return len(self.parameters) - 1

    def _unit(self, x: Any) -> Any:
        lo, hi = self.domain
        return (np.asarray(x, dtype=np.float64) - lo) / (hi - lo)

    def __call__(self, x: Any) -> Any:
        xs = np.asarray(x, dtype=np.float64)
        if self.kind == FitKind.POLYNOMIAL:
            coef = [self.parameters[f"c{i}"] for i in range(len(self.parameters))]
            return Polynomial(coef)(xs)
        if self.kind == FitKind.POWER:
            return self.parameters["a"] * np.power(xs, self.parameters["b"])
        if self.kind == FitKind.LOGARITHM:
            return self.parameters["a"] + self.parameters["b"] * np.log(xs)
        assert self.spline is not None
        return self.spline(self._unit(xs))


@dataclass(frozen=True)
class DerivativeCurve:
    """
    The analytic first derivative of a `FittedCurve`; callable like it.
    """

    curve: FittedCurve

    def __call__(self, x: Any) -> Any:
        curve = self.curve
        xs = np.asarray(x, dtype=np.float64)
        if curve.kind == FitKind.POLYNOMIAL:
            coef = [curve.parameters[f"c{i}"] for i in range(len(curve.parameters))]
            return Polynomial(coef).deriv()(xs)
        if curve.kind == FitKind.POWER:
            a, b = curve.parameters["a"], curve.parameters["b"]
            return a * b * np.power(xs, b - 1.0)
        if curve.kind == FitKind.LOGARITHM:
            return curve.parameters["b"] / xs
        assert curve.spline is not None
        lo, hi = curve.domain
        return curve.spline.derivative()(curve._unit(xs)) / (hi - lo)


def r_squared(y: np.ndarray, fitted: np.ndarray) -> float:
    """
    Return the coefficient of determination, at most 1.

    A constant response scores 1 when reproduced exactly and 0 otherwise.
    """
    ss_res = float(np.sum((y - fitted) ** 2))
    ss_tot = float(np.sum((y - np.mean(y)) ** 2))
    if ss_tot == 0:
        return 1.0 if np.allclose(fitted, y, rtol=0.0, atol=1e-12) else 0.0
    return min(1.0, 1.0 - ss_res / ss_tot)


def _points(points: Sequence[tuple[float, float]]) -> tuple[np.ndarray, np.ndarray]:
    data = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    order = np.argsort(data[:, 0], kind="stable")
    data = data[order]
    if not np.all(np.isfinite(data)):
        raise FitError("Fit points must be finite.")
    return data[:, 0], data[:, 1]


def fit_curve(
    points: Sequence[tuple[float, float]],
    kind: FitKind | str = FitKind.SMOOTHING_SPLINE,
    degree: int = 3,
) -> FittedCurve:
    """
    Fit a curve family to `(x, y)` points.

    Polynomials are least squares fits. Power and logarithm curves are fitted
    by linear regression on log-transformed values. The smoothing spline is a
    penalized cubic spline whose penalty is chosen by generalized cross
    validation among fixed log-spaced candidates, with x rescaled to [0, 1].
    R2 is always measured on the original scale.

    Parameters
    ----------
    points : Sequence[tuple[float, float]]
        The data, at least four points with distinct x.
    kind : FitKind or str, default 'smoothing-spline'
        The curve family; `auto` is resolved by the caller.
    degree : int, default 3
        The polynomial degree.

    Returns
    -------
    FittedCurve

    Raises
    ------
    FitError
        If there are too few points, x repeats, or x (or y for power curves)
        is not positive for the log-transformed families.

    """
    kind = validate_enum(kind, FitKind, "kind")
    if kind == FitKind.AUTO:
        raise ValueError("The `auto` kind selects among families; fit each one explicitly.")
    x, y = _points(points)
    if len(x) < constants.MIN_FIT_POINTS:
        raise FitError(
            f"A curve requires at least {constants.MIN_FIT_POINTS} points, was {len(x)}.",
        )
    if np.any(np.diff(x) <= 0):
        raise FitError("Fit points must have distinct x values.")
    domain = (float(x[0]), float(x[-1]))

    if kind == FitKind.POLYNOMIAL:
        if degree < 1 or degree >= len(x):
            raise FitError(f"Degree {degree} cannot be fitted to {len(x)} points.")
        poly = Polynomial.fit(x, y, degree).convert()
        coef = np.zeros(degree + 1)
        coef[: len(poly.coef)] = poly.coef
        parameters = {f"c{i}": float(c) for i, c in enumerate(coef)}
        curve = FittedCurve(kind, parameters, domain, 0.0)
    elif kind in (FitKind.POWER, FitKind.LOGARITHM):
        if np.any(x <= 0):
            raise FitError(f"The {kind.value} family requires positive x.")
        if kind == FitKind.POWER:
            if np.any(y <= 0):
                raise FitError("The power family requires positive y.")
            line = stats.linregress(np.log(x), np.log(y))
            parameters = {"a": float(math.exp(line.intercept)), "b": float(line.slope)}
        else:
            line = stats.linregress(np.log(x), y)
            parameters = {"a": float(line.intercept), "b": float(line.slope)}
        curve = FittedCurve(kind, parameters, domain, 0.0)
    else:
        curve = _fit_smoothing_spline(x, y, domain)

    r2 = r_squared(y, np.asarray(curve(x), dtype=np.float64))
    return FittedCurve(curve.kind, curve.parameters, curve.domain, r2, curve.spline)


@functools.lru_cache(maxsize=4096)
def _smoother_trace(u: tuple[float, ...], lam: float) -> float:
    # the smoother is linear in y; its trace comes from fitting unit vectors
    knots = np.asarray(u)
    identity = np.eye(len(knots))
    return math.fsum(
        float(make_smoothing_spline(knots, identity[i], lam=lam)(knots[i]))
        for i in range(len(knots))
    )


def _fit_smoothing_spline(
    x: np.ndarray,
    y: np.ndarray,
    domain: tuple[float, float],
) -> FittedCurve:
    if len(x) < SPLINE_MIN_POINTS:
        raise FitError(
            f"A smoothing spline requires at least {SPLINE_MIN_POINTS} points, was {len(x)}.",
        )
    lo, hi = domain
    u = (x - lo) / (hi - lo)
    n = len(u)
    u_key = tuple(u.tolist())

    best: tuple[float, float, BSpline] | None = None
    for lam in SPLINE_PENALTIES:
        spline = make_smoothing_spline(u, y, lam=float(lam))
        residual = y - spline(u)
        dof = n - _smoother_trace(u_key, float(lam))
        if dof <= 0:
            continue
        score = n * float(np.sum(residual**2)) / (dof * dof)
        if not math.isfinite(score):
            continue
        if best is None or score < best[0]:
            best = (score, float(lam), spline)
    if best is None:
        raise FitError("No smoothing penalty produced a finite cross validation score.")
    _, lam, spline = best
    logger.debug("smoothing spline penalty %g selected", lam)
    return FittedCurve(FitKind.SMOOTHING_SPLINE, {"lam": lam}, domain, 0.0, spline)


def derivative(curve: FittedCurve) -> DerivativeCurve:
    """
    Return the analytic derivative of a fitted curve.
    """
    return DerivativeCurve(curve)


def _grid(lo: float, hi: float, step: float) -> np.ndarray:
    count = int(math.floor((hi - lo) / step + 1e-9))
    grid = lo + np.arange(count + 1, dtype=np.float64) * step
    if grid[-1] < hi:
        grid = np.append(grid, hi)
    return grid


def curves_coincide(
    d1: Evaluable,
    d2: Evaluable,
    domain: tuple[float, float],
    step: float = constants.DEFAULT_INTERSECTION_STEP,
) -> bool:
    """
    Test whether two curves agree at every step of a domain.
    """
    grid = _grid(domain[0], domain[1], validate_positive(step, "step"))
    gap = np.asarray(d1(grid), dtype=np.float64) - np.asarray(d2(grid), dtype=np.float64)
    return bool(np.all(np.abs(gap) <= COINCIDENCE_TOLERANCE))


def find_intersection(
    d1: Evaluable,
    d2: Evaluable,
    domain: tuple[float, float],
    step: float = constants.DEFAULT_INTERSECTION_STEP,
) -> float | None:
    """
    Return the smallest x of a domain where two curves cross.

    The difference `d1 - d2` is evaluated at `lo + k * step` (and at `hi`).
    An exact zero is returned as is; the first sign change is refined by
    bisection to within 1e-3. Curves that coincide everywhere return `lo`.

    Parameters
    ----------
    d1, d2 : Callable
        The curves.
    domain : tuple[float, float]
        The search range (lo, hi) with lo < hi.
    step : float, default 0.1
        The scan step.

    Returns
    -------
    float or None
        None when the curves never cross.

    Raises
    ------
    ValueError
        If the domain is empty or `step` is not positive.

    """
    lo, hi = float(domain[0]), float(domain[1])
    if not lo < hi:
        raise ValueError(f"The `domain` must satisfy lo < hi, was {domain}.")
    step = validate_positive(step, "step")
    if curves_coincide(d1, d2, (lo, hi), step):
        return lo

    def gap(x: float) -> float:
        return float(d1(x)) - float(d2(x))

    grid = _grid(lo, hi, step)
    values = np.asarray(d1(grid), dtype=np.float64) - np.asarray(d2(grid), dtype=np.float64)
    for k in range(len(grid)):
        if values[k] == 0:
            return float(grid[k])
        if k + 1 == len(grid) or values[k + 1] == 0:
            continue
        if np.sign(values[k]) != np.sign(values[k + 1]):
            a, b = float(grid[k]), float(grid[k + 1])
            ga = values[k]
            while b - a > constants.INTERSECTION_TOLERANCE:
                mid = 0.5 * (a + b)
                gm = gap(mid)
                if gm == 0:
                    return mid
                if np.sign(gm) == np.sign(ga):
                    a, ga = mid, gm
                else:
                    b = mid
            return 0.5 * (a + b)
    return None
