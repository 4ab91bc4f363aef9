"""Ordinary least-squares polynomial fits of plot sets, and the coefficient of determination.

Fits are solved by QR factorization of the Vandermonde matrix of x shifted by its mean and scaled by its
largest absolute deviation; coefficients are then converted back to powers of the raw x, which is what the
coefficient tables report. R² is given in percent and is not clamped.
"""
from dataclasses import dataclass
from typing import Iterable, Sequence, Tuple, Union

import numpy as np
from numpy.polynomial import Polynomial

import decilediff
from .exceptions import InvalidDegree, DegreeTooHigh, RankDeficient, DegenerateVariance, InvalidParameter
from .model import FitRecord

# residual sums below this fraction of sum(p^2) are treated as exact zeros
_ZERO_SS = 1e-24
# relative normal-equation gradient above which a fit is reported as suspect
_GRADIENT_TOLERANCE = 1e-8

CURVE_SAMPLES = 200


@dataclass(frozen=True)
class PolynomialFit:
    degree: int
    coefficients: Tuple[float, ...]     # highest power first: (P1, P2) for a straight line
    r_squared_percent: float
    ss_res: float
    ss_tot: float
    n_points: int
    gradient_norm: float = 0.0

    @property
    def slope(self):
        return self.coefficients[-2]

    @property
    def intercept(self):
        return self.coefficients[-1]

    def to_record(self, pair_label: str) -> FitRecord:
        return FitRecord(pair_label, self.coefficients, self.r_squared_percent)

    def __call__(self, x):
        return evaluate(self, x)


def _as_arrays(points) -> Tuple[np.ndarray, np.ndarray]:
    if hasattr(points, "xs") and hasattr(points, "ps"):
        return np.asarray(points.xs, dtype=float), np.asarray(points.ps, dtype=float)
    pts = np.asarray(list(points), dtype=float)
    if pts.size == 0:
        return np.zeros(0), np.zeros(0)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise InvalidParameter("points must be a sequence of (x, p) pairs")
    return pts[:, 0], pts[:, 1]


def _sums_of_squares(p: np.ndarray, residuals: np.ndarray) -> Tuple[float, float]:
    ss_res = float(np.dot(residuals, residuals))
    dev = p - p.mean()
    ss_tot = float(np.dot(dev, dev))
    return ss_res, ss_tot


def _percent(ss_res: float, ss_tot: float, p: np.ndarray) -> float:
    if ss_tot > 0:
        return 100.0 * (1.0 - ss_res / ss_tot)
    if ss_res <= _ZERO_SS * max(1.0, float(np.dot(p, p))):
        return 100.0
    raise DegenerateVariance(ss_res)


def fit(points, degree: int) -> PolynomialFit:
    """Fits a polynomial of the given degree to (x, p) points by least squares.

    points may be a CumulativePlotSet or any sequence of (x, p) pairs"""
    if degree < 1:
        raise InvalidDegree(degree)
    x, p = _as_arrays(points)
    npoints = len(x)
    if npoints < degree + 1:
        raise DegreeTooHigh(degree, npoints)
    distinct = len(np.unique(x))
    if distinct < degree + 1:
        raise RankDeficient(degree, distinct)

    centre = float(x.mean())
    scale = float(np.max(np.abs(x - centre)))
    t = (x - centre) / scale
    vander = np.vander(t, degree + 1)
    q, r = np.linalg.qr(vander)
    coeffs_t = np.linalg.solve(r, q.T @ p)

    residuals = p - vander @ coeffs_t
    ss_res, ss_tot = _sums_of_squares(p, residuals)
    gradient = vander.T @ residuals
    gradient_norm = float(np.linalg.norm(gradient) / max(np.linalg.norm(vander) * np.linalg.norm(p), 1e-300))
    if gradient_norm > _GRADIENT_TOLERANCE:
        decilediff.logger().warning(f"least-squares solution not optimal to tolerance (gradient {gradient_norm:.3g})")

    # a Polynomial on domain [c-s, c+s] evaluates at (x-c)/s; convert() re-expresses it in powers of x
    raw = Polynomial(coeffs_t[::-1], domain=[centre - scale, centre + scale]).convert().coef
    raw = np.pad(raw, (0, degree + 1 - len(raw)))
    coefficients = tuple(float(c) for c in raw[::-1])

    return PolynomialFit(degree=degree, coefficients=coefficients, r_squared_percent=_percent(ss_res, ss_tot, p),
                         ss_res=ss_res, ss_tot=ss_tot, n_points=npoints, gradient_norm=gradient_norm)


def evaluate(fit: Union[PolynomialFit, Sequence[float]], x):
    """Evaluates the polynomial (Horner scheme) at x, which may be a scalar or an array"""
    coefficients = fit.coefficients if isinstance(fit, PolynomialFit) else fit
    value = np.polyval(np.asarray(coefficients, dtype=float), x)
    return float(value) if np.ndim(value) == 0 else value


def r_squared(points, fit: Union[PolynomialFit, Sequence[float]]) -> float:
    """Coefficient of determination of a polynomial on the given points, in percent"""
    x, p = _as_arrays(points)
    if len(x) == 0:
        raise InvalidParameter("R² needs at least one point")
    residuals = p - np.asarray(evaluate(fit, x))
    ss_res, ss_tot = _sums_of_squares(p, residuals)
    return _percent(ss_res, ss_tot, p)


def sample_curve(fit: PolynomialFit, x_min: float, x_max: float,
                 n: int = CURVE_SAMPLES) -> Iterable[Tuple[float, float]]:
    """n evenly spaced (x, p) samples of the fitted curve over [x_min, x_max]"""
    xs = np.linspace(x_min, x_max, n)
    ps = np.polyval(np.asarray(fit.coefficients), xs)
    return list(zip(xs.tolist(), ps.tolist()))
