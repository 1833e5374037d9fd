"""Least-squares growth/decay fits on sampled radial data.

Asymptotic conditions (volume growth targets, coefficient decay floors,
integrability of reciprocals) are decided from finite samples by fitting
log-log or log-linear models and comparing the fitted rate against the
target with a small slack.  The slack absorbs logarithmic corrections and
finite-range effects; 0.05 is the package-wide default.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SLACK = 0.05

HOLDS = "holds"
FAILS = "fails"
INCONCLUSIVE = "inconclusive"


@dataclass
class RateFit:
    """Fitted rate of y against x under a given model.

    model "power":       log y = slope * log x + intercept
    model "exponential": log y = slope * x + intercept
    """

    model: str
    slope: float
    intercept: float
    rms_residual: float


def _lsq_line(x: np.ndarray, y: np.ndarray) -> tuple[float, float, float]:
    A = np.vstack([x, np.ones_like(x)]).T
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - A @ coef
    rms = float(np.sqrt(np.mean(resid**2)))
    return float(coef[0]), float(coef[1]), rms


def power_fit(r: np.ndarray, y: np.ndarray) -> RateFit:
    """Fit y ~ c * r**s on strictly positive samples."""
    r = np.asarray(r, dtype=float)
    y = np.asarray(y, dtype=float)
    mask = (r > 0) & (y > 0)
    if mask.sum() < 3:
        return RateFit("power", float("nan"), float("nan"), float("inf"))
    s, b, rms = _lsq_line(np.log(r[mask]), np.log(y[mask]))
    return RateFit("power", s, b, rms)


def exponential_fit(r: np.ndarray, y: np.ndarray) -> RateFit:
    """Fit y ~ c * exp(k*r) on strictly positive samples."""
    r = np.asarray(r, dtype=float)
    y = np.asarray(y, dtype=float)
    mask = y > 0
    if mask.sum() < 3:
        return RateFit("exponential", float("nan"), float("nan"), float("inf"))
    k, b, rms = _lsq_line(r[mask], np.log(y[mask]))
    return RateFit("exponential", k, b, rms)


def preferred_model(r: np.ndarray, y: np.ndarray) -> tuple[RateFit, RateFit]:
    """Return (best, other) among the power and exponential fits.

    The exponential model wins only when it reduces the rms residual by a
    factor of two; ties go to the power model, which is the conservative
    choice for polynomial growth targets.
    """
    p = power_fit(r, y)
    e = exponential_fit(r, y)
    if np.isfinite(e.rms_residual) and e.rms_residual < 0.5 * p.rms_residual:
        return e, p
    return p, e


def tail_exponent(r: np.ndarray, y: np.ndarray, window: int = 8) -> float:
    """Local log-log slope over the last `window` samples.

    More robust than a global fit when the data has a transient head; used
    for convergence decisions about tail integrals.
    """
    r = np.asarray(r, dtype=float)
    y = np.asarray(y, dtype=float)
    mask = (r > 0) & (y > 0)
    r, y = r[mask], y[mask]
    if r.size < 3:
        return float("nan")
    w = min(window, r.size)
    s, _, _ = _lsq_line(np.log(r[-w:]), np.log(y[-w:]))
    return s


def geometric_radii(lo: float, hi: float, count: int = 25) -> np.ndarray:
    if not (0 < lo < hi):
        raise ValueError(f"need 0 < lo < hi, got ({lo}, {hi})")
    return np.geomspace(lo, hi, count)
