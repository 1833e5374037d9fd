"""Rotationally symmetric model manifolds.

A model is R^m with the metric dr^2 + g(r)^2 dtheta^2 where g is a warping
function with g(0) = 0, g > 0 and g' >= 0 on (0, infinity).  Everything
geometric that the radial solvers need reduces to one-dimensional calculus
on g:

* the radial Laplacian is  u'' + (m-1) (g'/g) u',
* the volume of the ball of radius r is  omega_{m-1} * int_0^r g^{m-1},
* the area of the sphere of radius r is  omega_{m-1} * g(r)^{m-1},
* non-parabolicity amounts to the convergence of  int^inf g^{1-m}.

Four warping families are supported: euclidean (g = r), hyperbolic
(g = sinh(sqrt(B) r)/sqrt(B)), power (g = r^Bprime) and tabulated samples
interpolated by a monotone cubic, which preserves g' >= 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate
from scipy.interpolate import PchipInterpolator

from . import fits
from .errors import DomainError, HypothesisViolation

__all__ = [
    "WarpingFunction",
    "ModelManifold",
    "GrowthClassification",
    "warp_coefficient",
    "ball_volume",
    "sphere_area",
    "classify_growth",
    "is_nonparabolic",
]

_VALIDATION_RADII = np.concatenate([np.linspace(1e-6, 1.0, 40), np.geomspace(1.0, 64.0, 40)])


@dataclass(frozen=True)
class WarpingFunction:
    """Warping profile g together with its derivative.

    Construct through the classmethods; they validate the family parameters
    and the structural pole conditions g(0) = 0, g > 0, g' >= 0.  The
    attribute `pole_slope` is the limit of r g'(r)/g(r) at the pole (1 for
    the smooth families, Bprime for the power family); the radial operators
    use it to give the Laplacian a finite value at r = 0.
    """

    family: str
    g: Callable[[np.ndarray], np.ndarray]
    dg: Callable[[np.ndarray], np.ndarray]
    pole_slope: float
    params: dict = field(default_factory=dict)
    r_max: float = math.inf

    @classmethod
    def euclidean(cls) -> "WarpingFunction":
        return cls("euclidean", lambda r: np.asarray(r, dtype=float),
                   lambda r: np.ones_like(np.asarray(r, dtype=float)), 1.0)

    @classmethod
    def hyperbolic(cls, B: float) -> "WarpingFunction":
        if not B > 0:
            raise DomainError(f"hyperbolic family needs B > 0, got {B}")
        s = math.sqrt(B)
        return cls("hyperbolic",
                   lambda r: np.sinh(s * np.asarray(r, dtype=float)) / s,
                   lambda r: np.cosh(s * np.asarray(r, dtype=float)),
                   1.0, {"B": float(B)})

    @classmethod
    def power(cls, Bprime: float) -> "WarpingFunction":
        if not Bprime >= 1:
            raise DomainError(f"power family needs Bprime >= 1, got {Bprime}")
        p = float(Bprime)
        return cls("power",
                   lambda r: np.asarray(r, dtype=float) ** p,
                   lambda r: p * np.asarray(r, dtype=float) ** (p - 1.0),
                   p, {"Bprime": p})

    @classmethod
    def tabulated(cls, r_table, g_table) -> "WarpingFunction":
        r_table = np.asarray(r_table, dtype=float)
        g_table = np.asarray(g_table, dtype=float)
        if r_table.ndim != 1 or r_table.shape != g_table.shape or r_table.size < 4:
            raise DomainError("tabulated family needs matching 1-d tables with >= 4 samples")
        if r_table[0] != 0.0 or g_table[0] != 0.0:
            raise DomainError("tabulated warping must start at r = 0 with g(0) = 0")
        if np.any(np.diff(r_table) <= 0):
            raise DomainError("tabulated radii must be strictly increasing")
        if np.any(g_table[1:] <= 0):
            raise DomainError("tabulated warping must be positive for r > 0")
        if np.any(np.diff(g_table) < 0):
            raise DomainError("tabulated warping must be non-decreasing (g' >= 0)")
        interp = PchipInterpolator(r_table, g_table, extrapolate=False)
        deriv = interp.derivative()
        # r g'/g at the first sample approximates the pole limit; clipped to
        # be safe against interpolation wiggle in the first cell
        r1 = r_table[1]
        g1 = float(interp(r1))
        pole_slope = 1.0 if g1 <= 0 else float(np.clip(r1 * float(deriv(r1)) / g1, 0.0, None))
        return cls("tabulated",
                   lambda r: np.asarray(interp(r), dtype=float),
                   lambda r: np.asarray(deriv(r), dtype=float),
                   pole_slope,
                   {"n_samples": int(r_table.size)},
                   r_max=float(r_table[-1]))

    def __post_init__(self):
        radii = _VALIDATION_RADII[_VALIDATION_RADII < self.r_max]
        gv = np.asarray(self.g(radii), dtype=float)
        dgv = np.asarray(self.dg(radii), dtype=float)
        if np.any(~np.isfinite(gv)) or np.any(gv <= 0):
            raise DomainError(f"{self.family} warping is not positive on (0, r_max)")
        if np.any(dgv < -1e-12 * np.maximum(1.0, np.abs(gv))):
            raise DomainError(f"{self.family} warping has g' < 0 somewhere")


@dataclass(frozen=True)
class ModelManifold:
    """A model manifold: warping function plus dimension m >= 2."""

    warping: WarpingFunction
    m: int

    def __post_init__(self):
        if not (isinstance(self.m, (int, np.integer)) and self.m >= 2):
            raise DomainError(f"dimension must be an integer >= 2, got {self.m!r}")

    # -- convenience constructors ------------------------------------
    @classmethod
    def euclidean(cls, m: int) -> "ModelManifold":
        return cls(WarpingFunction.euclidean(), m)

    @classmethod
    def hyperbolic(cls, m: int, B: float) -> "ModelManifold":
        return cls(WarpingFunction.hyperbolic(B), m)

    @classmethod
    def power(cls, m: int, Bprime: float) -> "ModelManifold":
        return cls(WarpingFunction.power(Bprime), m)

    @classmethod
    def tabulated(cls, m: int, r_table, g_table) -> "ModelManifold":
        return cls(WarpingFunction.tabulated(r_table, g_table), m)

    # -- basic geometry ----------------------------------------------
    @property
    def sphere_constant(self) -> float:
        """Surface measure of the unit (m-1)-sphere: 2 pi^{m/2} / Gamma(m/2)."""
        return 2.0 * math.pi ** (self.m / 2.0) / math.gamma(self.m / 2.0)

    def g(self, r):
        return self.warping.g(r)

    def dg(self, r):
        return self.warping.dg(r)

    @property
    def pole_coefficient(self) -> float:
        """Limit of r * (m-1) g'/g at the pole.

        The radial Laplacian of an even C^2 profile extends to r = 0 with
        value (1 + this) * u''(0); it equals m - 1 for smooth-pole models.
        """
        return (self.m - 1) * self.warping.pole_slope

    def r_times_warp_coefficient(self, r):
        """Continuous extension of r * (m-1) g'/g, defined at r = 0 too."""
        r = np.asarray(r, dtype=float)
        out = np.full(r.shape, self.pole_coefficient)
        pos = r > 0
        if np.any(pos):
            out[pos] = r[pos] * (self.m - 1) * self.dg(r[pos]) / self.g(r[pos])
        return out if out.ndim else float(out)


def warp_coefficient(M: ModelManifold, r):
    """Coefficient (m-1) g'(r)/g(r) of the first-order term of the radial
    Laplacian.  Defined for r > 0 only; the pole needs the even-extension
    limit, see `ModelManifold.pole_coefficient`.
    """
    r_arr = np.asarray(r, dtype=float)
    if np.any(r_arr <= 0):
        raise DomainError("warp_coefficient needs r > 0 (the coefficient has a pole at 0)")
    if np.any(r_arr >= M.warping.r_max):
        raise DomainError("radius beyond the tabulated range")
    val = (M.m - 1) * M.dg(r_arr) / M.g(r_arr)
    return float(val) if np.ndim(r) == 0 else val


def sphere_area(M: ModelManifold, r: float) -> float:
    """Area of the geodesic sphere of radius r."""
    if r < 0:
        raise DomainError(f"radius must be >= 0, got {r}")
    if r == 0:
        return 0.0
    return M.sphere_constant * float(M.g(r)) ** (M.m - 1)


def ball_volume(M: ModelManifold, r: float, rel_tol: float = 1e-11) -> float:
    """Volume of the geodesic ball of radius r by adaptive quadrature."""
    if r < 0:
        raise DomainError(f"radius must be >= 0, got {r}")
    if r == 0:
        return 0.0
    if r >= M.warping.r_max:
        raise DomainError("radius beyond the tabulated range")
    exp = M.m - 1
    val, _ = integrate.quad(lambda s: float(M.g(s)) ** exp, 0.0, r,
                            epsrel=rel_tol, epsabs=0.0, limit=200)
    return M.sphere_constant * val


@dataclass
class GrowthClassification:
    """Outcome of a volume-growth test against a polynomial target.

    regime is "power" when vol B_r ~ c r^s fits best (s = fitted_exponent),
    "exponential" when log vol B_r ~ k r fits markedly better
    (k = log_volume_rate); any polynomial target fails in that regime.
    """

    regime: str
    fitted_exponent: float
    log_volume_rate: float | None
    target_exponent: float
    with_log_factor: bool
    slack: float
    verdict: str
    radii: np.ndarray
    volumes: np.ndarray


def classify_growth(M: ModelManifold, exponent_target: float,
                    with_log_factor: bool = False,
                    r_range: tuple[float, float] = (1.0, 64.0),
                    slack: float = fits.SLACK) -> GrowthClassification:
    """Decide whether vol B_r = O(r^target [* log r]) over a radius range.

    The decision is a fit, not a symbolic limit: volumes are sampled on
    geometric radii, the power and exponential models are both fitted, and
    the fitted rate is compared against the target with slack (relative to
    max(target, 1)).  Exponential-regime volume fails every polynomial
    target.
    """
    lo, hi = r_range
    if not (0 < lo < hi):
        raise DomainError(f"invalid r_range {r_range}")
    if hi >= M.warping.r_max:
        raise DomainError("r_range exceeds the tabulated warping range")
    if hi / lo < 4.0:
        raise DomainError("r_range must span at least a factor of 4 for a meaningful fit")
    radii = fits.geometric_radii(lo, hi)
    vols = np.array([ball_volume(M, float(r), rel_tol=1e-9) for r in radii])
    y = vols.copy()
    if with_log_factor:
        y = y / np.maximum(np.log(radii), 1.0)
    best, _ = fits.preferred_model(radii, y)
    if best.model == "exponential":
        verdict = fits.FAILS
        return GrowthClassification("exponential", math.inf, best.slope,
                                    exponent_target, with_log_factor, slack,
                                    verdict, radii, vols)
    tol = slack * max(abs(exponent_target), 1.0)
    if not math.isfinite(best.slope):
        verdict = fits.INCONCLUSIVE
    elif best.slope <= exponent_target + tol:
        verdict = fits.HOLDS
    else:
        verdict = fits.FAILS
    return GrowthClassification("power", best.slope, None, exponent_target,
                                with_log_factor, slack, verdict, radii, vols)


def is_nonparabolic(M: ModelManifold, probe_range: tuple[float, float] = (1.0, 1e3)) -> bool:
    """Whether int^inf g^{1-m} converges (the model carries a Green kernel).

    The integrand is probed on geometric radii and its tail rate fitted.
    Power decay needs slope < -1; exponential decay always converges.  A
    tabulated warping whose range is too short to see the tail cannot be
    classified and raises.
    """
    lo, hi = probe_range
    if M.warping.r_max < math.inf:
        hi = min(hi, 0.98 * M.warping.r_max)
        if hi / lo < 8.0:
            raise HypothesisViolation(
                "tabulated warping range is too short to classify the capacity tail")
    radii = fits.geometric_radii(lo, hi, count=40)
    with np.errstate(over="ignore"):
        gv = np.asarray(M.g(radii), dtype=float)
        integrand = np.where(np.isfinite(gv), gv, np.inf) ** (1 - M.m)
    keep = np.isfinite(integrand) & (integrand > 0)
    if keep.sum() < 8:
        raise HypothesisViolation("capacity integrand could not be sampled over the probe range")
    best, _ = fits.preferred_model(radii[keep], integrand[keep])
    if best.model == "exponential":
        return best.slope < 0
    return best.slope < -1.0 - 1e-2
