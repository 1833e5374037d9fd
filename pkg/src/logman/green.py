"""Radial Green kernel and Poisson solver on non-parabolic models.

The minimal positive radial fundamental solution of the Laplacian on a
model manifold is

    G(r) = t(r) / omega_{m-1},    t(r) = integral_r^infinity g^{1-m},

finite exactly when the model is non-parabolic.  The radial Poisson
problem Delta v = rho with rho >= 0 integrable then has the explicit
nonpositive solution

    v(r) = -( t(r) P(r) + Q(r) ),
    P(r) = integral_0^r rho g^{m-1},   Q(r) = integral_r^inf t rho g^{m-1},

since g^{m-1} v' = P exactly.  Outside the support of rho this reduces
to v = -mass * G(r), the far-field monopole.

The substitution phi = e^{-v} turns a Poisson solution into a positive
solution of Delta phi + rho phi = |grad phi|^2 / phi, the bridge
between linear potential theory and the semilinear comparison
arguments.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import DomainError, HypothesisViolation, ParabolicManifold
from .fits import FAILS, HOLDS, preferred_model
from .manifold import ModelManifold
from .radial import RadialField, RadialGrid, assemble
from .reports import CertificateReport

# The fitted-tail correction is accepted once the raw tail estimate is
# this small relative to the accumulated integral and the model fit is
# this clean (rms of log-residuals); together they bound the relative
# truncation error by ~1e-12.
TAIL_FRACTION = 1e-8
TAIL_FIT_RMS = 1e-3
MAX_DOUBLINGS = 80

# exp(709) is the largest finite double; stay under it.
CLAMP_EXPONENT = 700.0


def _warp_integrand(M: ModelManifold):
    exp = 1 - M.m

    def w(s):
        return np.asarray(M.g(s), dtype=float) ** exp

    return w


def _tail_integral(M: ModelManifold, r0: float) -> tuple[float, float]:
    """t(r0) = integral_{r0}^infinity g^{1-m}, with a certified tail.

    The integration window doubles until the fitted tail beyond it is a
    negligible, well-modelled fraction of the total; the fitted tail is
    then added as a correction.  A tail that refuses to decay is the
    signature of a parabolic model, where no (finite) minimal positive
    fundamental solution exists.
    """
    if r0 <= 0:
        raise DomainError(f"the kernel is singular at the pole: r={r0}")
    w = _warp_integrand(M)
    total = 0.0
    left = float(r0)
    flat_streak = 0
    for _ in range(MAX_DOUBLINGS):
        right = 2.0 * left
        piece, _ = integrate.quad(w, left, right, epsrel=1e-13, epsabs=0.0,
                                  limit=200)
        total += piece
        rs = np.geomspace(left, right, 17)
        ys = w(rs)
        if float(np.max(ys)) == 0.0:
            return total, right
        best, _other = preferred_model(rs, ys)
        if best.model == "power":
            decaying = best.slope < -1.0
            tail = (np.exp(best.intercept) * right ** (best.slope + 1.0)
                    / (-best.slope - 1.0)) if decaying else np.inf
        else:
            decaying = best.slope < 0.0
            tail = (np.exp(best.intercept + best.slope * right)
                    / (-best.slope)) if decaying else np.inf
        if decaying and tail <= TAIL_FRACTION * (total + tail) \
                and best.rms_residual <= TAIL_FIT_RMS:
            return total + float(tail), right
        if not decaying:
            flat_streak += 1
            if flat_streak >= 3:
                raise ParabolicManifold(
                    f"the warp integral g^(1-m) does not decay (fitted "
                    f"{best.model} slope {best.slope:.3f} at r~{right:.3g}); "
                    f"the model has no minimal positive fundamental solution")
        else:
            flat_streak = 0
        left = right
    raise ParabolicManifold(
        f"the kernel tail would not settle within {MAX_DOUBLINGS} doublings "
        f"from r={r0}; the model is parabolic or numerically indistinguishable "
        f"from it")


def green_radial(M: ModelManifold, r: float) -> float:
    """The radial Green kernel G(r) = (1/omega_{m-1}) t(r), r > 0."""
    t, _ = _tail_integral(M, float(r))
    return t / M.sphere_constant


@dataclass
class GreenKernel:
    """The tail function t cached on a grid, ready for kernel queries.

    ``tail_values[0]`` is +inf on a ball grid: the kernel is singular at
    the pole, and every quantity built from it there goes through the
    finite limit t(r) P(r) -> 0 instead.
    """

    manifold: ModelManifold
    grid: RadialGrid
    tail_values: np.ndarray
    r_cut: float

    def tail(self, r):
        r_arr = np.asarray(r, dtype=float)
        lo = self.grid.r[1] if np.isinf(self.tail_values[0]) else self.grid.r[0]
        if np.any(r_arr < lo) or np.any(r_arr > self.grid.R + 1e-12):
            raise DomainError("kernel query outside the cached range")
        out = np.interp(r_arr, self.grid.r, self.tail_values)
        return float(out) if np.ndim(r) == 0 else out

    def green(self, r):
        return self.tail(r) / self.manifold.sphere_constant


def build_kernel(M: ModelManifold, grid: RadialGrid) -> GreenKernel:
    """Cache t(r) at every grid node via per-cell quadrature."""
    r = grid.r
    start = 1 if grid.is_ball else 0
    w = _warp_integrand(M)
    t_edge, r_cut = _tail_integral(M, float(r[-1]))
    cells = np.zeros(r.size - 1)
    for i in range(start, r.size - 1):
        cells[i], _ = integrate.quad(w, r[i], r[i + 1], epsrel=1e-13,
                                     epsabs=0.0, limit=200)
    t = np.empty(r.size)
    t[-1] = t_edge
    for i in range(r.size - 2, start - 1, -1):
        t[i] = t[i + 1] + cells[i]
    if grid.is_ball:
        t[0] = np.inf
    return GreenKernel(M, grid, t, r_cut)


@dataclass
class PoissonResult:
    """Solution of the radial Poisson problem with its verification."""

    potential: RadialField
    mass: float
    kernel: GreenKernel
    residual: float
    rough_nodes: int
    report: CertificateReport
    truncated_fraction: float = 0.0


def _smooth_mask(rho: np.ndarray) -> np.ndarray:
    """Nodes at which the source is locally resolved by the grid.

    A jump of the source inside a cell makes the pointwise identity
    Delta v = rho unverifiable at the adjacent nodes at any mesh size
    (the stencil sees the cell average, the node carries one side), so
    those nodes are excluded from the pointwise residual and counted
    separately.
    """
    scale = float(np.max(np.abs(rho))) or 1.0
    jump = np.abs(np.diff(rho)) > 0.1 * scale
    mask = np.ones(rho.size, dtype=bool)
    mask[:-1] &= ~jump
    mask[1:] &= ~jump
    return mask


def poisson_solve(M: ModelManifold, rho: RadialField, *,
                  residual_tol: float = 1e-6) -> PoissonResult:
    """Solve Delta v = rho with rho >= 0 integrable; v <= 0.

    The source is taken as zero beyond its grid; a nonvanishing edge
    value is accepted only when its fitted tail decays integrably, and
    the dropped fraction is reported.
    """
    grid = rho.grid
    if not grid.is_ball:
        raise HypothesisViolation("the Poisson solver needs a ball grid")
    r = grid.r
    rho_v = np.asarray(rho.values, dtype=float)
    if np.min(rho_v) < -1e-12 * max(1.0, float(np.max(np.abs(rho_v)))):
        raise HypothesisViolation(
            f"source must be nonnegative: min rho = {np.min(rho_v)}")
    rho_v = np.maximum(rho_v, 0.0)

    gm = np.asarray(M.g(r), dtype=float) ** (M.m - 1)
    density = rho_v * gm

    truncated = 0.0
    edge_scale = float(np.max(rho_v))
    if edge_scale > 0.0 and rho_v[-1] > 1e-12 * edge_scale:
        tail_n = max(8, r.size // 8)
        rs, ys = r[-tail_n:], density[-tail_n:]
        if np.min(ys) > 0.0:
            best, _ = preferred_model(rs, ys)
            integrable = (best.slope < -1.0 if best.model == "power"
                          else best.slope < 0.0)
            if not integrable:
                raise DomainError(
                    f"source does not decay integrably at the grid edge "
                    f"(fitted {best.model} slope {best.slope:.3f})")
            if best.model == "power":
                tail_mass = (np.exp(best.intercept)
                             * r[-1] ** (best.slope + 1.0)
                             / (-best.slope - 1.0))
            else:
                tail_mass = (np.exp(best.intercept + best.slope * r[-1])
                             / (-best.slope))
            total_mass = float(integrate.trapezoid(density, r))
            truncated = float(tail_mass / max(tail_mass + total_mass,
                                              1e-300))

    kernel = build_kernel(M, grid)
    t = kernel.tail_values

    # Integrating the kernel representation v = -(t P + Q) by parts
    # (t' = -g^{1-m}, P' = rho g^{m-1}) gives
    #
    #     v(r) = -( t(R) P(R) + integral_r^R g^{1-m}(s) P(s) ds ),
    #
    # which removes the pole-singular tail t from every interior
    # integral: the remaining integrand g^{1-m} P vanishes at the pole
    # like rho(0) s / m.  Both levels of quadrature are Gauss rules on
    # the piecewise-linear interpolant of the nodal source, so the map
    # rho -> v is exactly linear and monotone in the nodal values, and
    # v <= 0 holds as a sum of nonnegative terms.
    x5, w5 = np.polynomial.legendre.leggauss(5)
    x3, w3 = np.polynomial.legendre.leggauss(3)
    left = r[:-1]
    half = 0.5 * (r[1:] - left)
    S = (left + half)[:, None] + half[:, None] * x5

    def dens(s):
        return np.interp(s, r, rho_v) \
            * np.asarray(M.g(s), dtype=float) ** (M.m - 1)

    P_inc = half * (dens(S) @ w5)
    P = np.concatenate(([0.0], np.cumsum(P_inc)))
    mass = M.sphere_constant * float(P[-1])

    # P at the outer Gauss nodes, by an inner Gauss rule over [r_i, s].
    half_in = 0.5 * (S - left[:, None])
    SS = (left[:, None, None] + half_in[:, :, None]) \
        + half_in[:, :, None] * x3
    P_at_S = P[:-1, None] + half_in * np.einsum("ijk,k->ij", dens(SS), w3)
    v_inc = half * ((_warp_integrand(M)(S) * P_at_S) @ w5)
    suffix = np.concatenate((np.cumsum(v_inc[::-1])[::-1], [0.0]))
    v = -(t[-1] * P[-1] + suffix)
    potential = RadialField(grid, v)

    # The last node is the operator's Dirichlet row (an identity), so
    # the pointwise identity is checked strictly inside the grid.
    op = assemble(M, grid, 0.0)
    lap = op.apply(np.ascontiguousarray(v))
    res = np.abs(lap - rho_v) / (1.0 + np.abs(rho_v))
    smooth = _smooth_mask(rho_v) & ~op.dirichlet
    residual = float(np.max(res[smooth])) if np.any(smooth) else 0.0
    rough = int(np.count_nonzero(~smooth[:-1]))

    rep = CertificateReport("radial Poisson solve")
    rep.add("potential nonpositive",
            HOLDS if float(np.max(v)) <= 1e-12 * max(1.0, -float(np.min(v)))
            else FAILS, float(np.max(v)), 0.0)
    note = f"{rough} node(s) skipped at source jumps"
    scale = float(np.max(rho_v))
    pole_slope = abs(rho_v[1] - rho_v[0]) / (r[1] - r[0])
    if scale > 0.0 and pole_slope > 0.1 * scale:
        # A radial profile with nonzero slope at the pole is continuous
        # but not differentiable as a function on the manifold, and the
        # pole stencil is only first-order consistent against it.
        note += (f"; source has a conical kink at the pole (slope "
                 f"{pole_slope:.3g}), where the identity is first-order")
    rep.add_inequality("Poisson residual at resolved nodes", residual,
                       residual_tol, note=note)
    rep.data.update(mass=mass, truncated_fraction=truncated,
                    r_cut=kernel.r_cut)
    return PoissonResult(potential, mass, kernel, residual, rough, rep,
                         truncated)


@dataclass
class SubstitutionResult:
    """phi = e^{-v} and the residual of its defining identity."""

    phi: RadialField
    residual: float
    clamped: bool
    report: CertificateReport


def log_substitution(M: ModelManifold, v: RadialField,
                     rho: RadialField | np.ndarray | None = None, *,
                     residual_tol: float = 1e-6) -> SubstitutionResult:
    """phi = e^{-v}: a positive solution of Delta phi + rho phi = |phi'|^2/phi.

    ``rho`` defaults to the discrete Laplacian of v, making the check a
    pure consistency identity; passing the source that produced v makes
    it an independent verification.  phi >= 1 wherever v <= 0.
    """
    grid = v.grid
    vals = np.asarray(v.values, dtype=float)
    clamped = bool(np.any(-vals > CLAMP_EXPONENT))
    if clamped:
        warnings.warn(
            "potential below -700: phi capped at its overflow threshold",
            RuntimeWarning, stacklevel=2)
    phi = np.exp(np.minimum(-vals, CLAMP_EXPONENT))
    phi_field = RadialField(grid, phi)

    op = assemble(M, grid, 0.0)
    if rho is None:
        rho_v = op.apply(np.ascontiguousarray(vals))
    elif isinstance(rho, RadialField):
        rho_v = np.asarray(rho.values, dtype=float)
    else:
        rho_v = np.broadcast_to(np.asarray(rho, dtype=float),
                                vals.shape).astype(float)

    dphi = phi_field.derivative().values
    lap_phi = op.apply(np.ascontiguousarray(phi))
    identity = lap_phi + rho_v * phi - dphi ** 2 / phi
    scale = 1.0 + np.abs(rho_v) * phi + dphi ** 2 / phi
    smooth = _smooth_mask(rho_v) & ~op.dirichlet
    residual = float(np.max(np.abs(identity[smooth]) / scale[smooth])) \
        if np.any(smooth) else 0.0

    rep = CertificateReport("logarithmic substitution")
    rep.add_inequality("substitution identity residual", residual,
                       residual_tol)
    if float(np.max(vals)) <= 0.0:
        rep.add("phi bounded below by one", HOLDS
                if float(np.min(phi)) >= 1.0 - 1e-12 else FAILS,
                float(np.min(phi)), 1.0,
                note="nonpositive potential gives a free lower bound")
        rep.data["lower_bound"] = 1.0
    rep.data["clamped"] = clamped
    return SubstitutionResult(phi_field, residual, clamped, rep)
