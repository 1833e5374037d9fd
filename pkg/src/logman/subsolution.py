"""Constructive global subsolutions for the logistic equation.

The construction has three pieces glued along two interface radii:

* an annulus profile alpha on [R, R+T], solution of the two-point
  problem alpha'' + (m-1)(g'/g) alpha' - A(r) alpha - (B(r)+eps)
  alpha^sigma = 0 with alpha(R) = alpha_0 and alpha(R+T) = 0, whose
  slope at R obeys an explicit bound;
* an interior quadratic profile beta(r) = alpha_0 (1 + (R^2 - r^2) eta)
  on the ball, with the shape parameter eta confined to a feasibility
  window that makes beta a pointwise subsolution and matches the slopes
  at R;
* the zero function outside B_{R+T}.

The glued profile is continuous, and the two kinks bend the right way
(slope drops at R, stays nonpositive at R+T), which is exactly what
makes the piecewise function a *weak* subsolution even though it is not
C^1.  The feasibility window is nonempty as soon as the strict
inequality checked by :func:`existence_condition` holds, after the
boundary value alpha_0 is shrunk far enough.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    HypothesisViolation,
    InfeasibleWindow,
    KinkSignError,
    NumericalFailure,
)
from .fits import FAILS, HOLDS
from .logistic import INCREMENT_TOL, MAX_SWEEPS, RESIDUAL_TOL, _monotone_branch
from .manifold import ModelManifold
from .radial import RadialField, _sample, assemble, build_grid, solve_linear
from .reports import CertificateReport

# Relative tolerance for the constructed profiles' verification rows:
# boundary values, sign conditions and the slope bound are all exact
# statements about the continuum profiles, checked here on second-order
# discrete approximations.
CHECK_TOL = 1e-6


def _as_callable(coeff):
    if callable(coeff):
        return coeff
    if isinstance(coeff, RadialField):
        return coeff
    value = float(coeff)
    return lambda r: np.broadcast_to(value, np.shape(r)).astype(float) \
        if np.ndim(r) else value


def negative_part(coeff):
    """The function r -> max(-coeff(r), 0), as a callable."""
    f = _as_callable(coeff)
    return lambda r: np.maximum(-np.asarray(f(r), dtype=float), 0.0)


@dataclass
class AnnulusProfile:
    """Decreasing profile on [R, R+T] vanishing at the outer radius."""

    manifold: ModelManifold
    alpha: RadialField
    alpha0: float
    R: float
    T: float
    T_o: float
    eps: float
    sigma: float
    derivative_at_R: float
    outer_derivative: float
    bound_lhs: float
    bound_rhs: float
    report: CertificateReport


@dataclass
class InteriorProfile:
    """Quadratic profile beta(r) = alpha0 (1 + (R^2 - r^2) eta) on [0, R]."""

    beta: RadialField
    alpha0: float
    eta: float
    tau: float
    window: tuple[float, float]
    halvings: int
    slope_at_R: float
    R: float
    report: CertificateReport

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        vals = self.alpha0 * (1.0 + (self.R ** 2 - r ** 2) * self.eta)
        return float(vals) if vals.ndim == 0 else vals

    def slope(self, r):
        r = np.asarray(r, dtype=float)
        vals = -2.0 * self.eta * self.alpha0 * r
        return float(vals) if vals.ndim == 0 else vals


@dataclass
class GlobalSubsolution:
    """Continuous glued profile: beta, then alpha, then zero."""

    interior: InteriorProfile
    annulus: AnnulusProfile
    kink_at_R: float
    kink_at_outer: float
    report: CertificateReport
    existence: CertificateReport | None = None

    @property
    def R(self) -> float:
        return self.interior.R

    @property
    def support_radius(self) -> float:
        return self.annulus.R + self.annulus.T_o

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        scalar = r.ndim == 0
        r = np.atleast_1d(r)
        out = np.zeros(r.shape, dtype=float)
        inner = r <= self.R
        out[inner] = self.interior(r[inner])
        grid_r = self.annulus.alpha.grid.r
        ann = (r > self.R) & (r < self.support_radius)
        out[ann] = np.interp(r[ann], grid_r, self.annulus.alpha.values)
        return float(out[0]) if scalar else out

    def slope(self, r):
        """Radial derivative, taking the one-sided value at the kinks."""
        r = np.asarray(r, dtype=float)
        scalar = r.ndim == 0
        r = np.atleast_1d(r)
        out = np.zeros(r.shape, dtype=float)
        inner = r <= self.R
        out[inner] = self.interior.slope(r[inner])
        deriv = self.annulus.alpha.derivative()
        ann = (r > self.R) & (r < self.support_radius)
        out[ann] = np.interp(r[ann], deriv.grid.r, deriv.values)
        return float(out[0]) if scalar else out


def annulus_subsolution(M: ModelManifold, A_minus, B, R: float, T: float,
                        alpha0: float, eps: float | None = None, *,
                        sigma: float = 2.0, T_o: float | None = None,
                        n: int = 2000,
                        max_sweeps: int = MAX_SWEEPS) -> AnnulusProfile:
    """Solve the annulus two-point problem and verify its slope bound.

    The super-solution starting the descent is the solution of the
    linear problem (the alpha^sigma term dropped); the subsolution is
    zero.  ``eps`` strengthens the absorption; it defaults to
    1e-3 * max B, giving the glued construction strict room.
    """
    if not (alpha0 > 0 and T > 0 and R > 0):
        raise HypothesisViolation(
            f"need alpha0, T, R > 0; got alpha0={alpha0}, T={T}, R={R}")
    if not sigma > 1.0:
        raise HypothesisViolation(f"superlinear exponent required: {sigma}")
    T_o = T if T_o is None else float(T_o)
    if not (0.0 < T_o <= T):
        raise HypothesisViolation(f"need 0 < T_o <= T, got T_o={T_o}, T={T}")

    grid = build_grid(R + T, n, r_start=R)
    Av = _sample(A_minus, grid)
    Bv = _sample(B, grid)
    if np.min(Av) < -1e-12 * max(1.0, float(np.max(np.abs(Av)))):
        raise HypothesisViolation("A_minus must be nonnegative")
    if np.min(Bv) < -1e-12 * max(1.0, float(np.max(np.abs(Bv)))):
        raise HypothesisViolation("B must be nonnegative")
    Av = np.maximum(Av, 0.0)
    Bv = np.maximum(Bv, 0.0)
    if eps is None:
        eps = 1e-3 * float(np.max(Bv))
    if eps < 0:
        raise HypothesisViolation(f"eps must be nonnegative, got {eps}")
    bv = Bv + eps

    # Linear comparison profile: drop the superlinear term.  It
    # dominates the nonlinear solution and is nonnegative, so it is the
    # canonical starting supersolution.
    linear_op = assemble(M, grid, -Av)
    super_start = solve_linear(linear_op, 0.0, (alpha0, 0.0)).values
    if np.min(super_start) < -1e-12 * alpha0:
        raise NumericalFailure(
            "linear comparison profile came out negative; the annulus "
            "operator lost its maximum principle on this grid")
    super_start = np.maximum(super_start, 0.0)

    vals, sweeps, last_inc, violation, ok = _monotone_branch(
        M, sigma, grid, -Av, bv, super_start, (alpha0, 0.0), super_start,
        True, tol_increment=INCREMENT_TOL, tol_residual=RESIDUAL_TOL,
        max_sweeps=max_sweeps)
    if not ok:
        raise NumericalFailure(
            f"annulus iteration did not converge (last increment "
            f"{last_inc:.3e})")

    alpha = RadialField(grid, vals)
    deriv = alpha.derivative()
    slope_R = float(deriv.values[0])
    slope_out = float(deriv.values[-1])

    ratio = (float(M.g(R + T_o)) / float(M.g(R))) ** (M.m - 1)
    window = grid.r <= R + T_o + 1e-12 * (R + T)
    inner_max = float(np.max((Av + bv * alpha0 ** (sigma - 1.0))[window]))
    bound_rhs = ratio * (1.0 / T_o + T_o * inner_max) * alpha0
    bound_lhs = abs(slope_R)

    rep = CertificateReport("annulus profile checks")
    scale = max(alpha0, float(np.max(np.abs(vals))))
    interior_min = float(np.min(vals[:-1]))
    rep.add("alpha positive on [R, R+T)",
            HOLDS if interior_min > 0.0 else FAILS, interior_min, 0.0)
    worst_slope = float(np.max(deriv.values[:-1]))
    rep.add("alpha decreasing on [R, R+T)",
            HOLDS if worst_slope < CHECK_TOL * scale else FAILS,
            worst_slope, 0.0)
    rep.add_inequality("alpha(R) = alpha0", abs(float(vals[0]) - alpha0),
                       CHECK_TOL * scale)
    rep.add_inequality("alpha(R+T) = 0", abs(float(vals[-1])),
                       CHECK_TOL * scale)
    rep.add("slope bound at R",
            HOLDS if bound_lhs <= bound_rhs * (1.0 + CHECK_TOL) else FAILS,
            bound_lhs, bound_rhs,
            note="|alpha'(R)| vs its annulus-lemma bound")
    rep.data.update(sweeps=sweeps, monotone_violation=violation, eps=eps)
    if not rep.holds:
        raise NumericalFailure(
            "annulus profile failed verification:\n" + rep.format())
    return AnnulusProfile(M, alpha, alpha0, R, T, T_o, float(eps), sigma,
                          slope_R, slope_out, bound_lhs, bound_rhs, rep)


def existence_condition(M: ModelManifold, a, R: float, T_o: float, *,
                        n: int = 2000) -> CertificateReport:
    """The strict inequality making the glued construction feasible.

    LHS = R inf_{B_R} a must exceed
    RHS = (1 + tau) (1/T_o + T_o max a_-) (g(R+T_o)/g(R))^(m-1),
    where tau = sup_{B_R} r (m-1) g'/g and the max of the negative part
    a_- runs over the annulus [R, R+T_o].
    """
    if not (R > 0 and T_o > 0):
        raise HypothesisViolation(f"need R, T_o > 0, got R={R}, T_o={T_o}")
    ball = build_grid(R, n)
    ann = build_grid(R + T_o, n, r_start=R)
    av = _sample(a, ball)
    inf_a = float(np.min(av))
    a_minus_max = float(np.max(negative_part(a)(ann.r)))
    tau = float(np.max(M.r_times_warp_coefficient(ball.r)))
    ratio = (float(M.g(R + T_o)) / float(M.g(R))) ** (M.m - 1)

    lhs = R * inf_a
    rhs = (1.0 + tau) * (1.0 / T_o + T_o * a_minus_max) * ratio
    rep = CertificateReport("existence condition")
    rep.add("R inf a > (1+tau)(1/T_o + T_o max a_-) (g-ratio)^(m-1)",
            HOLDS if lhs > rhs else FAILS, lhs, rhs)
    rep.data.update(tau=tau, g_ratio=ratio, inf_a=inf_a,
                    a_minus_max=a_minus_max, R=R, T_o=T_o)
    rep.conclusion = ("a positive solution can be built from a glued "
                      "subsolution" if rep.holds
                      else "the construction is not guaranteed at this R")
    return rep


def interior_subsolution(M: ModelManifold, a, b, sigma: float, R: float,
                         T_o: float, alpha0: float,
                         alpha_slope: float | None = None, *,
                         eps: float | None = None, n: int = 2000,
                         max_halvings: int = 60) -> InteriorProfile:
    """Quadratic interior profile with a feasible shape parameter.

    The shape parameter eta is pinned from below by the slope-matching
    requirement (the interior profile must leave R at least as steeply
    as the annulus bound allows) and from above by the subsolution
    inequality.  Both pins move with the boundary value: the lower one

        eta_min = (g(R+T_o)/g(R))^(m-1)
                  {1/T_o + T_o max_[R,R+T_o](a_- + (b+eps) alpha0^(sigma-1))}
                  / (2R)

    relaxes as alpha0 shrinks, while the upper one

        eta_max = {min a - alpha0^(sigma-1) eta_cap^sigma R^sigma max b}
                  / (2 (1+tau)),     eta_cap = min a / (2 (1+tau)),

    rises toward eta_cap.  In the limit alpha0 -> 0 the window is
    nonempty exactly when the strict inequality of
    :func:`existence_condition` holds, so alpha0 is halved until the
    window opens.  Any eta in the window, being at most eta_cap, makes
    the quadratic profile a pointwise subsolution; the midpoint is
    chosen for margin on both sides.

    ``alpha_slope``, when given, is the measured annulus derivative at
    R for the *initial* alpha0; it is checked against the matching
    constraint when no halving was needed (after halving the annulus
    must be re-solved at the final boundary value, and the glue step
    re-checks the kink).  ``eps`` must match the perturbation used for
    the annulus profile; it defaults to 1e-3 * max b on the annulus.
    """
    if not sigma > 1.0:
        raise HypothesisViolation(f"superlinear exponent required: {sigma}")
    if not alpha0 > 0:
        raise HypothesisViolation(f"need alpha0 > 0, got {alpha0}")
    grid = build_grid(R, n)
    ann = build_grid(R + T_o, n, r_start=R)
    av = _sample(a, grid)
    bv = _sample(b, grid)
    a_minus_ann = np.maximum(-_sample(a, ann), 0.0)
    b_ann = _sample(b, ann)
    if eps is None:
        eps = 1e-3 * float(np.max(b_ann))
    min_a = float(np.min(av))
    max_b = float(np.max(bv))
    tau = float(np.max(M.r_times_warp_coefficient(grid.r)))
    ratio = (float(M.g(R + T_o)) / float(M.g(R))) ** (M.m - 1)
    if min_a <= 0.0:
        raise InfeasibleWindow(
            f"inf a = {min_a} on the ball: the subsolution constraint has "
            f"a nonpositive right side, no eta can work")

    eta_cap = min_a / (2.0 * (1.0 + tau))
    a0 = float(alpha0)
    halvings = 0
    while True:
        annulus_max = float(np.max(a_minus_ann
                                   + (b_ann + eps) * a0 ** (sigma - 1.0)))
        eta_min = ratio * (1.0 / T_o + T_o * annulus_max) / (2.0 * R)
        eta_max = (min_a - a0 ** (sigma - 1.0) * eta_cap ** sigma
                   * R ** sigma * max_b) / (2.0 * (1.0 + tau))
        if eta_max >= eta_min:
            break
        halvings += 1
        if halvings > max_halvings:
            raise InfeasibleWindow(
                f"feasibility window still empty after {max_halvings} "
                f"halvings of alpha0 (eta_min={eta_min:.3e}, last "
                f"eta_max={eta_max:.3e}); the existence condition margin "
                f"is too thin")
        a0 /= 2.0

    eta = 0.5 * (eta_min + eta_max)
    beta_vals = a0 * (1.0 + (R ** 2 - grid.r ** 2) * eta)
    beta = RadialField(grid, beta_vals)
    slope_at_R = -2.0 * eta * R * a0

    # The profile is an exact quadratic, so its Laplacian is evaluated
    # in closed form; the subsolution inequality is then checked with
    # the true coefficients node by node.
    lap = -2.0 * eta * a0 * (1.0 + M.r_times_warp_coefficient(grid.r))
    defect = lap + av * beta_vals - bv * beta_vals ** sigma
    worst = float(np.min(defect))
    scale = max(1.0, float(np.max(np.abs(av * beta_vals))))

    rep = CertificateReport("interior profile checks")
    rep.add("eta window nonempty", HOLDS if eta_min <= eta_max else FAILS,
            eta_min, eta_max, note=f"after {halvings} halvings")
    rep.add("beta >= alpha0 on the ball",
            HOLDS if float(np.min(beta_vals)) >= a0 * (1.0 - 1e-12) else FAILS,
            float(np.min(beta_vals)), a0)
    rep.add("subsolution inequality on the ball",
            HOLDS if worst >= -CHECK_TOL * scale else FAILS, worst, 0.0,
            note="min of Lap(beta) + a beta - b beta^sigma")
    bound_at_final = 2.0 * eta_min * R * a0
    rep.add("slope dominates the annulus bound",
            HOLDS if 2.0 * eta * R * a0 >= bound_at_final * (1.0 - 1e-12)
            else FAILS, 2.0 * eta * R * a0, bound_at_final,
            note="|beta'(R)| vs the annulus slope bound at the final alpha0")
    if alpha_slope is not None and halvings == 0:
        rep.add("slope matches the measured annulus derivative",
                HOLDS if slope_at_R <= alpha_slope + CHECK_TOL
                * max(1.0, abs(alpha_slope)) else FAILS,
                slope_at_R, float(alpha_slope))
    rep.data.update(tau=tau, eta_cap=eta_cap, halvings=halvings,
                    alpha0=a0, min_a=min_a, max_b=max_b, eps=eps)
    if not rep.holds:
        raise NumericalFailure(
            "interior profile failed verification:\n" + rep.format())
    return InteriorProfile(beta, a0, eta, tau, (eta_min, eta_max), halvings,
                           slope_at_R, R, rep)


def glue_subsolution(interior: InteriorProfile, annulus: AnnulusProfile, *,
                     a=None, b=None, sigma: float | None = None,
                     existence: CertificateReport | None = None
                     ) -> GlobalSubsolution:
    """Join the two profiles and verify continuity and kink signs.

    The kink conditions are what turn two pointwise subsolutions into
    one weak subsolution: the interior slope must not exceed the
    annulus slope at R, and the annulus must leave the outer interface
    going down.  When the equation coefficients are supplied, the
    pointwise inequality is also re-checked on the annulus with the
    true a and b (the profile was built with the safe bounds A_- and
    B + eps, so the margin only grows).
    """
    if abs(interior.R - annulus.R) > 1e-12 * max(1.0, annulus.R):
        raise HypothesisViolation(
            f"interface mismatch: interior ends at {interior.R}, annulus "
            f"starts at {annulus.R}")
    scale = max(interior.alpha0, annulus.alpha0)
    if abs(interior.alpha0 - annulus.alpha0) > 1e-9 * scale:
        raise HypothesisViolation(
            f"boundary value mismatch at the interface: beta(R) = "
            f"{interior.alpha0} vs alpha(R) = {annulus.alpha0}")

    kink_R = interior.slope_at_R - annulus.derivative_at_R
    kink_out = annulus.outer_derivative
    slope_scale = max(1.0, abs(interior.slope_at_R),
                      abs(annulus.derivative_at_R))
    rep = CertificateReport("glued subsolution checks")
    rep.add("slope drops at R (beta' <= alpha')",
            HOLDS if kink_R <= CHECK_TOL * slope_scale else FAILS,
            interior.slope_at_R, annulus.derivative_at_R)
    rep.add("outer slope nonpositive",
            HOLDS if kink_out <= CHECK_TOL * slope_scale else FAILS,
            kink_out, 0.0)

    if a is not None and b is not None and sigma is not None:
        grid = annulus.alpha.grid
        av = _sample(a, grid)
        bv = _sample(b, grid)
        vals = annulus.alpha.values
        op = assemble(annulus.manifold, grid, 0.0)
        free = ~op.dirichlet
        defect = (op.apply(vals) + av * vals
                  - bv * np.abs(vals) ** sigma * np.sign(vals))[free]
        worst = float(np.min(defect))
        dscale = max(1.0, float(np.max(np.abs(av * vals))))
        rep.add("subsolution inequality on the annulus",
                HOLDS if worst >= -CHECK_TOL * dscale else FAILS, worst, 0.0,
                note="with the true coefficients")
        ball = interior.beta.grid
        M = annulus.manifold
        beta_vals = interior.beta.values
        lap = -2.0 * interior.eta * interior.alpha0 \
            * (1.0 + M.r_times_warp_coefficient(ball.r))
        av_b = _sample(a, ball)
        bv_b = _sample(b, ball)
        defect_b = (lap + av_b * beta_vals - bv_b * beta_vals ** sigma)
        worst_b = float(np.min(defect_b))
        bscale = max(1.0, float(np.max(np.abs(av_b * beta_vals))))
        rep.add("subsolution inequality on the ball",
                HOLDS if worst_b >= -CHECK_TOL * bscale else FAILS,
                worst_b, 0.0, note="with the true coefficients")

    if not rep.holds:
        raise KinkSignError(
            "glued profile is not a weak subsolution:\n" + rep.format())
    return GlobalSubsolution(interior, annulus, kink_R, kink_out, rep,
                             existence)


def build_global_subsolution(M: ModelManifold, a, b, sigma: float, R: float,
                             T_o: float, *, eps: float | None = None,
                             alpha0: float = 1.0, n: int = 2000,
                             max_halvings: int = 60) -> GlobalSubsolution:
    """Run the full pipeline: condition, annulus, interior, glue.

    The interior feasibility search may shrink the boundary value; the
    annulus is then re-solved at the final value so the two pieces
    meet, with the same absorption perturbation eps throughout.
    """
    existence = existence_condition(M, a, R, T_o, n=n)
    if not existence.holds:
        row = existence.rows[0]
        raise InfeasibleWindow(
            f"existence condition fails: {row.lhs:.6g} <= {row.rhs:.6g}; "
            f"no glued subsolution at R={R}, T_o={T_o}")

    A_minus = negative_part(a)
    if eps is None:
        eps = 1e-3 * float(np.max(_sample(b, build_grid(R + T_o, n,
                                                        r_start=R))))
    annulus = annulus_subsolution(M, A_minus, b, R, T_o, alpha0, eps,
                                  sigma=sigma, n=n)
    interior = interior_subsolution(M, a, b, sigma, R, T_o, alpha0,
                                    annulus.derivative_at_R, eps=eps, n=n,
                                    max_halvings=max_halvings)
    if interior.alpha0 != alpha0:
        annulus = annulus_subsolution(M, A_minus, b, R, T_o,
                                      interior.alpha0, eps,
                                      sigma=sigma, n=n)
    return glue_subsolution(interior, annulus, a=a, b=b, sigma=sigma,
                            existence=existence)


def weak_form_pairing(u_minus: GlobalSubsolution, M: ModelManifold, a, b,
                      sigma: float, support: tuple[float, float, float], *,
                      n_quad: int = 4000) -> float:
    """Weak subsolution pairing against a piecewise-linear hat profile.

    The hat rises linearly from zero at support[0] to one at support[1]
    and back to zero at support[2].  Returns

        integral of (-u' phi' + (a u - b u^sigma) phi) dV

    over the support, which is nonnegative (up to quadrature error) for
    a weak subsolution.  The integral is split at the hat's peak and at
    the glued profile's two kinks so every piece is smooth.
    """
    r0, r1, r2 = (float(x) for x in support)
    if not (0.0 < r0 < r1 < r2):
        raise HypothesisViolation(
            f"hat nodes must be ordered and positive, got {support}")
    af = _as_callable(a)
    bf = _as_callable(b)

    def phi(r):
        up = (r - r0) / (r1 - r0)
        down = (r2 - r) / (r2 - r1)
        return np.clip(np.minimum(up, down), 0.0, None)

    def dphi(r):
        return np.where(r < r1, 1.0 / (r1 - r0), -1.0 / (r2 - r1))

    points = [r0, r1, r2, u_minus.R, u_minus.support_radius]
    cuts = sorted(p for p in set(points) if r0 <= p <= r2)
    total = 0.0
    for left, right in zip(cuts, cuts[1:]):
        if right - left < 1e-14 * r2:
            continue
        rr = np.linspace(left, right, max(16, n_quad // len(cuts)))
        # Stay strictly inside the panel so one-sided slopes are used
        # at the kinks.
        rr[0] = left + 1e-12 * (right - left)
        rr[-1] = right - 1e-12 * (right - left)
        u = u_minus(rr)
        du = u_minus.slope(rr)
        avals = np.broadcast_to(np.asarray(af(rr), dtype=float), rr.shape)
        bvals = np.broadcast_to(np.asarray(bf(rr), dtype=float), rr.shape)
        weight = M.sphere_constant * np.asarray(M.g(rr)) ** (M.m - 1)
        integrand = (-du * dphi(rr) + (avals * u - bvals
                                       * np.abs(u) ** sigma * np.sign(u))
                     * phi(rr)) * weight
        total += float(np.trapezoid(integrand, rr))
    return total
