"""Certificates that rule out nonzero non-negative solutions.

The equation Delta u + a u - b u^sigma = 0 (and its gradient-term
relatives) admits no nontrivial non-negative solution when the
coefficients decay slowly enough relative to the volume growth of the
model.  This module turns those vanishing results into checkable
certificates:

* ``params_check`` evaluates the parameter window of each rule with
  exact rational arithmetic, so boundary cases are decided without
  rounding;
* ``lemma31_certificate`` verifies the a-priori growth estimate for
  ball integrals of a solution, with constants fitted at an anchor
  radius and the inequality demanded at every larger one;
* ``thm33_check`` / ``cor32pp_check`` verify the full hypothesis sets
  (coefficient floors, integrability, spectral positivity, volume
  growth) and conclude non-existence when everything holds;
* ``thm32prime_check`` verifies the differential inequality satisfied
  by a supplied positive profile together with its growth floor;
* ``nonintegrability_test`` decides whether the reciprocal of a sphere
  integral fails to be integrable at infinity;
* ``ab_comparison_scenario`` evaluates the closed-form decision rule
  for the borderline coupling a(r) = k/(1+r^2) and cross-checks it
  against computed blow-up limits.

Asymptotic O(.) hypotheses are decided by least-squares fits on
geometric radii with the package-wide exponent slack; every fit is
reported so a human can override the verdict.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .errors import DomainError, HypothesisViolation, ParabolicManifold
from .fits import (FAILS, HOLDS, INCONCLUSIVE, SLACK, RateFit, power_fit,
                   preferred_model, geometric_radii)
from .logistic import LogisticProblem, blowup_solution
from .manifold import ModelManifold, classify_growth, is_nonparabolic
from .radial import RadialField
from .reports import CertificateReport
from .spectrum import SIGN_NONNEGATIVE, spectrum_bottom

# Rule tokens accepted by params_check and the command line.
RULES = ("3.2", "3.3", "3.2prime", "cor3.17", "cor3.2pp", "lemma3.1")

# A blow-up family whose origin values decay at least this fast (as a
# log-log slope in the exhaustion radius) counts as vanishing in the
# coupling-rule cross-check.
DECAY_SLOPE = -0.25

# Dense quadrature resolution for the cumulative ball integrals that
# feed the asymptotic fits (the fits tolerate far larger errors).
QUADRATURE_NODES = 4097


@dataclass(frozen=True)
class NonexistenceParams:
    """Constants entering the vanishing rules.

    H scales the coefficient in the auxiliary differential inequality,
    K its gradient term, grad_coeff_A the |grad u|^2 coefficient of the
    solution inequality, sigma the absorption exponent, beta_exp the
    sphere-integral exponent, p the integrability exponent, mu the decay
    exponent of b, delta the growth exponent of the auxiliary profile,
    and q the sphere-integral exponent of the corollary window.  Which
    constraints apply depends on the rule; ``params_check`` evaluates
    them rather than assuming them.
    """

    H: float = 1.0
    K: float = 0.0
    grad_coeff_A: float = 0.0
    sigma: float = 2.0
    beta_exp: float = 0.0
    p: float = 2.0
    mu: float = 0.0
    delta: float | None = None
    q: float | None = None


def _frac(x, name: str) -> Fraction | None:
    """Exact rational image of a parameter (floats are exact binary
    rationals, so comparisons never suffer rounding)."""
    if x is None:
        return None
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    xf = float(x)
    if not math.isfinite(xf):
        raise DomainError(f"parameter {name} must be finite, got {x!r}")
    return Fraction(xf)


def params_check(theorem: str, params: NonexistenceParams) -> CertificateReport:
    """Evaluate the parameter window of one vanishing rule.

    Pure predicate: every inequality of the window named by ``theorem``
    (one of RULES) is evaluated with exact rational arithmetic and
    reported as a row, boundary cases included.
    """
    t = str(theorem)
    H = _frac(params.H, "H")
    K = _frac(params.K, "K")
    A = _frac(params.grad_coeff_A, "grad_coeff_A")
    sg = _frac(params.sigma, "sigma")
    beta = _frac(params.beta_exp, "beta_exp")
    p = _frac(params.p, "p")
    mu = _frac(params.mu, "mu")
    dl = _frac(params.delta, "delta")
    q = _frac(params.q, "q")
    zero, one = Fraction(0), Fraction(1)

    rep = CertificateReport(f"parameter window ({t})")

    def row(name, lhs, rhs, *, strict=False, note=""):
        ok = (lhs < rhs) if strict else (lhs <= rhs)
        rep.add(name, HOLDS if ok else FAILS, float(lhs), float(rhs), note)

    if t == "3.2":
        row("1 <= H", one, H)
        row("-1 < K", Fraction(-1), K, strict=True)
        row("max{0, A} <= H(K+1) - 1", max(zero, A), H * (K + 1) - 1)
        row("max{0, A} <= beta", max(zero, A), beta)
        row("beta <= H(K+1) - 1", beta, H * (K + 1) - 1)
        row("1 <= sigma", one, sg,
            note="exponent range applied for non-negative solutions")
    elif t == "3.3":
        row("A <= 1", A, one)
        row("A < H - 1", A, H - 1, strict=True)
        ok = (one < sg) and (sg <= 2 * H + 1)
        rep.add("1 < sigma <= 2H + 1", HOLDS if ok else FAILS,
                float(sg), float(2 * H + 1))
        row("sigma < 2H - A", sg, 2 * H - A, strict=True)
    elif t == "lemma3.1":
        row("1 <= p", one, p)
        row("A + 2 < p", A + 2, p, strict=True)
        row("1 < sigma", one, sg, strict=True)
    elif t == "3.2prime":
        row("0 < H", zero, H, strict=True)
        row("A <= -1", A, Fraction(-1))
        row("0 <= sigma", zero, sg)
        row("1 < p", one, p, strict=True)
        if dl is None:
            rep.add("0 < delta", FAILS, None, 0.0,
                    "an explicit growth exponent delta is required")
        else:
            row("0 < delta", zero, dl, strict=True)
    elif t == "cor3.17":
        row("1 <= H", one, H)
        ok = (zero <= beta) and (beta <= H - 1)
        rep.add("0 <= beta <= H - 1", HOLDS if ok else FAILS,
                float(beta), float(H - 1))
        rep.add("sigma unrestricted", HOLDS, float(sg), None,
                "strictly positive solutions admit any real exponent")
    elif t == "cor3.2pp":
        row("1 < sigma", one, sg, strict=True)
        row("A <= -1", A, Fraction(-1))
        if q is None:
            rep.add("max{1, 3 - sigma} < q", FAILS, None, None,
                    "the sphere-integral exponent q is required")
            rep.add("0 <= mu <= 2(sigma-1)/(sigma+q-2)", FAILS,
                    float(mu), None, "window undefined without q")
            rep.add("(q + sigma - 2)/(sigma - 1) < p", FAILS,
                    float(p), None, "window undefined without q")
        else:
            row("max{1, 3 - sigma} < q", max(one, 3 - sg), q, strict=True)
            den = sg + q - 2
            if den > 0 and sg > 1:
                bound = 2 * (sg - 1) / den
                ok = (zero <= mu) and (mu <= bound)
                rep.add("0 <= mu <= 2(sigma-1)/(sigma+q-2)",
                        HOLDS if ok else FAILS, float(mu), float(bound))
                row("(q + sigma - 2)/(sigma - 1) < p", den / (sg - 1), p,
                    strict=True)
            else:
                rep.add("0 <= mu <= 2(sigma-1)/(sigma+q-2)", FAILS,
                        float(mu), None, "window undefined at these exponents")
                rep.add("(q + sigma - 2)/(sigma - 1) < p", FAILS,
                        float(p), None, "window undefined at these exponents")
    else:
        raise DomainError(
            f"unknown rule {t!r}; valid rules: {', '.join(RULES)} "
            "(the coupling rule 'ab' takes (k, m, lambda) through "
            "ab_comparison_scenario)")

    rep.conclusion = ("parameters lie in the admissible window"
                      if rep.holds else "parameter window violated")
    rep.data.update(theorem=t, params={
        "H": float(H), "K": float(K), "grad_coeff_A": float(A),
        "sigma": float(sg), "beta_exp": float(beta), "p": float(p),
        "mu": float(mu), "delta": None if dl is None else float(dl),
        "q": None if q is None else float(q)})
    return rep


# ---------------------------------------------------------------------------
# sampling and quadrature helpers


def _coefficient_fn(coeff):
    """Vectorized evaluator for a constant, callable, or radial field."""
    if isinstance(coeff, RadialField):
        return coeff
    if callable(coeff):
        def fn(s):
            s = np.asarray(s, dtype=float)
            out = np.asarray(coeff(s), dtype=float)
            return np.broadcast_to(out, s.shape).astype(float)
        return fn
    value = float(coeff)
    return lambda s: np.full(np.shape(s), value, dtype=float)


def _positive_part(fn):
    return lambda s: np.maximum(fn(s), 0.0)


def _ball_integrals(M: ModelManifold, integrand, radii) -> np.ndarray:
    """Cumulative int_{B_r} integrand dV at each radius, radial trapezoid."""
    radii = np.asarray(radii, dtype=float)
    r_max = float(radii.max())
    s = np.linspace(0.0, r_max, QUADRATURE_NODES)
    weight = np.asarray(M.g(s), dtype=float) ** (M.m - 1)
    with np.errstate(invalid="ignore", over="ignore", divide="ignore"):
        dens = np.where(weight > 0.0,
                        np.asarray(integrand(s), dtype=float) * weight, 0.0)
    if not np.all(np.isfinite(dens)):
        raise DomainError("integrand is not finite on the sampled range")
    cum = cumulative_trapezoid(dens, s, initial=0.0)
    return M.sphere_constant * np.interp(radii, s, cum)


def _validate_range(M: ModelManifold, r_range) -> tuple[float, float]:
    lo, hi = (float(r_range[0]), float(r_range[1]))
    if not (0 < lo < hi):
        raise DomainError(f"invalid r_range {r_range!r}")
    if hi >= M.warping.r_max:
        raise DomainError("r_range exceeds the tabulated warping range")
    if hi / lo < 4.0:
        raise DomainError(
            "r_range must span at least a factor of 4 for a meaningful fit")
    return lo, hi


def _log_aware_fit(radii: np.ndarray, values: np.ndarray) -> tuple[RateFit, bool]:
    """Power fit that recognizes a single logarithmic factor.

    Returns (fit, with_log): the plain power fit, unless dividing the
    data by log r reduces the rms log-residual by a factor of two, in
    which case the normalized fit is returned (its slope is the power
    of a model c r^s log r).  A pure power law keeps its exact exponent;
    threshold families like r log r are classified by their power part.
    """
    plain = power_fit(radii, values)
    logged = power_fit(radii, values / np.maximum(np.log(radii), 1.0))
    if (np.isfinite(logged.rms_residual)
            and logged.rms_residual < 0.5 * plain.rms_residual):
        return logged, True
    return plain, False


def _floor_fit_row(rep: CertificateReport, name: str, radii: np.ndarray,
                   values: np.ndarray, mu: float, *, what: str = "b") -> None:
    """Row for a lower decay floor: values >= C r^-mu over the range."""
    if np.min(values) <= 0.0:
        rep.add(name, FAILS, float(np.min(values)), None,
                f"{what} must be positive on the sampled range")
        return
    fit = power_fit(radii, values)
    c_fit = float(np.min(values * radii ** mu))
    ok = fit.slope >= -mu - SLACK
    rep.add(name, HOLDS if ok else FAILS, fit.slope, -mu,
            note=f"fitted floor constant C = {c_fit:.6g}; slack {SLACK:g}")


def _sigma_consistent(problem: LogisticProblem, params: NonexistenceParams) -> None:
    if float(params.sigma) != float(problem.sigma):
        raise DomainError(
            f"params.sigma = {params.sigma} disagrees with the problem's "
            f"absorption exponent {problem.sigma}")


# ---------------------------------------------------------------------------
# integral growth certificate


def lemma31_certificate(problem: LogisticProblem, u, p: float,
                        grad_coeff_A: float, R_schedule) -> CertificateReport:
    """A-priori growth bound for ball integrals of a solution.

    For a non-negative solution u the weighted integral
    LHS(R) = int_{B_R} b u^{p+sigma-2} is controlled by

        C1 R^{-2(p+sigma-2)/(sigma-1)} int_{B_2R} b^{-(p-1)/(sigma-1)}
        + C2 int_{B_2R} (a_+/b)^{(p-1)/(sigma-1)} a_+.

    The constants are not explicit, so each is anchored at the smallest
    scheduled radius (C_i = LHS/term_i there, zero if its term
    vanishes) and the inequality is then demanded at every larger
    radius.  The fitted growth order of LHS is reported alongside.
    An identically zero profile passes trivially.
    """
    p = float(p)
    A = float(grad_coeff_A)
    sg = float(problem.sigma)
    if not p >= 1.0:
        raise HypothesisViolation(f"need p >= 1, got p = {p}")
    if not p > A + 2.0:
        raise HypothesisViolation(
            f"need p > A + 2 = {A + 2.0}, got p = {p}")
    radii = [float(R) for R in R_schedule]
    if len(radii) < 2:
        raise HypothesisViolation("the radius schedule needs at least two radii")
    if any(r2 <= r1 for r1, r2 in zip(radii, radii[1:])):
        raise HypothesisViolation("the radius schedule must increase")
    M = problem.manifold
    radii_arr = np.asarray(radii)

    rep = CertificateReport("integral growth certificate (lemma3.1)")

    uf = _coefficient_fn(u)
    probe = np.linspace(0.0, radii[-1], QUADRATURE_NODES)
    uv = np.asarray(uf(probe), dtype=float)
    scale = float(np.max(np.abs(uv)))
    if scale == 0.0:
        rep.add("nontrivial profile", HOLDS, 0.0, None,
                "the profile vanishes identically; the estimate is void")
        rep.conclusion = "trivial pass for the zero profile"
        rep.data.update(radii=radii, lhs=[0.0] * len(radii), trivial=True)
        return rep
    if float(np.min(uv)) < -1e-9 * scale:
        raise HypothesisViolation(
            "the estimate applies to non-negative profiles; "
            f"min u = {float(np.min(uv)):.3e}")

    bf = _coefficient_fn(problem.b)
    if float(np.min(bf(np.linspace(0.0, 2 * radii[-1], QUADRATURE_NODES)))) <= 0.0:
        raise HypothesisViolation("the absorption coefficient must be positive")
    a_plus = _positive_part(_coefficient_fn(problem.a))

    u_pow = p + sg - 2.0
    e_pref = -2.0 * u_pow / (sg - 1.0)
    e_b = -(p - 1.0) / (sg - 1.0)
    e_ratio = (p - 1.0) / (sg - 1.0)

    def clamped_u(s):
        return np.maximum(uf(s), 0.0)

    lhs = _ball_integrals(M, lambda s: bf(s) * clamped_u(s) ** u_pow, radii_arr)
    doubled = 2.0 * radii_arr
    first = radii_arr ** e_pref * _ball_integrals(
        M, lambda s: bf(s) ** e_b, doubled)
    second = _ball_integrals(
        M, lambda s: (a_plus(s) / bf(s)) ** e_ratio * a_plus(s), doubled)

    C1 = float(lhs[0] / first[0]) if first[0] > 0.0 else 0.0
    C2 = float(lhs[0] / second[0]) if second[0] > 0.0 else 0.0
    rep.add("anchored constants", HOLDS, None, None,
            f"C1 = {C1:.6g}, C2 = {C2:.6g}, each fitted at R = {radii[0]:g}")
    for i in range(1, len(radii)):
        rep.add_inequality(f"integral bound at R = {radii[i]:g}",
                           float(lhs[i]), C1 * float(first[i]) + C2 * float(second[i]))

    fit = power_fit(radii_arr, lhs)
    note = (f"fitted over {len(radii)} radii; rms {fit.rms_residual:.2g}"
            if math.isfinite(fit.slope) else "fit unavailable")
    rep.add("growth order of the left-hand side", HOLDS, fit.slope, None, note)

    rep.conclusion = ("the integral estimate is consistent at every "
                      "scheduled radius" if rep.holds else
                      "the anchored estimate fails beyond the anchor radius")
    rep.data.update(radii=radii, lhs=lhs.tolist(), first_term=first.tolist(),
                    second_term=second.tolist(), C1=C1, C2=C2,
                    lhs_growth_exponent=fit.slope, trivial=False)
    return rep


# ---------------------------------------------------------------------------
# hypothesis checkers


def thm33_check(problem: LogisticProblem, M: ModelManifold,
                params: NonexistenceParams, r_range, *, n: int = 2000,
                R_schedule=None) -> CertificateReport:
    """Full hypothesis check for the slow-decay vanishing rule.

    Verifies, over the given radius range: the parameter window, the
    decay floor b >= C r^-mu with 0 <= mu <= 2, boundedness of a_+/b,
    the growth of int_{B_r} a_+ against r^(2-mu) log r, non-negativity
    of the spectral bottom of Delta + H a (delegated to the spectrum
    module along an exhaustion schedule), and the volume growth target
    r^(2 + (2-mu) 2H/(sigma-1)) log r.  All rows holding certifies that
    no nonzero non-negative solution exists.
    """
    _sigma_consistent(problem, params)
    lo, hi = _validate_range(M, r_range)
    mu = float(params.mu)
    H = float(params.H)
    sg = float(params.sigma)

    rep = CertificateReport("vanishing certificate (3.3)")
    rep.rows.extend(params_check("3.3", params).rows)

    radii = geometric_radii(lo, hi)
    mu_f = _frac(params.mu, "mu")
    ok_window = Fraction(0) <= mu_f <= Fraction(2)
    rep.add("decay window 0 <= mu <= 2", HOLDS if ok_window else FAILS,
            mu, 2.0)

    bf = _coefficient_fn(problem.b)
    af = _coefficient_fn(problem.a)
    bv = np.asarray(bf(radii), dtype=float)
    _floor_fit_row(rep, "lower decay bound b >= C r^-mu", radii, bv, mu)

    if np.min(bv) > 0.0:
        ratio = np.max(np.maximum(af(radii), 0.0) / bv)
        sup_ratio = float(ratio)
        rep.add("sup of a_+/b over the sampled range",
                HOLDS if math.isfinite(sup_ratio) else FAILS, sup_ratio, None)
    else:
        rep.add("sup of a_+/b over the sampled range", FAILS, None, None,
                "undefined where b is not positive")

    a_int = _ball_integrals(M, _positive_part(af), radii)
    target_a = 2.0 - mu
    if float(a_int[-1]) == 0.0:
        rep.add("growth of the ball integral of a_+", HOLDS, 0.0, target_a,
                "the positive part vanishes on the sampled range")
        a_slope = -math.inf
    else:
        fit = power_fit(radii, a_int / np.maximum(np.log(radii), 1.0))
        a_slope = fit.slope
        rep.add("growth of the ball integral of a_+",
                HOLDS if fit.slope <= target_a + SLACK else FAILS,
                fit.slope, target_a, f"target r^{target_a:g} log r")

    sched = (np.asarray([float(R) for R in R_schedule])
             if R_schedule is not None
             else np.geomspace(max(1.0, lo), hi, 5))
    spectral = spectrum_bottom(M, problem.a, H, sched, n=n)
    ok_spec = spectral.sign_verdict == SIGN_NONNEGATIVE
    rep.add("spectral bottom of Delta + H a is non-negative",
            HOLDS if ok_spec else FAILS, spectral.eigenvalue, 0.0,
            note=(f"limit estimate over R in [{sched[0]:g}, {sched[-1]:g}]; "
                  f"certified upper bound {spectral.raw_bound:.6g}"))

    target_vol = 2.0 + (2.0 - mu) * 2.0 * H / (sg - 1.0)
    growth = classify_growth(M, target_vol, with_log_factor=True,
                             r_range=(lo, hi))
    rep.add("volume growth within the polynomial target", growth.verdict,
            growth.fitted_exponent, target_vol,
            note=f"regime {growth.regime}; target r^{target_vol:g} log r")

    rep.conclusion = ("no nonzero non-negative solution exists"
                      if rep.holds else
                      "not certified: a hypothesis failed or is inconclusive")
    rep.data.update(
        radii=radii.tolist(), b_values=bv.tolist(),
        a_plus_ball_integrals=a_int.tolist(),
        a_plus_growth_exponent=a_slope,
        spectral_radii=sched.tolist(),
        spectral_sequence=spectral.sequence.tolist(),
        spectral_limit=spectral.eigenvalue,
        volume_radii=growth.radii.tolist(),
        volumes=growth.volumes.tolist(),
        volume_exponent=growth.fitted_exponent,
        volume_target=target_vol)
    return rep


def nonintegrability_test(u, q: float, M: ModelManifold, r_range, *,
                          weight_exponent: float = 0.0) -> CertificateReport:
    """Decide whether r^w / int_{sphere r} u^q fails to be integrable.

    The sphere integral F(r) = omega g^(m-1) u(r)^q is sampled on
    geometric radii and fitted by a power law (with a single log factor
    recognized when it clearly improves the fit); the reciprocal
    integral diverges iff the fitted exponent is <= weight_exponent + 1
    up to the package slack.  A vanishing F makes the reciprocal
    unbounded and is flagged as trivial divergence.  The verdict is
    scale-invariant in u.
    """
    q = float(q)
    if not q > 0.0:
        raise HypothesisViolation(f"need a positive exponent, got q = {q}")
    w = float(weight_exponent)
    if w < 0.0:
        raise DomainError(f"the weight exponent must be >= 0, got {w}")
    lo, hi = _validate_range(M, r_range)
    radii = geometric_radii(lo, hi)

    uf = _coefficient_fn(u)
    uv = np.asarray(uf(radii), dtype=float)
    if np.any(uv < 0.0):
        raise DomainError("the profile must be non-negative")
    F = M.sphere_constant * np.asarray(M.g(radii), dtype=float) ** (M.m - 1) \
        * uv ** q

    rep = CertificateReport("non-integrability test")
    threshold = w + 1.0
    if np.any(F <= 0.0):
        rep.add("reciprocal sphere integral diverges", HOLDS, None, threshold,
                note=("the sphere integral vanishes at a sampled radius, so "
                      "the reciprocal is unbounded (trivial divergence)"))
        slope = -math.inf
        divergent = True
        proxy = "vanishing integrand"
    else:
        fit, with_log = _log_aware_fit(radii, F)
        slope = fit.slope
        divergent = slope <= threshold + SLACK
        proxy = "power fit" + (" with log factor" if with_log else "")
        rep.add("reciprocal sphere integral diverges",
                HOLDS if divergent else FAILS, slope, threshold,
                note=(f"proxy: {proxy}, sphere integral ~ r^{slope:.4g}"
                      f"{' log r' if with_log else ''} "
                      f"(rms {fit.rms_residual:.2g}); divergence iff "
                      f"exponent <= {threshold:g} + {SLACK:g}"))
    rep.conclusion = ("the weighted reciprocal integral diverges"
                      if divergent else
                      "the weighted reciprocal integral converges: "
                      "the growth restriction fails")
    rep.data.update(radii=radii.tolist(), sphere_integrals=F.tolist(),
                    fitted_exponent=slope, weight_exponent=w,
                    exponent=q, divergent=bool(divergent), proxy=proxy)
    return rep


def thm32prime_check(problem: LogisticProblem, phi: RadialField,
                     params: NonexistenceParams, r_range, *, u=None,
                     residual_tol: float = 1e-6) -> CertificateReport:
    """Hypothesis check for the vanishing rule built on a positive profile.

    Verifies pointwise (same stencil as the solvers) that phi satisfies
    Delta phi + H a phi <= |grad phi|^2 / phi, fits the lower growth
    floor phi >= C r^(1/delta), and — when a candidate solution profile
    u is supplied — runs the weighted non-integrability test with
    numerator r^(delta p).  With all rows holding, any non-negative
    solution obeying the spherical growth restriction vanishes.
    """
    M = problem.manifold
    if not isinstance(phi, RadialField):
        raise DomainError("phi must be a radial field on a solver grid")
    if float(np.min(phi.values)) <= 0.0:
        raise DomainError("phi must be strictly positive")
    lo, hi = _validate_range(M, r_range)

    rep = CertificateReport("vanishing certificate (3.2prime)")
    rep.rows.extend(params_check("3.2prime", params).rows)
    H = float(params.H)

    from .radial import assemble  # local import keeps module load light
    op = assemble(M, phi.grid, 0.0)
    av = _coefficient_fn(problem.a)(phi.grid.r)
    lap = op.apply(phi.values)
    grad = phi.derivative().values
    carre = grad ** 2 / phi.values
    excess = lap + H * av * phi.values - carre
    denom = 1.0 + np.abs(lap) + np.abs(H * av * phi.values) + np.abs(carre)
    interior = ~op.dirichlet
    worst = float(np.max(excess[interior] / denom[interior]))
    rep.add_inequality("differential inequality for phi", worst, residual_tol,
                       note="one-sided residual, relative to the local scale")

    delta = params.delta
    if delta is None:
        rep.add("growth floor phi >= C r^(1/delta)", FAILS, None, None,
                "an explicit growth exponent delta is required")
    else:
        delta = float(delta)
        f_lo = max(lo, float(phi.grid.r[1]))
        f_hi = min(hi, float(phi.grid.R))
        if f_hi / f_lo < 4.0:
            raise HypothesisViolation(
                "phi's grid is too short for the asymptotic growth fit")
        fit_radii = geometric_radii(f_lo, f_hi)
        pv = phi(fit_radii)
        fit = power_fit(fit_radii, pv)
        c_fit = float(np.min(pv / fit_radii ** (1.0 / delta)))
        ok = fit.slope >= 1.0 / delta - SLACK
        rep.add("growth floor phi >= C r^(1/delta)",
                HOLDS if ok else FAILS, fit.slope, 1.0 / delta,
                note=f"fitted floor constant C = {c_fit:.6g}; slack {SLACK:g}")

    growth = None
    if u is not None:
        if delta is None:
            raise HypothesisViolation(
                "the weighted growth restriction needs an explicit delta")
        growth = nonintegrability_test(u, float(params.p), M, (lo, hi),
                                       weight_exponent=delta * float(params.p))
        rep.add("spherical growth restriction on the candidate profile",
                growth.rows[0].verdict, growth.rows[0].lhs,
                growth.rows[0].rhs, growth.rows[0].note)
        rep.data["growth_restriction"] = growth.data

    if rep.holds:
        rep.conclusion = ("the supplied profile cannot be a nonzero "
                          "non-negative solution" if u is not None else
                          "any non-negative solution obeying the spherical "
                          "growth restriction vanishes")
    else:
        rep.conclusion = "not certified: a hypothesis failed"
    rep.data.update(residual=worst)
    return rep


def cor32pp_check(problem: LogisticProblem, M: ModelManifold,
                  params: NonexistenceParams, r_range) -> CertificateReport:
    """Hypothesis check for the integrable-coefficient vanishing rule.

    Requires a non-parabolic model (raised otherwise), then verifies
    the parameter window, integrability of a_+ at infinity, the growth
    of int_{B_r} a_+^p against its polynomial target, the volume growth
    target, and the decay floor on b.  All rows holding certifies that
    no nonzero non-negative solution of the gradient-term inequality
    exists.
    """
    _sigma_consistent(problem, params)
    if not is_nonparabolic(M):
        raise ParabolicManifold(
            "the rule needs a finite Green kernel; the model is parabolic")
    lo, hi = _validate_range(M, r_range)
    sg = float(params.sigma)
    mu = float(params.mu)
    p = float(params.p)

    rep = CertificateReport("vanishing certificate (cor3.2pp)")
    rep.rows.extend(params_check("cor3.2pp", params).rows)
    radii = geometric_radii(lo, hi)

    a_plus = _positive_part(_coefficient_fn(problem.a))
    density = M.sphere_constant \
        * np.asarray(M.g(radii), dtype=float) ** (M.m - 1) * a_plus(radii)
    outer = density[radii >= math.sqrt(lo * hi)]
    if float(np.max(density, initial=0.0)) == 0.0:
        rep.add("a_+ integrable at infinity", HOLDS, 0.0, -1.0,
                "the positive part vanishes on the sampled range")
    elif float(np.max(outer, initial=0.0)) == 0.0:
        rep.add("a_+ integrable at infinity", HOLDS, -math.inf, -1.0,
                "the positive part vanishes on the outer half of the range")
    else:
        keep = density > 0.0
        best, _ = preferred_model(radii[keep], density[keep])
        if best.model == "exponential":
            ok = best.slope < 0.0
            note = f"exponential fit of the volume density, rate {best.slope:.4g}"
        else:
            ok = best.slope < -1.0 - SLACK
            note = f"power fit of the volume density, exponent {best.slope:.4g}"
        rep.add("a_+ integrable at infinity", HOLDS if ok else FAILS,
                best.slope, -1.0, note)

    q = params.q
    if q is not None and float(q) > 1.0 and sg > 1.0:
        qf = float(q)
        e3 = (2.0 * (sg - 1.0) - mu * (qf + sg - 2.0)) * (p - 1.0) / (qf - 1.0)
        a_pow = _ball_integrals(M, lambda s: a_plus(s) ** p, radii)
        if float(a_pow[-1]) == 0.0:
            rep.add("growth of the ball integral of a_+^p", HOLDS, 0.0, e3,
                    "the integral vanishes on the sampled range")
        else:
            fit = power_fit(radii, a_pow)
            rep.add("growth of the ball integral of a_+^p",
                    HOLDS if fit.slope <= e3 + SLACK else FAILS,
                    fit.slope, e3, f"target r^{e3:g}")
        e4 = 2.0 + (2.0 - mu) * (sg + qf - 2.0) / (sg - 1.0)
        growth = classify_growth(M, e4, with_log_factor=False,
                                 r_range=(lo, hi))
        rep.add("volume growth within the polynomial target", growth.verdict,
                growth.fitted_exponent, e4,
                note=f"regime {growth.regime}; target r^{e4:g}")
        rep.data.update(volume_radii=growth.radii.tolist(),
                        volumes=growth.volumes.tolist(),
                        a_plus_p_integrals=a_pow.tolist())
    else:
        rep.add("growth of the ball integral of a_+^p", FAILS, None, None,
                "target undefined at these exponents")
        rep.add("volume growth within the polynomial target", FAILS,
                None, None, "target undefined at these exponents")

    bv = np.asarray(_coefficient_fn(problem.b)(radii), dtype=float)
    _floor_fit_row(rep, "lower decay bound b >= C r^-mu", radii, bv, mu)

    rep.conclusion = ("no nonzero non-negative solution exists"
                      if rep.holds else
                      "not certified: a hypothesis failed or is inconclusive")
    rep.data.update(radii=radii.tolist(), b_values=bv.tolist(),
                    a_plus_density=density.tolist())
    return rep


# ---------------------------------------------------------------------------
# closed-form coupling rule


def ab_comparison_scenario(k, m: int, lam, *, cross_check: bool = True,
                           R_schedule=(4.0, 8.0, 16.0, 32.0),
                           n: int = 1200) -> CertificateReport:
    """Decision rule for the borderline coupling a(r) = k/(1+r^2).

    In dimension m >= 3 the linearized threshold satisfies
    lambda* >= (m-2)^2/(4k), and non-existence of positive solutions of
    Delta u + lambda a u - u^2 = 0 is certified when
    lambda*/lambda >= min{1, (m-2)/4} — evaluated here with exact
    rational arithmetic, so the certified/inconclusive flip happens at
    the exact threshold.  When ``cross_check`` is set the rule is
    compared against computed blow-up limits: their origin values must
    decay with the exhaustion radius whenever the rule certifies.
    """
    if int(m) != m or m < 3:
        raise HypothesisViolation(f"integer dimension m >= 3 required, got {m}")
    m = int(m)
    kf = _frac(k, "k")
    lf = _frac(lam, "lambda")
    if not kf > 0:
        raise HypothesisViolation(f"k > 0 required, got {k}")
    if not lf > 0:
        raise HypothesisViolation(f"lambda > 0 required, got {lam}")

    lam_star = Fraction((m - 2) ** 2) / (4 * kf)
    threshold = min(Fraction(1), Fraction(m - 2, 4))
    ratio = lam_star / lf
    certified = ratio >= threshold

    rep = CertificateReport("coupling comparison rule")
    note = f"lambda* lower bound (m-2)^2/(4k) = {float(lam_star):.6g}"
    if Fraction(m - 2, 4) == 1:
        note += "; threshold at the boundary between the two regimes"
    rep.add("lambda*/lambda >= min{1, (m-2)/4}",
            HOLDS if certified else INCONCLUSIVE,
            float(ratio), float(threshold), note)
    rep.data.update(lam_star=float(lam_star), threshold=float(threshold),
                    ratio=float(ratio), certified=bool(certified),
                    k=float(kf), m=m, lam=float(lf))

    if cross_check:
        from .manifold import WarpingFunction
        model = ModelManifold(m, WarpingFunction.euclidean())
        lam_f = float(lf)
        k_f = float(kf)
        problem = LogisticProblem(model,
                                  lambda r: lam_f * k_f / (1.0 + r ** 2),
                                  1.0, 2.0)
        origins = []
        for R in R_schedule:
            sol = blowup_solution(problem, float(R), n=n)
            origins.append(float(sol.solution.values[0]))
        origins_arr = np.asarray(origins)
        fit = power_fit(np.asarray([float(R) for R in R_schedule]), origins_arr)
        decays = (origins[-1] <= 1e-8
                  or (math.isfinite(fit.slope) and fit.slope <= DECAY_SLOPE))
        values = ", ".join(f"{v:.3g}" for v in origins)
        if certified:
            rep.add("blow-up limits decay along the exhaustion",
                    HOLDS if decays else FAILS, fit.slope, DECAY_SLOPE,
                    note=f"origin values {values}")
        else:
            rep.add("blow-up limits decay along the exhaustion", INCONCLUSIVE,
                    fit.slope, DECAY_SLOPE,
                    note=(f"origin values {values}; no decay is required "
                          "when the rule does not certify"))
        rep.data["cross_check"] = {
            "radii": [float(R) for R in R_schedule],
            "origin_values": origins,
            "fitted_slope": fit.slope}

    if certified:
        rep.conclusion = ("no positive solution exists at this coupling"
                          if rep.holds else
                          "rule certified but the numerical cross-check "
                          "disagrees — inspect the blow-up limits")
    else:
        rep.conclusion = "decision rule inconclusive at this coupling"
    return rep
