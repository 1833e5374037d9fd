"""Monotone iteration for the stationary logistic equation on a model.

The equation is

    Lap(u) + a(r) u - b(r) u^sigma = 0,        sigma > 1,  b > 0,

restricted to radial profiles on a ball B_R.  Dirichlet problems are
solved by the classical monotone (sub/supersolution) iteration: the
nonlinearity is shifted so each sweep solves a linear problem

    (Lap - c) u_next = -(c u + a u - b u^sigma),

and c is chosen large enough that the right-hand side is monotone in u
over the current bracket.  Starting from a supersolution the sweeps
descend; starting from a subsolution they ascend.  Both branches are
run and their limits must agree up to bracketing order.

On top of the single solve the module builds the two limit objects of
interest: the blow-up solution on a fixed ball (boundary data sent to
infinity along a geometric schedule) and the maximal solution on the
whole model (blow-up solutions on an increasing exhaustion of balls,
which restrict monotonically).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import (
    HypothesisViolation,
    InconsistentLimit,
    MonotonicityError,
    NonConvergence,
)
from .fits import FAILS, HOLDS, SLACK, power_fit, preferred_model
from .manifold import ModelManifold, ball_volume
from .radial import (
    RadialField,
    RadialGrid,
    _sample,
    assemble,
    build_grid,
    layered_ball_grid,
    residual,
    solve_linear,
)
from .reports import CertificateReport

# Convergence thresholds for a monotone sweep.  All sweep criteria are
# pointwise relative — an increment step is measured as
# max |step| / (1 + |u|) — because blow-up data put values of wildly
# different magnitude on one grid and a global scale would either lose
# the interior (scaled by sup u = boundary datum) or chase rounding
# noise in the boundary layer (absolute).  The increment test is the
# primary one: monotone sequences are Cauchy exactly when it dies.
INCREMENT_TOL = 1e-10
RESIDUAL_TOL = 1e-9
MAX_SWEEPS = 10_000

# Tolerance (pointwise relative, like the increments) for order
# violations in the schedule and exhaustion ledgers.  Monotonicity
# holds exactly in real arithmetic, so anything beyond rounding noise
# means the bracket was not a bracket.
ORDER_TOL = 1e-9

# A sweep is allowed this much rounding noise against the order before
# the bracket is declared bad.  The boundary-layer stencil spans ten
# orders of magnitude in cell size, so mid-sweep solves carry far more
# noise than the converged stage solutions the ledgers above compare
# (observed up to ~1e-8 at the deepest refinements); a genuinely
# invalid starting iterate presents as an O(1) defect, so the guard can
# sit well above the noise and still catch it.  Within the guard the
# iterate is clamped back to exact order (the pointwise min of two
# supersolutions is a supersolution, so clamping stays inside the
# scheme).
SWEEP_GUARD = 1e-6


def _relative_excess(excess: np.ndarray, reference: np.ndarray) -> float:
    """Largest pointwise value of excess / (1 + |reference|), floored at 0."""
    if excess.size == 0:
        return 0.0
    return max(0.0, float(np.max(excess / (1.0 + np.abs(reference)))))


def _signed_power(u: np.ndarray, sigma: float) -> np.ndarray:
    """u^sigma extended oddly, so rounding-level negatives stay finite."""
    return np.sign(u) * np.abs(u) ** sigma


@dataclass(frozen=True)
class LogisticProblem:
    """Coefficient data for Lap(u) + a u - b u^sigma = 0 on a model."""

    manifold: ModelManifold
    a: Callable[[float], float] | float
    b: Callable[[float], float] | float
    sigma: float

    def __post_init__(self):
        if not self.sigma > 1.0:
            raise HypothesisViolation(
                f"superlinear exponent required: sigma={self.sigma} <= 1")

    def coefficients(self, grid: RadialGrid) -> tuple[np.ndarray, np.ndarray]:
        """Sample (a, b) on the grid nodes; b must not be negative.

        Vanishing b is tolerated so the degenerate linear problem stays
        reachable with an explicit supersolution; everything that needs
        genuine absorption (equilibrium bounds, blow-up limits) checks
        positivity where it is actually used.
        """
        av = _sample(self.a, grid)
        bv = _sample(self.b, grid)
        if np.min(bv) < 0.0:
            raise HypothesisViolation(
                f"absorption coefficient must not be negative: "
                f"min b = {np.min(bv)}")
        return av, bv

    def equilibrium_bound(self, grid: RadialGrid) -> float:
        """A constant C with a - b C^(sigma-1) <= 0 everywhere.

        Any constant at or above sup (a_+ / b)^(1/(sigma-1)) is a
        supersolution of the equation; we pad by one to stay strictly
        on the safe side of rounding.
        """
        av, bv = self.coefficients(grid)
        if np.min(bv) <= 0.0:
            raise HypothesisViolation(
                "no constant supersolution exists where b vanishes; "
                "provide an explicit u_super")
        ratio = np.max(np.maximum(av, 0.0) / bv)
        return float(ratio ** (1.0 / (self.sigma - 1.0)) + 1.0)


@dataclass
class SolverReport:
    """Outcome of a monotone solve, with its iteration ledgers."""

    solution: RadialField
    boundary_value: float
    converged: bool
    sweeps: int
    last_increment: float
    residual: float
    descending: RadialField | None = None
    ascending: RadialField | None = None
    bracket_gap: float = 0.0
    monotone_violation: float = 0.0
    # Blow-up schedule ledger (boundary data -> infinity on a fixed ball).
    schedule_boundary: list[float] = field(default_factory=list)
    schedule_origin: list[float] = field(default_factory=list)
    schedule_change: list[float] = field(default_factory=list)
    # Exhaustion ledger (fixed blow-up data on an increasing ball).
    exhaustion_radii: list[float] = field(default_factory=list)
    restriction_violation: float = 0.0
    comparison: CertificateReport | None = None


def _sweep_operator(M: ModelManifold, grid: RadialGrid, c: np.ndarray):
    return assemble(M, grid, -c)


def _monotone_branch(M: ModelManifold, sigma: float, grid: RadialGrid,
                     av: np.ndarray, bv: np.ndarray,
                     start: np.ndarray, boundary, envelope: np.ndarray,
                     descending: bool, *, tol_increment: float,
                     tol_residual: float, max_sweeps: int):
    """Run one monotone branch of sweeps from ``start``.

    ``envelope`` bounds the iterates from above in absolute value and
    fixes the monotonicity shift.  The shift is pointwise,

        c(r) = 1.1 (|a(r)| + sigma b(r) ref(r)^(sigma-1)),

    with ref the current iterate on a descending branch: the shift only
    needs to dominate -f'(u) between consecutive iterates, and keeping
    it local stops the boundary layer of a blow-up solve (where u stays
    at the Dirichlet data) from freezing the interior at a rate
    1 - O(1/c).
    """
    u = np.asarray(start, dtype=float).copy()
    worst_violation = 0.0
    last_inc = np.inf
    free = None
    for sweep in range(1, max_sweeps + 1):
        ref = np.abs(u) if descending else np.abs(envelope)
        c = 1.1 * (np.abs(av) + sigma * bv * ref ** (sigma - 1.0)) + 1e-8
        op = _sweep_operator(M, grid, c)
        if free is None:
            free = ~op.dirichlet
        rhs = c * u + av * u - bv * _signed_power(u, sigma)
        u_new = solve_linear(op, -rhs, boundary).values
        step = u_new - u
        wrong_way = step[free] if descending else -step[free]
        worst_violation = max(worst_violation,
                              _relative_excess(wrong_way, u[free]))
        if worst_violation > SWEEP_GUARD:
            raise MonotonicityError(
                f"sweep ledger violates {'descent' if descending else 'ascent'} "
                f"by {worst_violation:.3e} (relative); the starting iterate "
                f"is not a {'super' if descending else 'sub'}solution")
        u_new = np.minimum(u_new, u) if descending else np.maximum(u_new, u)
        step = u_new - u
        last_inc = _relative_excess(np.abs(step), u_new)
        u = u_new
        if last_inc < tol_increment:
            return u, sweep, last_inc, worst_violation, True
        if last_inc < np.sqrt(tol_increment):
            # Increment nearly dead: accept early on a genuinely small
            # equation residual (cheaper than grinding out more sweeps).
            # The residual is judged nodewise against the size of the
            # equation's own terms, for the same reason the increments
            # are relative; tightening the increment tolerance tightens
            # the acceptance proportionally so the stopping error
            # scales with it.
            res_nodes = (op.apply(u) + c * u + av * u
                         - bv * _signed_power(u, sigma))[free]
            res_scale = (1.0 + np.abs(av) * np.abs(u)
                         + bv * np.abs(u) ** sigma)[free]
            accept = tol_residual * min(1.0, tol_increment / INCREMENT_TOL)
            if float(np.max(np.abs(res_nodes) / res_scale)) <= accept:
                return u, sweep, last_inc, worst_violation, True
    return u, max_sweeps, last_inc, worst_violation, False


def solve_bvp_monotone(problem: LogisticProblem, R: float, boundary_value: float,
                       *, u_sub=None, u_super=None, n: int = 2000,
                       grading: float = 1.0, grid: RadialGrid | None = None,
                       tol_increment: float = INCREMENT_TOL,
                       tol_residual: float = RESIDUAL_TOL,
                       max_sweeps: int = MAX_SWEEPS,
                       both_branches: bool = True) -> SolverReport:
    """Solve the Dirichlet problem on B_R with data ``boundary_value``.

    ``u_sub`` and ``u_super`` (scalar, callable, or field) bracket the
    solution; defaults are zero and the constant equilibrium bound.
    The descending limit is reported as the solution.
    """
    if boundary_value < 0.0:
        raise HypothesisViolation(
            f"boundary data must be nonnegative: {boundary_value}")
    if grid is None:
        grid = build_grid(R, n, grading=grading)
    av, bv = problem.coefficients(grid)

    upper = _sample(u_super, grid) if u_super is not None else None
    lower = _sample(u_sub, grid) if u_sub is not None else np.zeros(grid.r.size)
    if upper is None:
        upper = np.full(grid.r.size, max(problem.equilibrium_bound(grid),
                                         boundary_value))
    if _relative_excess(lower - upper, upper) > ORDER_TOL:
        raise HypothesisViolation("bracket is out of order: u_sub > u_super")
    edge_slack = ORDER_TOL * (1.0 + abs(boundary_value))
    if not (lower[-1] - edge_slack <= boundary_value <= upper[-1] + edge_slack):
        raise HypothesisViolation(
            f"boundary data {boundary_value} escapes the bracket "
            f"[{lower[-1]}, {upper[-1]}] at r=R")

    desc, sweeps_d, inc_d, viol_d, ok_d = _monotone_branch(
        problem.manifold, problem.sigma, grid, av, bv, upper,
        boundary_value, upper, True,
        tol_increment=tol_increment, tol_residual=tol_residual,
        max_sweeps=max_sweeps)
    report = SolverReport(
        solution=RadialField(grid, desc), boundary_value=boundary_value,
        converged=ok_d, sweeps=sweeps_d, last_increment=inc_d,
        residual=residual(problem.manifold, av, bv, problem.sigma,
                          RadialField(grid, desc)),
        descending=RadialField(grid, desc), monotone_violation=viol_d)

    if both_branches:
        # The descending limit bounds every solution above the
        # subsolution, so it is the sharper ascent envelope.
        asc_env = np.maximum(desc, lower)
        asc, sweeps_a, inc_a, viol_a, ok_a = _monotone_branch(
            problem.manifold, problem.sigma, grid, av, bv, lower,
            boundary_value, asc_env, False,
            tol_increment=tol_increment, tol_residual=tol_residual,
            max_sweeps=max_sweeps)
        report.ascending = RadialField(grid, asc)
        report.sweeps += sweeps_a
        report.converged = ok_d and ok_a
        report.monotone_violation = max(viol_d, viol_a)
        gap = _relative_excess(asc - desc, desc)
        report.bracket_gap = gap
        if gap > ORDER_TOL:
            raise MonotonicityError(
                f"ascending limit exceeds descending limit by {gap:.3e} "
                f"(relative)")
    if not report.converged:
        raise NonConvergence(
            f"monotone iteration did not converge within {max_sweeps} sweeps "
            f"(last increment {report.last_increment:.3e})",
            last=report.solution)
    return report


def _layer_width(problem: LogisticProblem, R: float, datum: float) -> float:
    """Thickness of the absorption layer under boundary data ``datum``.

    Near the boundary the profile obeys u'' ~ b u^sigma, whose first
    integral gives a fall-off length ~ sqrt((sigma+1)/(2b)) *
    (2/(sigma-1)) * datum^-(sigma-1)/2 from the boundary value down.
    """
    s = problem.sigma
    b_edge = max(_coeff_at(problem.b, R), 1e-300)
    width = (np.sqrt((s + 1.0) / (2.0 * b_edge)) * (2.0 / (s - 1.0))
             * max(datum, 1.0) ** (-(s - 1.0) / 2.0))
    return float(width)


def blowup_solution(problem: LogisticProblem, R: float, *,
                    n_schedule=None, n: int = 2000, grading: float = 1.0,
                    grid: RadialGrid | None = None,
                    interior_tol: float = 1e-6,
                    stage_tol: float = INCREMENT_TOL * 1e-2,
                    max_sweeps: int = MAX_SWEEPS) -> SolverReport:
    """Limit of Dirichlet solutions on B_R as the boundary data grow.

    The boundary data run through a geometric schedule (default ratio
    4) until the solution stops moving on the half ball B_{R/2} in
    relative sup norm.  The limit exists because b > 0 builds an
    absorbing boundary layer; the solutions increase with the data, and
    the increase is recorded in the schedule ledger.

    The default grid is the uniform lattice with its last cell refined
    down to the layer width of the largest datum: the layer thins like
    (boundary data)^-(sigma-1)/2, and leaving it unresolved turns the
    schedule's geometric interior convergence into a crawl.
    """
    if n_schedule is None:
        # The interior deficit of a finite-datum stage scales like the
        # boundary-layer shift, datum^-(sigma-1)/2, so the geometric
        # schedule (ratio 4, from 1) must reach data of order
        # tol^(-2/(sigma-1)); two decades of margin cover the
        # case-dependent constant.
        target = (100.0 / interior_tol) ** (2.0 / (problem.sigma - 1.0))
        k_max = max(3, int(np.ceil(np.log(max(target, 4.0)) / np.log(4.0))))
        n_schedule = [4.0 ** k for k in range(k_max + 1)]
    n_schedule = [float(x) for x in n_schedule]
    if len(n_schedule) == 0:
        raise HypothesisViolation("empty boundary schedule")
    if any(b2 <= b1 for b1, b2 in zip(n_schedule, n_schedule[1:])):
        raise HypothesisViolation("boundary schedule must increase")
    if grid is None:
        if grading != 1.0:
            grid = build_grid(R, n, grading=grading)
        else:
            grid = layered_ball_grid(
                R, n, _layer_width(problem, R, n_schedule[-1]) / 4.0)

    interior = grid.r <= R / 2.0 + 1e-12 * R
    prev = None
    report = None
    boundary_hist: list[float] = []
    origin_hist: list[float] = []
    change_hist: list[float] = []
    worst_order = 0.0
    total_sweeps = 0
    converged = False
    for k, data in enumerate(n_schedule):
        # The stages are solved tighter than a single BVP: the schedule
        # ledger compares consecutive stage solutions, whose genuine
        # gaps shrink toward the stopping error; a spare two decades
        # keeps that error out of the ledger.
        step = solve_bvp_monotone(problem, R, data, grid=grid,
                                  tol_increment=stage_tol,
                                  max_sweeps=max_sweeps, both_branches=False)
        u = step.solution.values
        total_sweeps += step.sweeps
        report = step
        boundary_hist.append(data)
        origin_hist.append(float(u[0]))
        if prev is not None:
            drop = _relative_excess(prev - u, prev)
            worst_order = max(worst_order, drop)
            if drop > ORDER_TOL:
                raise MonotonicityError(
                    f"blow-up schedule ledger not increasing: solution fell "
                    f"by {drop:.3e} (relative) between boundary data "
                    f"{n_schedule[k - 1]:.3e} and {data:.3e}")
            change = float(np.max(np.abs(u[interior] - prev[interior])
                                  / np.maximum(np.abs(prev[interior]), 1e-300)))
            change_hist.append(change)
            if change < interior_tol:
                converged = True
                break
        prev = u
    report.schedule_boundary = boundary_hist
    report.schedule_origin = origin_hist
    report.schedule_change = change_hist
    report.sweeps = total_sweeps
    report.converged = converged
    report.monotone_violation = max(report.monotone_violation, worst_order)
    if not converged and len(n_schedule) > 1:
        raise NonConvergence(
            f"blow-up limit not settled on B_(R/2) after boundary data "
            f"{n_schedule[-1]:.3e} (last interior change "
            f"{change_hist[-1] if change_hist else np.inf:.3e})",
            last=report.solution)
    return report


def maximal_solution(problem: LogisticProblem, radii, *, n: int = 2000,
                     u_minus=None, interior_tol: float = 1e-6,
                     max_sweeps: int = MAX_SWEEPS) -> SolverReport:
    """Limit of blow-up solutions along an increasing exhaustion of balls.

    The blow-up solutions on B_R restrict monotonically downward as R
    grows, so their limit on the smallest ball exists; it is the
    maximal solution of the equation on the model (when one exists; an
    identically zero limit against a positive floor ``u_minus`` is the
    defeater and raises InconsistentLimit).

    All the balls share one uniform node spacing (their boundary-layer
    refinements live strictly inside each last cell), so restrictions
    are exact node-for-node comparisons on the common lattice, never
    interpolations.
    """
    radii = [float(R) for R in radii]
    if len(radii) < 2:
        raise HypothesisViolation("exhaustion needs at least two radii")
    if any(r2 <= r1 for r1, r2 in zip(radii, radii[1:])):
        raise HypothesisViolation("exhaustion radii must increase")
    support = getattr(u_minus, "support_radius", None)
    if support is not None and support > radii[0]:
        raise HypothesisViolation(
            f"the lower-bound profile is supported out to {support}, beyond "
            f"the smallest exhaustion ball {radii[0]}")

    h = radii[0] / (n + 1)
    base_steps = n + 1  # lattice nodes strictly inside B_{R_0}, plus the pole

    prev_vals = None
    prev_steps = None
    worst = 0.0
    base_restrictions = []
    report = None
    total_sweeps = 0
    for R in radii:
        steps = int(round(R / h))
        if abs(steps * h - R) > 1e-9 * R:
            raise HypothesisViolation(
                f"exhaustion radius {R} is not commensurate with the base "
                f"spacing {h:.3e}; choose radii as multiples of the smallest")
        step = blowup_solution(problem, R, n=steps - 1,
                               interior_tol=interior_tol,
                               max_sweeps=max_sweeps)
        total_sweeps += step.sweeps
        vals = step.solution.values
        if prev_vals is not None:
            # Shared lattice with the previous stage: its uniform nodes.
            m = prev_steps
            rise = _relative_excess(vals[:m] - prev_vals[:m], prev_vals[:m])
            worst = max(worst, rise)
            if rise > ORDER_TOL:
                raise MonotonicityError(
                    f"exhaustion ledger not decreasing: restriction rose by "
                    f"{rise:.3e} (relative) at R={R}")
        prev_vals, prev_steps = vals, steps
        base_restrictions.append(vals[:base_steps])
        report = step

    base_grid = RadialGrid(np.linspace(0.0, radii[0], base_steps + 1),
                           0.0, radii[0])
    limit_vals = prev_vals[:base_steps + 1].copy()
    limit = RadialField(base_grid, limit_vals)
    settle = float(np.max(np.abs(base_restrictions[-1] - base_restrictions[-2])
                          / np.maximum(np.abs(base_restrictions[-2]), 1e-300)))
    report.solution = limit
    report.exhaustion_radii = radii
    report.restriction_violation = worst
    report.sweeps = total_sweeps
    report.converged = settle < interior_tol
    av, bv = problem.coefficients(base_grid)
    report.residual = residual(problem.manifold, av, bv, problem.sigma, limit)

    if u_minus is not None:
        floor = _sample(u_minus, base_grid)
        deficit = _relative_excess(floor - limit_vals, floor)
        if deficit > ORDER_TOL:
            raise InconsistentLimit(
                f"exhaustion limit drops below the prescribed lower bound by "
                f"{deficit:.3e} (relative); the maximal solution cannot "
                f"dominate it")
    return report


def comparison_check(problem: LogisticProblem, u: RadialField, v: RadialField,
                     *, residual_tol: float = 1e-6) -> CertificateReport:
    """Certify the ordering u <= v for a solution u and supersolution v.

    The rows check that u genuinely solves the equation (small residual
    both ways), that v is a supersolution (one-sided residual), that
    the boundary data are ordered, and finally the ordering itself.
    """
    if u.grid.r.size != v.grid.r.size or not np.allclose(u.grid.r, v.grid.r):
        raise HypothesisViolation("comparison requires a common grid")
    grid = u.grid
    M = problem.manifold
    av, bv = problem.coefficients(grid)
    scale = max(1.0, float(np.max(np.abs(v.values))))

    rep = CertificateReport("comparison certificate")
    res_u = residual(M, av, bv, problem.sigma, u)
    rep.add_inequality("u solves the equation", res_u, residual_tol * scale,
                       note="two-sided residual")

    op = assemble(M, grid, 0.0)
    free = ~op.dirichlet
    action = op.apply(v.values)
    defect = action[free] + av[free] * v.values[free] \
        - bv[free] * _signed_power(v.values[free], problem.sigma)
    rep.add_inequality("v is a supersolution", float(np.max(defect)),
                       residual_tol * scale, note="one-sided residual")
    rep.add_inequality("boundary data ordered", float(u.values[-1]),
                       float(v.values[-1]) + ORDER_TOL * scale)
    # The three rows above are hypotheses of the comparison principle,
    # not its conclusion: their failure invalidates the question rather
    # than answering it negatively.
    if not all(row.verdict == HOLDS for row in rep.rows):
        raise HypothesisViolation(
            "comparison preconditions not met:\n" + rep.format())
    overshoot = float(np.max(u.values - v.values))
    rep.add_inequality("u <= v on the ball", overshoot, ORDER_TOL * scale)
    rep.data["max_overshoot"] = overshoot
    rep.conclusion = ("comparison holds" if rep.holds
                      else "comparison could not be certified")
    return rep


def uniqueness_conditions(problem: LogisticProblem, mu: float, r_range,
                          *, n_samples: int = 40) -> CertificateReport:
    """Check the asymptotic conditions under which the positive solution
    is unique: the absorption may decay no faster than r^(-mu) with
    0 <= mu <= 2, the ratio a_-/b must stay bounded, and the volume may
    grow at most like exp(C r^(2-mu)) (polynomially when mu = 2).
    """
    if not (0.0 <= mu <= 2.0):
        raise HypothesisViolation(f"decay exponent out of range: mu={mu}")
    r_lo, r_hi = float(r_range[0]), float(r_range[1])
    if not (0.0 < r_lo < r_hi):
        raise HypothesisViolation("radius range must be positive and ordered")
    rep = CertificateReport("uniqueness conditions")
    rs = np.geomspace(r_lo, r_hi, n_samples)

    bvals = np.array([_coeff_at(problem.b, r) for r in rs], dtype=float)
    if np.min(bvals) <= 0.0:
        rep.add("absorption positive", FAILS, float(np.min(bvals)), 0.0)
        return rep
    floor = bvals * rs ** mu
    fit = power_fit(rs, bvals)
    rep.add("absorption floor b >= C r^(-mu)",
            HOLDS if fit.slope >= -mu - SLACK else FAILS,
            fit.slope, -mu, note=f"fitted decay exponent {fit.slope:.4f}")
    rep.data["b_floor_min"] = float(np.min(floor))

    avals = np.array([_coeff_at(problem.a, r) for r in rs], dtype=float)
    ratio = np.maximum(-avals, 0.0) / bvals
    if np.max(ratio) == 0.0:
        rep.add("a_-/b bounded", HOLDS, 0.0, note="a has no negative part")
    else:
        rfit = power_fit(rs, np.maximum(ratio, 1e-300))
        rep.add("a_-/b bounded", HOLDS if rfit.slope <= SLACK else FAILS,
                rfit.slope, 0.0,
                note=f"fitted growth exponent {rfit.slope:.4f}")
    rep.data["ratio_sup"] = float(np.max(ratio))

    vols = np.array([ball_volume(problem.manifold, r) for r in rs])
    target = 2.0 - mu
    if target == 0.0:
        # mu = 2 allows any polynomial volume growth, so the question
        # is only whether the volume is polynomial or exponential.
        best, _ = preferred_model(rs, vols)
        ok = best.model == "power"
        slope = best.slope
        note = (f"volume follows the {best.model} model "
                f"(rate {best.slope:.4f})")
    else:
        vfit = power_fit(rs, np.maximum(np.log(vols), 1e-300))
        ok = vfit.slope <= target + SLACK
        slope = vfit.slope
        note = f"log-volume power {vfit.slope:.4f} vs {target:.4f}"
    rep.add("volume growth subcritical", HOLDS if ok else FAILS,
            slope, target, note=note)
    rep.data["log_volume_power"] = float(slope)
    rep.conclusion = ("positive solution is unique under these conditions"
                      if rep.holds else "uniqueness not certified")
    return rep


def _coeff_at(coeff, r: float) -> float:
    if callable(coeff):
        return float(coeff(r))
    if isinstance(coeff, RadialField):
        return float(coeff(r))
    return float(coeff)
