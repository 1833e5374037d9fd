"""Green kernel, radial Poisson solver, and the exponential substitution.

Oracles used here:
  * euclidean m=3 kernel: the Newtonian potential 1/(4 pi r);
  * hyperbolic plane (m=2, B=1) kernel: closed-form antiderivative of
    1/sinh, t(r) = -log tanh(r/2);
  * a C^1 bump source on euclid m=3 whose potential has a closed form;
  * the shell identity: outside a compactly supported source the
    potential is -(mass) * G(r).
"""

import numpy as np
import pytest

from logman.errors import DomainError, HypothesisViolation, ParabolicManifold
from logman.green import (
    GreenKernel,
    build_kernel,
    green_radial,
    log_substitution,
    poisson_solve,
)
from logman.manifold import ModelManifold
from logman.radial import RadialField, build_grid

E3 = ModelManifold.euclidean(3)
H2 = ModelManifold.hyperbolic(2, 1.0)
H3 = ModelManifold.hyperbolic(3, 1.0)


def bump_problem(n=4000, radius=4.0):
    """C^1 source (1-r^2)^2 on the unit ball, euclid m=3.

    Closed form: P(r) = r^3/3 - 2r^5/5 + r^7/7, Q(r) = (1-r^2)^3/6
    inside the support, so v = -(P/r + Q) exactly.
    """
    grid = build_grid(radius, n)
    r = grid.r
    rho = np.where(r <= 1.0, (1.0 - r ** 2) ** 2, 0.0)
    P = np.where(r <= 1.0, r ** 3 / 3 - 2 * r ** 5 / 5 + r ** 7 / 7,
                 1 / 3 - 2 / 5 + 1 / 7)
    Q = np.where(r <= 1.0, (1.0 - r ** 2) ** 3 / 6.0, 0.0)
    with np.errstate(divide="ignore"):
        v = -(np.where(r > 0, 1.0 / np.maximum(r, 1e-300), 0.0) * P + Q)
    v[0] = -Q[0]
    return grid, RadialField(grid, rho), v, 4 * np.pi * float(P[-1])


# ---------------------------------------------------------------------------
# kernel values


def test_kernel_euclidean_is_newtonian():
    for r in (0.5, 1.0, 2.0, 3.0):
        assert green_radial(E3, r) == pytest.approx(1.0 / (4 * np.pi * r),
                                                    abs=1e-10)


def test_kernel_hyperbolic_plane_closed_form():
    # antiderivative of 1/sinh is log tanh(s/2)
    expected = -np.log(np.tanh(0.5)) / (2 * np.pi)
    assert expected == pytest.approx(0.12285756271158171, abs=1e-15)
    assert green_radial(H2, 1.0) == pytest.approx(expected, abs=1e-10)


def test_kernel_vanishes_at_infinity():
    vals = [green_radial(E3, r) for r in (1.0, 10.0, 100.0, 1e4)]
    assert all(a > b for a, b in zip(vals, vals[1:]))
    assert vals[-1] < 1e-4


def test_kernel_rejects_parabolic_models():
    E2 = ModelManifold.euclidean(2)
    with pytest.raises(ParabolicManifold):
        green_radial(E2, 1.0)


def test_kernel_grid_cache_matches_pointwise():
    grid = build_grid(3.0, 300)
    kern = build_kernel(H3, grid)
    for i in (1, 50, 150, 299):
        r = grid.r[i]
        assert kern.green(r) == pytest.approx(green_radial(H3, r),
                                              rel=1e-10)
    assert np.isinf(kern.tail_values[0])


# ---------------------------------------------------------------------------
# Poisson solve


def test_poisson_bump_matches_closed_form():
    grid, rho, v_exact, mass_exact = bump_problem()
    res = poisson_solve(E3, rho)
    assert np.max(np.abs(res.potential.values - v_exact)) <= 5e-7
    assert abs(res.mass - mass_exact) <= 3e-6
    assert res.rough_nodes == 0
    # pointwise identity at the operator's truncation floor for this mesh
    assert res.residual <= 2e-6


def test_poisson_shell_far_field():
    grid, rho, _, mass_exact = bump_problem()
    res = poisson_solve(E3, rho)
    outside = grid.r >= 1.5
    v = res.potential.values[outside]
    r = grid.r[outside]
    # with the solver's own mass the monopole identity is algebraic
    assert np.max(np.abs(v + res.mass / (4 * np.pi * r))) <= 1e-8
    # against the closed-form mass of the source
    assert np.max(np.abs(v + mass_exact / (4 * np.pi * r))) <= 1e-6


def test_poisson_zero_source_gives_zero():
    grid = build_grid(2.0, 200)
    res = poisson_solve(E3, RadialField(grid, np.zeros(grid.r.size)))
    assert np.all(res.potential.values == 0.0)
    assert res.mass == 0.0


def test_poisson_hyperbolic_indicator():
    grid = build_grid(4.0, 4000)
    rho = RadialField(grid, np.where(grid.r <= 1.0, 1.0, 0.0))
    res = poisson_solve(H3, rho)
    assert np.all(res.potential.values <= 0.0)
    assert res.residual <= 1e-6
    # the two nodes astride the jump are reported, not silently dropped
    assert res.rough_nodes == 2
    assert res.report.holds


def test_poisson_source_must_be_nonnegative():
    grid = build_grid(2.0, 100)
    with pytest.raises(HypothesisViolation):
        poisson_solve(E3, RadialField(grid, -np.ones(grid.r.size)))


def test_poisson_needs_ball_grid():
    grid = build_grid(3.0, 100, r_start=1.0)
    with pytest.raises(HypothesisViolation):
        poisson_solve(E3, RadialField(grid, np.ones(grid.r.size)))


def test_poisson_rejects_nonintegrable_source():
    grid = build_grid(4.0, 500)
    with pytest.raises(DomainError):
        poisson_solve(E3, RadialField(grid, 1.0 / (1.0 + grid.r)))


def test_poisson_reports_truncated_tail():
    grid = build_grid(4.0, 2000)
    res = poisson_solve(E3, RadialField(grid, np.exp(-2.0 * grid.r)))
    assert 1e-3 < res.truncated_fraction < 0.1
    # e^{-2r} has a conical kink at the pole; the report says so
    assert "conical kink" in res.report.format()


def test_poisson_is_linear_and_monotone():
    grid = build_grid(4.0, 1000)
    r = grid.r
    rho1 = np.abs(np.sin(3 * r)) * np.exp(-r)
    rho2 = rho1 + 0.3 * np.exp(-2 * r)
    v1 = poisson_solve(E3, RadialField(grid, rho1)).potential.values
    v2 = poisson_solve(E3, RadialField(grid, rho2)).potential.values
    v12 = poisson_solve(E3, RadialField(grid, rho1 + rho2)).potential.values
    scale = np.max(np.abs(v12))
    assert np.max(np.abs(v12 - (v1 + v2))) <= 1e-13 * max(scale, 1.0)
    # a larger source digs a deeper well, pointwise
    assert np.min(v1 - v2) >= 0.0


# ---------------------------------------------------------------------------
# exponential substitution


def test_substitution_of_zero_is_one():
    grid = build_grid(2.0, 200)
    sub = log_substitution(E3, RadialField(grid, np.zeros(grid.r.size)),
                           np.zeros(grid.r.size))
    assert np.all(sub.phi.values == 1.0)
    assert sub.residual <= 1e-10


def test_substitution_after_poisson_solve():
    grid = build_grid(4.0, 4000)
    rho = np.where(grid.r <= 1.0, 1.0, 0.0)
    res = poisson_solve(H3, RadialField(grid, rho))
    sub = log_substitution(H3, res.potential, rho)
    assert sub.residual <= 1e-6
    assert np.min(sub.phi.values) >= 1.0
    assert not sub.clamped
    assert sub.report.holds


def test_substitution_tends_to_one_far_from_the_source():
    grid, rho, _, _ = bump_problem(n=2000, radius=40.0)
    res = poisson_solve(E3, rho)
    sub = log_substitution(E3, res.potential, rho.values)
    assert sub.phi.values[-1] == pytest.approx(1.0, abs=1e-2)
    assert float(np.max(sub.phi.values)) < np.e  # bounded well


def test_substitution_clamps_overflowing_potentials():
    grid = build_grid(2.0, 100)
    v = RadialField(grid, -800.0 * np.ones(grid.r.size))
    with pytest.warns(RuntimeWarning):
        sub = log_substitution(E3, v, np.zeros(grid.r.size))
    assert sub.clamped
    assert np.isfinite(sub.phi.values).all()
