"""Finite-difference machinery for radial problems.

Profiles live on one-dimensional grids over [r_start, R].  A ball grid has
r_start = 0; its first row discretizes the Laplacian at the pole through
the even-extension limit (for a C^2 even profile u'(0) = 0 and
Delta u(0) = (1 + kappa) u''(0) with kappa = lim r (m-1) g'/g, which is
m - 1 on smooth-pole models).  An annulus grid has r_start > 0 and carries
Dirichlet rows at both ends.

Operators are tridiagonal; interior rows use the standard second-order
three-point stencils on non-uniform spacing.  Systems are solved with a
banded LU factorization and the solution is accepted only if the discrete
residual is small relative to the data, which catches near-singular
assemblies that the factorization itself tolerates.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.linalg import solve_banded, LinAlgError

from .errors import DomainError, SingularSystemError
from .manifold import ModelManifold, warp_coefficient

__all__ = [
    "RadialGrid",
    "RadialField",
    "RadialOperator",
    "build_grid",
    "assemble",
    "solve_linear",
    "integrate_ball",
    "integrate_sphere",
    "residual",
]


@dataclass(frozen=True)
class RadialGrid:
    """Nodes r_0 < r_1 < ... < r_{N-1} spanning [r_start, R].

    Node 0 is the pole when r_start == 0, otherwise an inner Dirichlet
    node; the last node is always the outer Dirichlet node.
    """

    r: np.ndarray
    r_start: float
    R: float

    @property
    def size(self) -> int:
        return self.r.size

    @property
    def is_ball(self) -> bool:
        return self.r_start == 0.0

    @property
    def n_interior(self) -> int:
        return self.r.size - 2

    def spacings(self) -> np.ndarray:
        return np.diff(self.r)


def build_grid(R: float, n: int, grading: float = 1.0, r_start: float = 0.0) -> RadialGrid:
    """Grid with n interior nodes on [r_start, R].

    grading > 1 grows the spacing geometrically away from r_start, packing
    nodes where radial profiles vary fastest (near the pole for balls).
    """
    if not (R > r_start >= 0):
        raise DomainError(f"need R > r_start >= 0, got R={R}, r_start={r_start}")
    if not (isinstance(n, (int, np.integer)) and n >= 2):
        raise DomainError(f"need at least 2 interior nodes, got {n!r}")
    if grading <= 0:
        raise DomainError(f"grading ratio must be positive, got {grading}")
    length = R - r_start
    if grading == 1.0:
        r = np.linspace(r_start, R, n + 2)
    else:
        steps = grading ** np.arange(n + 1, dtype=float)
        h = length * steps / steps.sum()
        r = r_start + np.concatenate([[0.0], np.cumsum(h)])
        r[-1] = R
    return RadialGrid(r, float(r_start), float(R))


def layered_ball_grid(R: float, n: int, h_min: float) -> RadialGrid:
    """Uniform ball grid whose last cell is refined toward the boundary.

    The first n+1 nodes are the plain uniform lattice j*R/(n+1); the
    final cell [R-h, R] is then subdivided by repeated halving until the
    spacing next to the boundary is at most h_min.  Dirichlet data with
    a thin absorption layer (boundary blow-up in particular) need the
    refinement, while everything measured on the interior keeps living
    on the unchanged uniform lattice.
    """
    if not R > 0:
        raise DomainError(f"need R > 0, got {R}")
    if not (isinstance(n, (int, np.integer)) and n >= 2):
        raise DomainError(f"need at least 2 interior nodes, got {n!r}")
    h = R / (n + 1)
    if not h_min > 0:
        raise DomainError(f"need a positive layer resolution, got {h_min}")
    uniform = np.linspace(0.0, R, n + 2)
    if h_min >= h / 2:
        return RadialGrid(uniform, 0.0, float(R))
    gaps = []
    gap = h / 2.0
    # Keep the geometry representable: spacings below ~R*1e-13 collapse
    # into the boundary node in double precision.
    floor = max(h_min, 1e-13 * R)
    while gap > floor:
        gaps.append(gap)
        gap /= 2.0
    tail = R - np.array(gaps)
    r = np.concatenate([uniform[:-1], tail, [R]])
    return RadialGrid(r, 0.0, float(R))


@dataclass
class RadialField:
    """Sampled radial profile: one value per grid node, endpoints included."""

    grid: RadialGrid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != self.grid.r.shape:
            raise DomainError("field values must match the grid nodes")

    @classmethod
    def from_callable(cls, grid: RadialGrid, f: Callable) -> "RadialField":
        return cls(grid, np.asarray(f(grid.r), dtype=float))

    @classmethod
    def constant(cls, grid: RadialGrid, value: float) -> "RadialField":
        return cls(grid, np.full(grid.size, float(value)))

    def __call__(self, r):
        """Linear interpolation inside the grid range."""
        r_arr = np.asarray(r, dtype=float)
        if np.any(r_arr < self.grid.r_start - 1e-12) or np.any(r_arr > self.grid.R + 1e-12):
            raise DomainError("evaluation outside the field's grid range")
        out = np.interp(r_arr, self.grid.r, self.values)
        return float(out) if np.ndim(r) == 0 else out

    def derivative(self) -> "RadialField":
        """Second-order finite-difference derivative on the same grid."""
        r, u = self.grid.r, self.values
        d = np.empty_like(u)
        h = np.diff(r)
        hl, hr = h[:-1], h[1:]
        d[1:-1] = (-hr / (hl * (hl + hr)) * u[:-2]
                   + (hr - hl) / (hl * hr) * u[1:-1]
                   + hl / (hr * (hl + hr)) * u[2:])
        h0, h1 = h[0], h[1]
        d[0] = (-(2 * h0 + h1) / (h0 * (h0 + h1)) * u[0]
                + (h0 + h1) / (h0 * h1) * u[1]
                - h0 / (h1 * (h0 + h1)) * u[2])
        hm, hn = h[-2], h[-1]
        d[-1] = ((hn) / (hm * (hm + hn)) * u[-3]
                 - (hm + hn) / (hm * hn) * u[-2]
                 + (2 * hn + hm) / (hn * (hm + hn)) * u[-1])
        return RadialField(self.grid, d)

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("r,value\n")
            for r, v in zip(self.grid.r, self.values):
                fh.write(f"{r:.17g},{v:.17g}\n")


@dataclass
class RadialOperator:
    """Tridiagonal discretization of Delta + c on a grid.

    Dirichlet rows are identity rows; `dirichlet` marks them.  `apply`
    evaluates the differential rows only (identity rows pass the value
    through), so residuals of boundary-value problems can be formed
    directly.
    """

    grid: RadialGrid
    lower: np.ndarray   # sub-diagonal, entry i couples row i to node i-1
    diag: np.ndarray
    upper: np.ndarray   # super-diagonal, entry i couples row i to node i+1
    dirichlet: np.ndarray

    def apply(self, values: np.ndarray) -> np.ndarray:
        u = np.asarray(values, dtype=float)
        out = self.diag * u
        out[1:] += self.lower[1:] * u[:-1]
        out[:-1] += self.upper[:-1] * u[1:]
        return out

    def negated(self) -> "RadialOperator":
        """Operator for -(Delta + c); Dirichlet rows stay identity rows."""
        keep = ~self.dirichlet
        lo, di, up = self.lower.copy(), self.diag.copy(), self.upper.copy()
        lo[keep] = -lo[keep]
        di[keep] = -di[keep]
        up[keep] = -up[keep]
        return RadialOperator(self.grid, lo, di, up, self.dirichlet.copy())

    def interior_parts(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """Diagonals of the non-Dirichlet block (homogeneous boundary).

        Returns (lower, diag, upper, node_indices); the couplings into
        Dirichlet nodes are dropped, which is the zero-boundary reduction
        used by the eigenvalue solvers.
        """
        idx = np.nonzero(~self.dirichlet)[0]
        lo = self.lower[idx].copy()
        di = self.diag[idx].copy()
        up = self.upper[idx].copy()
        lo[0] = 0.0
        up[-1] = 0.0
        return lo, di, up, idx


def _stencil_rows(grid: RadialGrid, w: np.ndarray):
    """Interior-row coefficients for u'' + w(r) u' on non-uniform nodes."""
    r = grid.r
    h = np.diff(r)
    hl, hr = h[:-1], h[1:]
    lo = 2.0 / (hl * (hl + hr)) - w * hr / (hl * (hl + hr))
    di = -2.0 / (hl * hr) + w * (hr - hl) / (hl * hr)
    up = 2.0 / (hr * (hl + hr)) + w * hl / (hr * (hl + hr))
    return lo, di, up


def assemble(M: ModelManifold, grid: RadialGrid, c=0.0) -> RadialOperator:
    """Discretize Delta + c(r) on the grid.

    c may be a scalar, an array of node values, a callable of r, or a
    RadialField on the same grid.
    """
    N = grid.size
    if isinstance(c, RadialField):
        cv = c.values
    elif callable(c):
        cv = np.asarray(c(grid.r), dtype=float)
    else:
        cv = np.broadcast_to(np.asarray(c, dtype=float), (N,)).astype(float)
    if cv.shape != (N,):
        raise DomainError("potential must broadcast to one value per node")

    lower = np.zeros(N)
    diag = np.zeros(N)
    upper = np.zeros(N)
    dirichlet = np.zeros(N, dtype=bool)
    dirichlet[-1] = True

    w = warp_coefficient(M, grid.r[1:-1])
    lo, di, up = _stencil_rows(grid, w)
    lower[1:-1] = lo
    diag[1:-1] = di + cv[1:-1]
    upper[1:-1] = up

    if grid.is_ball:
        # pole row: Delta u(0) = (1 + kappa) * 2 (u_1 - u_0) / r_1^2
        kappa = M.pole_coefficient
        h0 = grid.r[1]
        diag[0] = -2.0 * (1.0 + kappa) / h0**2 + cv[0]
        upper[0] = 2.0 * (1.0 + kappa) / h0**2
    else:
        dirichlet[0] = True
        diag[0] = 1.0

    diag[-1] = 1.0
    return RadialOperator(grid, lower, diag, upper, dirichlet)


def _banded(op: RadialOperator) -> np.ndarray:
    N = op.grid.size
    ab = np.zeros((3, N))
    ab[0, 1:] = op.upper[:-1]
    ab[1, :] = op.diag
    ab[2, :-1] = op.lower[1:]
    return ab


def solve_linear(op: RadialOperator, rhs, boundary) -> RadialField:
    """Solve op u = rhs with the given Dirichlet data.

    boundary is a single value for ball grids, or an (inner, outer) pair
    for annulus grids.  The solution is verified a posteriori: the relative
    residual of the discrete system must be at most 1e-12, otherwise the
    assembly is declared singular.
    """
    grid = op.grid
    if isinstance(rhs, RadialField):
        b = rhs.values.copy()
    elif callable(rhs):
        b = np.asarray(rhs(grid.r), dtype=float)
    else:
        b = np.broadcast_to(np.asarray(rhs, dtype=float), (grid.size,)).astype(float).copy()

    if grid.is_ball:
        if np.ndim(boundary) != 0:
            raise DomainError("ball problems take a single outer boundary value")
        b[-1] = float(boundary)
    else:
        try:
            inner, outer = boundary
        except TypeError as exc:
            raise DomainError("annulus problems take an (inner, outer) boundary pair") from exc
        b[0] = float(inner)
        b[-1] = float(outer)

    try:
        u = solve_banded((1, 1), _banded(op), b)
    except LinAlgError as exc:
        raise SingularSystemError(f"singular radial system: {exc}") from exc
    if not np.all(np.isfinite(u)):
        raise SingularSystemError("radial solve produced non-finite values")
    res = op.apply(u) - b
    res[op.dirichlet] = u[op.dirichlet] - b[op.dirichlet]
    scale = float(np.max(np.abs(b))) + float(np.max(np.abs(op.diag) * np.max(np.abs(u)))) + 1e-300
    rel = float(np.max(np.abs(res))) / scale
    if rel > 1e-12:
        raise SingularSystemError(f"radial solve residual {rel:.2e} exceeds 1e-12 of the data")
    return RadialField(grid, u)


def volume_weights(M: ModelManifold, grid: RadialGrid) -> np.ndarray:
    """Trapezoid quadrature weights of int f dV restricted to radial f."""
    r = grid.r
    cell = np.empty_like(r)
    cell[1:-1] = 0.5 * (r[2:] - r[:-2])
    cell[0] = 0.5 * (r[1] - r[0])
    cell[-1] = 0.5 * (r[-1] - r[-2])
    gv = np.asarray(M.g(r), dtype=float)
    if grid.is_ball:
        gv[0] = 0.0
    return M.sphere_constant * gv ** (M.m - 1) * cell


def integrate_ball(M: ModelManifold, field: RadialField, weight_exponent: float = 1.0,
                   R: float | None = None) -> float:
    """Trapezoid approximation of int_{B_R} field^p dV on the field's grid.

    R defaults to the full grid; a smaller R clips the grid and adds the
    fractional last cell by linear interpolation.  Fractional powers of
    negative field values are a domain error.
    """
    grid = field.grid
    if R is None:
        R = grid.R
    if not (grid.r_start <= R <= grid.R + 1e-12):
        raise DomainError("integration radius outside the field's grid")
    r = grid.r
    vals = field.values
    p = float(weight_exponent)
    if p != int(p) and np.any(vals < 0):
        raise DomainError("fractional power of a negative field")
    mask = r <= R + 1e-15
    rs = r[mask]
    vs = vals[mask]
    if rs[-1] < R - 1e-15:
        rs = np.append(rs, R)
        vs = np.append(vs, field(R))
    gv = np.asarray(M.g(rs), dtype=float)
    if grid.is_ball:
        gv[0] = 0.0
    integrand = M.sphere_constant * (vs ** p if p != 1.0 else vs) * gv ** (M.m - 1)
    return float(np.trapezoid(integrand, rs))


def integrate_sphere(M: ModelManifold, field: RadialField, weight_exponent: float = 1.0,
                     r: float | None = None) -> float:
    """int_{boundary of B_r} field^p = area element times the field value."""
    if r is None:
        raise DomainError("integrate_sphere needs an explicit radius")
    if not (field.grid.r_start <= r <= field.grid.R + 1e-12):
        raise DomainError("sphere radius outside the field's grid")
    v = field(r)
    p = float(weight_exponent)
    if p != int(p) and v < 0:
        raise DomainError("fractional power of a negative field value")
    gv = float(np.asarray(M.g(r), dtype=float))
    return M.sphere_constant * gv ** (M.m - 1) * v ** p


def residual(M: ModelManifold, a, b, sigma: float, u: RadialField) -> float:
    """Max norm of Delta u + a u - b u^sigma over the non-Dirichlet nodes."""
    op = assemble(M, u.grid, 0.0)
    av = _sample(a, u.grid)
    bv = _sample(b, u.grid)
    uv = u.values
    depth = -float(np.min(uv, initial=0.0))
    if depth > 1e-9 * max(1.0, float(np.max(np.abs(uv)))) \
            and float(sigma) != int(sigma):
        raise DomainError("fractional power of a negative profile")
    res = op.apply(uv) + av * uv - bv * np.sign(uv) * np.abs(uv) ** sigma
    return float(np.max(np.abs(res[~op.dirichlet])))


def _sample(coeff, grid: RadialGrid) -> np.ndarray:
    if isinstance(coeff, RadialField):
        return coeff(grid.r)
    if callable(coeff):
        return np.broadcast_to(np.asarray(coeff(grid.r), dtype=float), grid.r.shape).astype(float)
    return np.broadcast_to(np.asarray(coeff, dtype=float), grid.r.shape).astype(float)
