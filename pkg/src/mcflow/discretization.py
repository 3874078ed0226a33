"""Uniform-grid spatial discretization with mass-lumped linear elements.

A :class:`GridSpec` is a square-celled box with n cells per direction and
(n+1)^2 nodes; a :class:`Field` holds nodal values on such a grid.  The
discrete Laplacian is the five-point stencil closed with mirrored ghost
nodes, which realizes the homogeneous Neumann condition.  With the
trapezoidal (lumped) node weights the stencil is exactly -M^{-1}A for the
piecewise-linear stiffness matrix A, so it annihilates constants, is
self-adjoint in the lumped inner product and negative semidefinite; the
tests assert all three.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .backend import active
from .errors import ConvergenceError, GridMismatchError, _IndefiniteOperator


@dataclass(frozen=True)
class GridSpec:
    """Uniform grid over a box with square cells.

    n is the number of cells per direction; nodes are the (n+1)^2 cell
    corners and h = (x_max - x_min) / n.
    """

    x_min: float
    x_max: float
    y_min: float
    y_max: float
    n: int

    def __post_init__(self):
        if self.n < 2:
            raise ValueError(f"grid needs at least 2 cells per direction, got n={self.n}")
        wx = self.x_max - self.x_min
        wy = self.y_max - self.y_min
        if wx <= 0.0 or wy <= 0.0:
            raise ValueError("grid box has non-positive extent")
        if abs(wx - wy) > 1e-12 * max(wx, wy):
            raise ValueError("cells must be square: box extents differ")

    @classmethod
    def unit_box(cls, n: int) -> "GridSpec":
        """The benchmark domain [-0.5, 0.5]^2 with n cells per direction."""
        return cls(-0.5, 0.5, -0.5, 0.5, n)

    @classmethod
    def for_spacing(cls, h: float, box=(-0.5, 0.5, -0.5, 0.5)) -> "GridSpec":
        """Grid whose spacing is as close as possible to h (n = round(L/h))."""
        n = max(2, round((box[1] - box[0]) / h))
        return cls(box[0], box[1], box[2], box[3], n)

    @property
    def h(self) -> float:
        return (self.x_max - self.x_min) / self.n

    @property
    def npts(self) -> int:
        return self.n + 1

    @cached_property
    def xs(self) -> np.ndarray:
        v = np.linspace(self.x_min, self.x_max, self.npts)
        v.setflags(write=False)
        return v

    @cached_property
    def ys(self) -> np.ndarray:
        v = np.linspace(self.y_min, self.y_max, self.npts)
        v.setflags(write=False)
        return v

    @cached_property
    def lumped_weights(self) -> np.ndarray:
        """Trapezoidal node weights times h^2: corner h^2/4, edge h^2/2, interior h^2."""
        w1 = np.ones(self.npts)
        w1[0] = w1[-1] = 0.5
        w = np.outer(w1, w1) * self.h ** 2
        w.setflags(write=False)
        return w

    def coords(self):
        """Nodal coordinate arrays (X, Y), each of shape (n+1, n+1)."""
        return np.meshgrid(self.xs, self.ys, indexing="ij")

    def same_box(self, other: "GridSpec", tol: float = 1e-12) -> bool:
        return (abs(self.x_min - other.x_min) <= tol and abs(self.x_max - other.x_max) <= tol
                and abs(self.y_min - other.y_min) <= tol and abs(self.y_max - other.y_max) <= tol)


class Field:
    """Nodal scalar values on a :class:`GridSpec`; finite and read-only."""

    __slots__ = ("grid", "values")

    def __init__(self, grid: GridSpec, values):
        arr = np.array(values, dtype=np.float64, order="C", copy=True)
        if arr.size != grid.npts ** 2:
            raise ValueError(
                f"field needs {grid.npts ** 2} values for n={grid.n}, got {arr.size}")
        arr = arr.reshape(grid.npts, grid.npts)
        _check_finite(arr)
        arr.setflags(write=False)
        self.grid = grid
        self.values = arr

    @classmethod
    def _wrap(cls, grid: GridSpec, arr: np.ndarray) -> "Field":
        """Adopt a freshly computed array without copying (internal)."""
        _check_finite(arr)
        arr.setflags(write=False)
        f = cls.__new__(cls)
        f.grid = grid
        f.values = arr
        return f

    @classmethod
    def constant(cls, grid: GridSpec, value: float) -> "Field":
        return cls._wrap(grid, np.full((grid.npts, grid.npts), float(value)))

    def __repr__(self):
        v = self.values
        return (f"Field(n={self.grid.n}, min={v.min():.4g}, max={v.max():.4g})")


def _check_finite(arr):
    if not np.isfinite(arr).all():
        raise ValueError("field values must be finite (found NaN or Inf)")


def _same_grid(f: Field, g: Field, what: str = "fields"):
    if f.grid != g.grid:
        raise GridMismatchError(f"{what} live on different grids: {f.grid} vs {g.grid}")


@dataclass(frozen=True)
class LinearSolveReport:
    iterations: int
    final_residual: float


def apply_neumann_laplacian(f: Field) -> Field:
    """Discrete Laplacian of f (five-point stencil, mirrored ghost nodes)."""
    out = np.empty_like(f.values)
    active().laplacian(f.values, 1.0 / f.grid.h ** 2, out)
    return Field._wrap(f.grid, out)


def lumped_inner_product(f: Field, g: Field) -> float:
    """Mass-lumped L2 inner product (trapezoidal node weights)."""
    _same_grid(f, g)
    return active().weighted_dot(f.grid.lumped_weights, f.values, g.values)


def lumped_norm(f: Field) -> float:
    return np.sqrt(max(lumped_inner_product(f, f), 0.0))


def dirichlet_energy(f: Field) -> float:
    """Integral of |grad f|^2 / 2 over the box (exact for linear elements)."""
    return active().dirichlet(f.values)


# -- conjugate gradients ------------------------------------------------------
#
# CG runs in the lumped inner product: the operators below are self-adjoint
# with respect to it, so the usual recurrences apply unchanged.  The
# preconditioner is the inverse of the operator's nodal diagonal.

CG_DEFAULT_TOL = 1e-10


def _pcg(apply_op, b, w, inv_diag, tol_abs, max_iter, x0=None, strict=True):
    """Preconditioned CG on apply_op(x) = b in the w-weighted inner product.

    Returns (x, iterations, residual_norm).  Raises _IndefiniteOperator on a
    non-positive-curvature direction.  If the iteration cap is hit: raises
    ConvergenceError when strict, else returns the current iterate.
    """
    K = active()
    scratch = np.empty_like(b)
    if x0 is None:
        x = np.zeros_like(b)
        r = b.copy()
    else:
        x = x0.copy()
        apply_op(x, scratch)
        r = b - scratch
    res = np.sqrt(max(K.weighted_dot(w, r, r), 0.0))
    if res <= tol_abs:
        return x, 0, res
    z = r * inv_diag if inv_diag is not None else r.copy()
    p = z.copy()
    rz = K.weighted_dot(w, r, z)
    for it in range(1, max_iter + 1):
        apply_op(p, scratch)
        pap = K.weighted_dot(w, p, scratch)
        if pap <= 0.0:
            raise _IndefiniteOperator(iterate=x, iterations=it)
        alpha = rz / pap
        x += alpha * p
        r -= alpha * scratch
        res = np.sqrt(max(K.weighted_dot(w, r, r), 0.0))
        if res <= tol_abs:
            return x, it, res
        if inv_diag is not None:
            np.multiply(r, inv_diag, z)
        else:
            np.copyto(z, r)
        rz_new = K.weighted_dot(w, r, z)
        p *= rz_new / rz
        p += z
        rz = rz_new
    if strict:
        raise ConvergenceError(
            f"CG did not converge in {max_iter} iterations (residual {res:.3e})",
            report=LinearSolveReport(max_iter, res))
    return x, max_iter, res


def solve_screened_poisson(alpha: float, beta: float, rhs: Field,
                           tol: float = CG_DEFAULT_TOL,
                           max_iter: int | None = None):
    """Solve (alpha*I - beta*Laplacian) u = rhs with diagonal-preconditioned CG.

    The system is symmetric positive definite in the lumped inner product
    for alpha > 0, beta >= 0.  The returned field satisfies
    ||rhs - op(u)|| <= tol * ||rhs|| in the lumped norm.
    """
    if alpha <= 0.0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    if beta < 0.0:
        raise ValueError(f"beta must be nonnegative, got {beta}")
    if tol <= 0.0:
        raise ValueError(f"tol must be positive, got {tol}")
    grid = rhs.grid
    K = active()
    inv_h2 = 1.0 / grid.h ** 2
    w = grid.lumped_weights
    if max_iter is None:
        max_iter = 10 * grid.npts

    def apply_op(x, out):
        K.helmholtz(x, alpha, beta, None, inv_h2, out)

    rhs_norm = lumped_norm(rhs)
    tol_abs = tol * rhs_norm
    # The stencil diagonal is alpha + 4*beta/h^2 at every node.
    inv_diag = None
    scale = alpha + 4.0 * beta * inv_h2
    if scale > 0.0:
        inv_diag = np.full_like(rhs.values, 1.0 / scale)
    x, its, res = _pcg(apply_op, rhs.values, w, inv_diag, tol_abs, max_iter)
    return Field._wrap(grid, x), LinearSolveReport(its, res)


# -- inter-grid transfer ------------------------------------------------------

def _transfer_maps(fine_n: int, coarse_n: int):
    """Index/weight maps from a coarse line to a fine line of the same box.

    Positions are handled in exact integer arithmetic so fine nodes that
    coincide with coarse nodes get weight exactly 0 or 1.
    """
    idx = np.arange(fine_n + 1) * coarse_n
    i0 = np.minimum(idx // fine_n, coarse_n - 1)
    frac = (idx - i0 * fine_n) / fine_n
    return i0.astype(np.intp), frac


def prolongate(coarse: Field, fine_grid: GridSpec) -> Field:
    """Bilinear interpolation of a coarse field onto a finer grid (same box)."""
    cg = coarse.grid
    if not cg.same_box(fine_grid):
        raise GridMismatchError("prolongation requires grids over the same box")
    i0, fx = _transfer_maps(fine_grid.n, cg.n)
    j0, fy = _transfer_maps(fine_grid.n, cg.n)
    c = coarse.values
    fx = fx[:, None]
    fy = fy[None, :]
    v00 = c[np.ix_(i0, j0)]
    v10 = c[np.ix_(i0 + 1, j0)]
    v01 = c[np.ix_(i0, j0 + 1)]
    v11 = c[np.ix_(i0 + 1, j0 + 1)]
    out = ((1.0 - fx) * (1.0 - fy) * v00 + fx * (1.0 - fy) * v10
           + (1.0 - fx) * fy * v01 + fx * fy * v11)
    return Field._wrap(fine_grid, np.ascontiguousarray(out))


def restrict(fine: Field, coarse_grid: GridSpec) -> Field:
    """Pointwise injection onto a coarser grid (nearest node if not nested)."""
    fg = fine.grid
    if not fg.same_box(coarse_grid):
        raise GridMismatchError("restriction requires grids over the same box")
    if fg.n % coarse_grid.n == 0:
        stride = fg.n // coarse_grid.n
        out = fine.values[::stride, ::stride].copy()
    else:
        idx = np.rint(np.arange(coarse_grid.n + 1) * (fg.n / coarse_grid.n)).astype(np.intp)
        out = fine.values[np.ix_(idx, idx)].copy()
    return Field._wrap(coarse_grid, np.ascontiguousarray(out))
