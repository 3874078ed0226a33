"""Pure-numpy implementations of the hot grid kernels.

The compiled extension ``mcflow._core`` exposes the same functions with the
same signatures; this module is the import-time fallback and the correctness
baseline the extension is benchmarked against.  All arrays are C-contiguous
float64 of shape (m, m) with axis 0 = x and axis 1 = y.  Boundary closure is
everywhere the mirrored ghost node (homogeneous Neumann).
"""

import numpy as np

name = "numpy"


def laplacian(u, inv_h2, out):
    """out = five-point discrete Laplacian of u with mirrored ghosts."""
    np.multiply(u, -4.0, out)
    out[:-1, :] += u[1:, :]
    out[-1, :] += u[-2, :]
    out[1:, :] += u[:-1, :]
    out[0, :] += u[1, :]
    out[:, :-1] += u[:, 1:]
    out[:, -1] += u[:, -2]
    out[:, 1:] += u[:, :-1]
    out[:, 0] += u[:, 1]
    out *= inv_h2
    return out


def helmholtz(u, alpha, beta, diag, inv_h2, out):
    """out = (alpha + diag)*u - beta*laplacian(u); diag may be None."""
    laplacian(u, inv_h2, out)
    out *= -beta
    out += alpha * u
    if diag is not None:
        out += diag * u
    return out


def step_gradient(u, u_prev, inv_k, lap_coef, well_coef, inv_h2, out):
    """out = (u - u_prev)*inv_k - lap_coef*laplacian(u) + well_coef*(u^3 - u)."""
    laplacian(u, inv_h2, out)
    out *= -lap_coef
    out += inv_k * (u - u_prev)
    out += well_coef * (u * u * u - u)
    return out


def cubic(u, out):
    """out = u^3 - u (derivative of the double-well potential)."""
    np.multiply(u, u, out)
    out *= u
    out -= u
    return out


def weighted_dot(w, a, b):
    """sum(w * a * b)."""
    return float(np.sum(w * a * b))


def weighted_sqdiff(w, a, b):
    """sum(w * (a - b)^2)."""
    d = a - b
    return float(np.sum(w * d * d))


def weighted_well(w, u):
    """sum(w * F(u)) with F(u) = (u^2 - 1)^2 / 4."""
    q = u * u - 1.0
    return float(0.25 * np.sum(w * q * q))


def dirichlet(u):
    """Gradient energy: piecewise-linear elements on the two-triangle split.

    Equals sum over cell edges of the squared difference, interior edges
    counted twice, all divided by four; the spacing cancels in 2-D.
    """
    dx = np.diff(u, axis=0)
    dy = np.diff(u, axis=1)
    sx = np.sum(dx * dx, axis=0)
    sy = np.sum(dy * dy, axis=1)
    ex = 2.0 * np.sum(sx[1:-1]) + sx[0] + sx[-1]
    ey = 2.0 * np.sum(sy[1:-1]) + sy[0] + sy[-1]
    return float(0.25 * (ex + ey))


def curvature_step(w, dt, inv_h, inv_h2, reg, out):
    """One explicit curvature-motion update of the level-set field.

    out = w + dt * (lap(w) - (D2w grad_w . grad_w) / (|grad_w|^2 + reg))
    with central differences and mirrored ghosts.
    """
    p = np.pad(w, 1, mode="reflect")
    c = p[1:-1, 1:-1]
    xp = p[2:, 1:-1]
    xm = p[:-2, 1:-1]
    yp = p[1:-1, 2:]
    ym = p[1:-1, :-2]
    gx = (0.5 * inv_h) * (xp - xm)
    gy = (0.5 * inv_h) * (yp - ym)
    wxx = inv_h2 * (xp - 2.0 * c + xm)
    wyy = inv_h2 * (yp - 2.0 * c + ym)
    wxy = (0.25 * inv_h2) * (p[2:, 2:] - p[2:, :-2] - p[:-2, 2:] + p[:-2, :-2])
    gx2 = gx * gx
    gy2 = gy * gy
    curv = (wxx * gx2 + 2.0 * wxy * gx * gy + wyy * gy2) / (gx2 + gy2 + reg)
    out[...] = c + dt * (wxx + wyy - curv)
    return out
