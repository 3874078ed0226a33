# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled single-pass versions of the grid kernels.

Signatures mirror mcflow._ref exactly; see that module for the contracts.
The loops fuse the stencil, the nodal terms and the reductions so each
kernel makes one pass over memory.
"""

import numpy as np

name = "cython"


cdef inline Py_ssize_t _mirror_lo(Py_ssize_t i) nogil:
    return 1 if i == 0 else i - 1


def laplacian(const double[:, ::1] u, double inv_h2, double[:, ::1] out):
    cdef Py_ssize_t m = u.shape[0], n = u.shape[1], i, j, im, ip, jm, jp
    with nogil:
        for i in range(m):
            im = _mirror_lo(i)
            ip = m - 2 if i == m - 1 else i + 1
            for j in range(n):
                jm = _mirror_lo(j)
                jp = n - 2 if j == n - 1 else j + 1
                out[i, j] = (u[im, j] + u[ip, j] + u[i, jm] + u[i, jp]
                             - 4.0 * u[i, j]) * inv_h2
    return np.asarray(out)


def helmholtz(const double[:, ::1] u, double alpha, double beta, diag,
              double inv_h2, double[:, ::1] out):
    if diag is None:
        _helmholtz_plain(u, alpha, beta, inv_h2, out)
    else:
        _helmholtz_diag(u, alpha, beta, diag, inv_h2, out)
    return np.asarray(out)


cdef void _helmholtz_plain(const double[:, ::1] u, double alpha, double beta,
                           double inv_h2, double[:, ::1] out) nogil:
    cdef Py_ssize_t m = u.shape[0], n = u.shape[1], i, j, im, ip, jm, jp
    cdef double lap
    for i in range(m):
        im = _mirror_lo(i)
        ip = m - 2 if i == m - 1 else i + 1
        for j in range(n):
            jm = _mirror_lo(j)
            jp = n - 2 if j == n - 1 else j + 1
            lap = (u[im, j] + u[ip, j] + u[i, jm] + u[i, jp]
                   - 4.0 * u[i, j]) * inv_h2
            out[i, j] = alpha * u[i, j] - beta * lap


cdef void _helmholtz_diag(const double[:, ::1] u, double alpha, double beta,
                          const double[:, ::1] diag, double inv_h2,
                          double[:, ::1] out) nogil:
    cdef Py_ssize_t m = u.shape[0], n = u.shape[1], i, j, im, ip, jm, jp
    cdef double lap
    for i in range(m):
        im = _mirror_lo(i)
        ip = m - 2 if i == m - 1 else i + 1
        for j in range(n):
            jm = _mirror_lo(j)
            jp = n - 2 if j == n - 1 else j + 1
            lap = (u[im, j] + u[ip, j] + u[i, jm] + u[i, jp]
                   - 4.0 * u[i, j]) * inv_h2
            out[i, j] = (alpha + diag[i, j]) * u[i, j] - beta * lap


def step_gradient(const double[:, ::1] u, const double[:, ::1] u_prev, double inv_k,
                  double lap_coef, double well_coef, double inv_h2,
                  double[:, ::1] out):
    cdef Py_ssize_t m = u.shape[0], n = u.shape[1], i, j, im, ip, jm, jp
    cdef double lap, v
    with nogil:
        for i in range(m):
            im = _mirror_lo(i)
            ip = m - 2 if i == m - 1 else i + 1
            for j in range(n):
                jm = _mirror_lo(j)
                jp = n - 2 if j == n - 1 else j + 1
                v = u[i, j]
                lap = (u[im, j] + u[ip, j] + u[i, jm] + u[i, jp]
                       - 4.0 * v) * inv_h2
                out[i, j] = (inv_k * (v - u_prev[i, j]) - lap_coef * lap
                             + well_coef * (v * v * v - v))
    return np.asarray(out)


def cubic(const double[:, ::1] u, double[:, ::1] out):
    cdef Py_ssize_t m = u.shape[0], n = u.shape[1], i, j
    cdef double v
    with nogil:
        for i in range(m):
            for j in range(n):
                v = u[i, j]
                out[i, j] = v * v * v - v
    return np.asarray(out)


def weighted_dot(const double[:, ::1] w, const double[:, ::1] a, const double[:, ::1] b):
    cdef Py_ssize_t m = w.shape[0], n = w.shape[1], i, j
    cdef double s = 0.0
    with nogil:
        for i in range(m):
            for j in range(n):
                s += w[i, j] * a[i, j] * b[i, j]
    return s


def weighted_sqdiff(const double[:, ::1] w, const double[:, ::1] a, const double[:, ::1] b):
    cdef Py_ssize_t m = w.shape[0], n = w.shape[1], i, j
    cdef double s = 0.0, d
    with nogil:
        for i in range(m):
            for j in range(n):
                d = a[i, j] - b[i, j]
                s += w[i, j] * d * d
    return s


def weighted_well(const double[:, ::1] w, const double[:, ::1] u):
    cdef Py_ssize_t m = w.shape[0], n = w.shape[1], i, j
    cdef double s = 0.0, q
    with nogil:
        for i in range(m):
            for j in range(n):
                q = u[i, j] * u[i, j] - 1.0
                s += w[i, j] * q * q
    return 0.25 * s


def dirichlet(const double[:, ::1] u):
    cdef Py_ssize_t m = u.shape[0], n = u.shape[1], i, j
    cdef double ex = 0.0, ey = 0.0, d, t
    with nogil:
        for i in range(m - 1):
            for j in range(n):
                d = u[i + 1, j] - u[i, j]
                t = d * d
                ex += t if (j == 0 or j == n - 1) else 2.0 * t
        for i in range(m):
            for j in range(n - 1):
                d = u[i, j + 1] - u[i, j]
                t = d * d
                ey += t if (i == 0 or i == m - 1) else 2.0 * t
    return 0.25 * (ex + ey)


def curvature_step(const double[:, ::1] w, double dt, double inv_h, double inv_h2,
                   double reg, double[:, ::1] out):
    cdef Py_ssize_t m = w.shape[0], n = w.shape[1], i, j, im, ip, jm, jp
    cdef double gx, gy, wxx, wyy, wxy, gx2, gy2, curv, c
    with nogil:
        for i in range(m):
            im = _mirror_lo(i)
            ip = m - 2 if i == m - 1 else i + 1
            for j in range(n):
                jm = _mirror_lo(j)
                jp = n - 2 if j == n - 1 else j + 1
                c = w[i, j]
                gx = 0.5 * inv_h * (w[ip, j] - w[im, j])
                gy = 0.5 * inv_h * (w[i, jp] - w[i, jm])
                wxx = inv_h2 * (w[ip, j] - 2.0 * c + w[im, j])
                wyy = inv_h2 * (w[i, jp] - 2.0 * c + w[i, jm])
                wxy = 0.25 * inv_h2 * (w[ip, jp] - w[ip, jm]
                                       - w[im, jp] + w[im, jm])
                gx2 = gx * gx
                gy2 = gy * gy
                curv = (wxx * gx2 + 2.0 * wxy * gx * gy + wyy * gy2) \
                    / (gx2 + gy2 + reg)
                out[i, j] = c + dt * (wxx + wyy - curv)
    return np.asarray(out)
