# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: stencil derivative and flow stepping.

Mirrors ``numpy_backend`` exactly; keep both in sync. The flow loop calls
``rk4_step`` millions of times at grid sizes around 1000 nodes, which is
where the fused single-pass loops pay off.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport log, isfinite

cnp.import_array()

name = "cython"


cdef void _d_dx_raw(const double* f, double* out, Py_ssize_t m, double c) noexcept nogil:
    # c = 1/(12 dx); boundary bands use six-point one-sided stencils.
    # difference form (node values minus an anchor) so constants are
    # annihilated exactly in floating point; keep in sync with numpy_backend.
    cdef Py_ssize_t i
    cdef double c6 = c * 0.2  # 1/(60 dx)
    out[0] = (300.0 * (f[1] - f[0]) - 300.0 * (f[2] - f[0]) + 200.0 * (f[3] - f[0])
              - 75.0 * (f[4] - f[0]) + 12.0 * (f[5] - f[0])) * c6
    out[1] = (-12.0 * (f[0] - f[1]) + 120.0 * (f[2] - f[1]) - 60.0 * (f[3] - f[1])
              + 20.0 * (f[4] - f[1]) - 3.0 * (f[5] - f[1])) * c6
    for i in range(2, m - 2):
        out[i] = ((f[i - 2] - f[i + 2]) + 8.0 * (f[i + 1] - f[i - 1])) * c
    out[m - 2] = (12.0 * (f[m - 1] - f[m - 2]) - 120.0 * (f[m - 3] - f[m - 2])
                  + 60.0 * (f[m - 4] - f[m - 2]) - 20.0 * (f[m - 5] - f[m - 2])
                  + 3.0 * (f[m - 6] - f[m - 2])) * c6
    out[m - 1] = (-300.0 * (f[m - 2] - f[m - 1]) + 300.0 * (f[m - 3] - f[m - 1])
                  - 200.0 * (f[m - 4] - f[m - 1]) + 75.0 * (f[m - 5] - f[m - 1])
                  - 12.0 * (f[m - 6] - f[m - 1])) * c6


cdef int _log_density_raw(const double* phi, const double* x, const double* xm,
                          const double* omx, double dx, int n, Py_ssize_t m,
                          double* u, double* b, double* r, double* logrho,
                          double* min_a, double* min_b) noexcept nogil:
    """Fills logrho; returns 0 on success, 1 when positivity fails."""
    cdef double np1 = n + 1.0
    cdef double c = 1.0 / (12.0 * dx)
    cdef double ahat, bhat, ma, mb
    cdef Py_ssize_t i
    _d_dx_raw(phi, u, m, c)
    for i in range(m):
        b[i] = np1 * x[i] + xm[i] * u[i]
    _d_dx_raw(b, r, m, c)
    ma = 1e300
    mb = 1e300
    for i in range(m):
        ahat = r[i] / np1
        bhat = 1.0 + omx[i] * u[i] / np1
        if not (isfinite(ahat) and isfinite(bhat)):
            min_a[0] = ahat
            min_b[0] = bhat
            return 1
        if ahat < ma:
            ma = ahat
        if bhat < mb:
            mb = bhat
        u[i] = bhat  # reuse u to hold bhat for the log pass
        r[i] = ahat
    min_a[0] = ma
    min_b[0] = mb
    if not (ma > 0.0 and mb > 0.0):
        return 1
    if n > 1:
        for i in range(m):
            logrho[i] = log(r[i]) + (n - 1) * log(u[i])
    else:
        for i in range(m):
            logrho[i] = log(r[i])
    return 0


def d_dx(values, double dx, out=None):
    """Fourth-order finite-difference d/dx on a uniform grid."""
    cdef cnp.ndarray[double, ndim=1] f = np.ascontiguousarray(values, dtype=np.float64)
    cdef Py_ssize_t m = f.shape[0]
    if m < 5:
        raise ValueError("d_dx needs at least 5 nodes")
    cdef cnp.ndarray[double, ndim=1] o
    if out is None:
        o = np.empty(m, dtype=np.float64)
    else:
        o = out
    _d_dx_raw(&f[0], &o[0], m, 1.0 / (12.0 * dx))
    return o


def log_density(phi, x, xm, omx, double dx, int n):
    """Log ratio of the metric volume density against the background."""
    cdef cnp.ndarray[double, ndim=1] p = np.ascontiguousarray(phi, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] xv = x, xmv = xm, omxv = omx
    cdef Py_ssize_t m = p.shape[0]
    cdef cnp.ndarray[double, ndim=1] u = np.empty(m), b = np.empty(m), r = np.empty(m)
    cdef cnp.ndarray[double, ndim=1] logrho = np.empty(m)
    cdef double min_a = 0.0, min_b = 0.0
    cdef int bad
    bad = _log_density_raw(&p[0], &xv[0], &xmv[0], &omxv[0], dx, n, m,
                           &u[0], &b[0], &r[0], &logrho[0], &min_a, &min_b)
    if bad:
        return None, min_a, min_b
    return logrho, min_a, min_b


def velocity(phi, shift, x, xm, omx, double dx, int n):
    """Flow velocity log(density ratio) + phi - shift."""
    cdef cnp.ndarray[double, ndim=1] s = np.ascontiguousarray(shift, dtype=np.float64)
    logrho, min_a, min_b = log_density(phi, x, xm, omx, dx, n)
    if logrho is None:
        return None, min_a, min_b
    cdef cnp.ndarray[double, ndim=1] v = logrho
    cdef cnp.ndarray[double, ndim=1] p = np.ascontiguousarray(phi, dtype=np.float64)
    cdef Py_ssize_t i, m = v.shape[0]
    for i in range(m):
        v[i] += p[i] - s[i]
    return v, min_a, min_b


def rk4_step(phi, double dt, shift, x, xm, omx, double dx, int n):
    """One classical Runge-Kutta step of dphi/dt = velocity(phi)."""
    cdef cnp.ndarray[double, ndim=1] p = np.ascontiguousarray(phi, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] s = np.ascontiguousarray(shift, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] xv = x, xmv = xm, omxv = omx
    cdef Py_ssize_t m = p.shape[0]
    cdef cnp.ndarray[double, ndim=1] u = np.empty(m), b = np.empty(m), r = np.empty(m)
    cdef cnp.ndarray[double, ndim=1] k1 = np.empty(m), k2 = np.empty(m)
    cdef cnp.ndarray[double, ndim=1] k3 = np.empty(m), k4 = np.empty(m)
    cdef cnp.ndarray[double, ndim=1] stage = np.empty(m)
    cdef cnp.ndarray[double, ndim=1] out = np.empty(m)
    cdef double min_a = 0.0, min_b = 0.0
    cdef double half = 0.5 * dt
    cdef Py_ssize_t i
    cdef int bad

    with nogil:
        bad = _log_density_raw(&p[0], &xv[0], &xmv[0], &omxv[0], dx, n, m,
                               &u[0], &b[0], &r[0], &k1[0], &min_a, &min_b)
        if not bad:
            for i in range(m):
                k1[i] += p[i] - s[i]
                stage[i] = p[i] + half * k1[i]
            bad = _log_density_raw(&stage[0], &xv[0], &xmv[0], &omxv[0], dx, n, m,
                                   &u[0], &b[0], &r[0], &k2[0], &min_a, &min_b)
        if not bad:
            for i in range(m):
                k2[i] += stage[i] - s[i]
                stage[i] = p[i] + half * k2[i]
            bad = _log_density_raw(&stage[0], &xv[0], &xmv[0], &omxv[0], dx, n, m,
                                   &u[0], &b[0], &r[0], &k3[0], &min_a, &min_b)
        if not bad:
            for i in range(m):
                k3[i] += stage[i] - s[i]
                stage[i] = p[i] + dt * k3[i]
            bad = _log_density_raw(&stage[0], &xv[0], &xmv[0], &omxv[0], dx, n, m,
                                   &u[0], &b[0], &r[0], &k4[0], &min_a, &min_b)
        if not bad:
            for i in range(m):
                k4[i] += stage[i] - s[i]
                out[i] = p[i] + (dt / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
            bad = _log_density_raw(&out[0], &xv[0], &xmv[0], &omxv[0], dx, n, m,
                                   &u[0], &b[0], &r[0], &stage[0], &min_a, &min_b)
    if bad:
        return None, False
    return out, True
