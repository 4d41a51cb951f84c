"""Pure-numpy implementations of the hot kernels.

Semantically identical to the compiled backend in ``_core.pyx``; the two are
cross-checked in the test suite and compared by ``krflow.benchmarks``.
All functions work on contiguous float64 arrays over the full node set
(N+1 values including both endpoints).
"""

import numpy as np

name = "python"


def d_dx(values, dx, out=None):
    """Fourth-order finite-difference d/dx on a uniform grid.

    Five-point central stencil in the interior; the two-node boundary bands
    use six-point one-sided stencils (one order higher, so the boundary
    contribution to integral-level errors stays below the interior term).
    Exact on polynomials of degree <= 4.
    """
    f = np.ascontiguousarray(values, dtype=np.float64)
    m = f.shape[0]
    if m < 6:
        raise ValueError("d_dx needs at least 6 nodes")
    if out is None:
        out = np.empty(m, dtype=np.float64)
    # difference form (node values minus an anchor) so constants are
    # annihilated exactly in floating point
    c = 1.0 / (12.0 * dx)
    out[2:-2] = ((f[:-4] - f[4:]) + 8.0 * (f[3:-1] - f[1:-3])) * c
    c6 = 1.0 / (60.0 * dx)
    out[0] = (300.0 * (f[1] - f[0]) - 300.0 * (f[2] - f[0]) + 200.0 * (f[3] - f[0])
              - 75.0 * (f[4] - f[0]) + 12.0 * (f[5] - f[0])) * c6
    out[1] = (-12.0 * (f[0] - f[1]) + 120.0 * (f[2] - f[1]) - 60.0 * (f[3] - f[1])
              + 20.0 * (f[4] - f[1]) - 3.0 * (f[5] - f[1])) * c6
    out[-2] = (12.0 * (f[-1] - f[-2]) - 120.0 * (f[-3] - f[-2])
               + 60.0 * (f[-4] - f[-2]) - 20.0 * (f[-5] - f[-2])
               + 3.0 * (f[-6] - f[-2])) * c6
    out[-1] = (-300.0 * (f[-2] - f[-1]) + 300.0 * (f[-3] - f[-1])
               - 200.0 * (f[-4] - f[-1]) + 75.0 * (f[-5] - f[-1])
               - 12.0 * (f[-6] - f[-1])) * c6
    return out


def log_density(phi, x, xm, omx, dx, n):
    """Log ratio of the metric volume density against the background.

    Returns ``(logrho, min_ahat, min_bhat)``; ``logrho`` is None when the
    state leaves the positive cone (the mins still report how far).
    """
    np1 = n + 1.0
    u = d_dx(phi, dx)
    b = np1 * x + xm * u
    r = d_dx(b, dx)
    ahat = r / np1
    bhat = 1.0 + omx * u / np1
    min_a = float(ahat.min())
    min_b = float(bhat.min())
    if not (min_a > 0.0 and min_b > 0.0):
        return None, min_a, min_b
    logrho = np.log(ahat)
    if n > 1:
        logrho += (n - 1) * np.log(bhat)
    return logrho, min_a, min_b


def velocity(phi, shift, x, xm, omx, dx, n):
    """Flow velocity log(density ratio) + phi - shift.

    ``shift`` folds the reference metric's log density, potential offset and
    Ricci potential into one precomputed profile.
    """
    logrho, min_a, min_b = log_density(phi, x, xm, omx, dx, n)
    if logrho is None:
        return None, min_a, min_b
    logrho += phi
    logrho -= shift
    return logrho, min_a, min_b


def rk4_step(phi, dt, shift, x, xm, omx, dx, n):
    """One classical Runge-Kutta step of dphi/dt = velocity(phi).

    Returns ``(phi_new, ok)``; ok is False when any stage leaves the
    positive cone, in which case phi_new is None.
    """
    k1, _, _ = velocity(phi, shift, x, xm, omx, dx, n)
    if k1 is None:
        return None, False
    k2, _, _ = velocity(phi + (0.5 * dt) * k1, shift, x, xm, omx, dx, n)
    if k2 is None:
        return None, False
    k3, _, _ = velocity(phi + (0.5 * dt) * k2, shift, x, xm, omx, dx, n)
    if k3 is None:
        return None, False
    k4, _, _ = velocity(phi + dt * k3, shift, x, xm, omx, dx, n)
    if k4 is None:
        return None, False
    phi_new = phi + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    _, min_a, min_b = log_density(phi_new, x, xm, omx, dx, n)
    if not (min_a > 0.0 and min_b > 0.0):
        return None, False
    return phi_new, True
