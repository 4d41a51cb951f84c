"""One-dimensional calculus on the compactified coordinate x in [0, 1].

The underlying chart variable is s = log(x/(1-x)), so derivatives "in s" are
taken as x(1-x) d/dx and integrals "ds" are integrals of f(x)/(x(1-x)) dx.
Working on a uniform grid in x keeps the domain compact (no truncation in s);
the 0/0 forms at the endpoints are resolved by one-sided quartic extrapolation.

All operations are pure functions of their inputs; profiles are plain float64
arrays with one value per node and are never mutated.
"""

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import ConfigError, DivergentIntegrand

MIN_SIZE = 16


@dataclass(frozen=True, eq=False)
class Grid:
    """Uniform grid on [0, 1] with ``size`` panels and ``size + 1`` nodes.

    ``size`` must be even so one composite quadrature rule covers the domain.
    Cached node profiles: ``x`` (nodes), ``xm`` = x(1-x), ``omx`` = 1-x.
    """

    size: int
    dx: float
    x: np.ndarray
    xm: np.ndarray
    omx: np.ndarray
    quad_weights: np.ndarray = field(repr=False)

    @property
    def nodes(self):
        return self.x


def build_grid(size):
    """Uniform grid with the given (even, >= 16) panel count."""
    n = int(size)
    if n != size or n < MIN_SIZE:
        raise ConfigError(f"grid size must be an integer >= {MIN_SIZE}, got {size}")
    if n % 2 != 0:
        raise ConfigError(f"grid size must be even, got {n}")
    x = np.linspace(0.0, 1.0, n + 1)
    dx = 1.0 / n
    xm = x * (1.0 - x)
    omx = 1.0 - x
    # composite Simpson weights; fourth-order for smooth integrands
    w = np.full(n + 1, 2.0)
    w[1::2] = 4.0
    w[0] = w[-1] = 1.0
    w *= dx / 3.0
    for arr in (x, xm, omx, w):
        arr.setflags(write=False)
    return Grid(size=n, dx=dx, x=x, xm=xm, omx=omx, quad_weights=w)


def _check_shape(values, grid):
    f = np.asarray(values, dtype=np.float64)
    if f.shape != (grid.size + 1,):
        raise ValueError(f"profile shape {f.shape} does not match grid with {grid.size + 1} nodes")
    return f


def d_dx(values, grid):
    """Fourth-order derivative in x (one-sided stencils at the edges)."""
    return _kernels.d_dx(_check_shape(values, grid), grid.dx)


def d_ds(values, grid):
    """Derivative in s = log(x/(1-x)): x(1-x) d/dx; zero at both endpoints."""
    return grid.xm * d_dx(values, grid)


def extrapolate_endpoints(values, grid):
    """Replace the two endpoint entries by one-sided quartic extrapolation.

    Used for profiles of the form f/(x(1-x)) whose endpoint entries are 0/0
    but whose limits are finite.
    """
    g = _check_shape(values, grid).copy()
    g[0] = 5.0 * g[1] - 10.0 * g[2] + 10.0 * g[3] - 5.0 * g[4] + g[5]
    g[-1] = 5.0 * g[-2] - 10.0 * g[-3] + 10.0 * g[-4] - 5.0 * g[-5] + g[-6]
    return g


def integrate_ds(values, grid, endpoint_bound=1e8):
    """Integral of f ds over the whole chart, i.e. of f(x)/(x(1-x)) dx.

    The integrand is extended to x = 0, 1 by quartic extrapolation and fed to
    the composite rule. Raises DivergentIntegrand when an extrapolated
    endpoint value exceeds ``endpoint_bound`` (the true integral then almost
    certainly diverges).
    """
    f = _check_shape(values, grid)
    g = np.empty_like(f)
    g[1:-1] = f[1:-1] / grid.xm[1:-1]
    g[0] = 5.0 * g[1] - 10.0 * g[2] + 10.0 * g[3] - 5.0 * g[4] + g[5]
    g[-1] = 5.0 * g[-2] - 10.0 * g[-3] + 10.0 * g[-4] - 5.0 * g[-5] + g[-6]
    if not np.isfinite(g[0]) or not np.isfinite(g[-1]) \
            or max(abs(g[0]), abs(g[-1])) > endpoint_bound:
        raise DivergentIntegrand(
            f"extrapolated endpoint values ({g[0]:.3e}, {g[-1]:.3e}) exceed bound {endpoint_bound:.1e}")
    return float(grid.quad_weights @ g)


def cumulative_dx(values, grid):
    """Fourth-order antiderivative in x with value 0 at x = 0.

    Derivative-corrected trapezoid per panel: the correction term uses the
    stencil derivative, giving global O(dx^4) accuracy.
    """
    w = _check_shape(values, grid)
    dw = d_dx(w, grid)
    h = grid.dx
    panels = 0.5 * h * (w[:-1] + w[1:]) - (h * h / 12.0) * (dw[1:] - dw[:-1])
    out = np.empty_like(w)
    out[0] = 0.0
    np.cumsum(panels, out=out[1:])
    return out
