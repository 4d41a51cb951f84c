"""Rotation-invariant Kahler geometry on CP^n reduced to one dimension.

Conventions
-----------
A rotation-invariant real (1,1)-form is a pair of profiles (A, B) standing
for A * i ds /\\ dsbar + B * i ddbar(s) in the chart variable s = log|z|^2.
A form derived from a potential P has B = d_ds P and A = d_ds B. The wedge
product of n such forms reduces to

    sum_j A_j * prod_{k != j} B_k

times a fixed one-dimensional measure ds; the constant relating that measure
to the manifold volume cancels in every average and is never materialized.

The background metric has B0 = (n+1) x and A0 = (n+1) x (1-x), normalized so
that its Ricci form equals the metric exactly and the total volume in ds
units is (n+1)^n.

Positivity of a perturbed metric is equivalent to the reduced ratios

    Ahat = (dB/dx) / (n+1) > 0,   Bhat = 1 + (1-x) phi'(x) / (n+1) > 0

holding at every node including the endpoints; these factored forms avoid
the 0/0 limits of A and B themselves. Likewise the Ricci profile is computed
from the factored formula

    B_ric = n - (n-1) [(1-x) + x(1-x) q'/q] - [(1-2x) + x(1-x) r'/r]

with q = (n+1) + (1-x) phi'(x) and r = dB/dx, which is endpoint-regular.
"""

from dataclasses import dataclass

import numpy as np

from .calculus import Grid, d_dx, d_ds, integrate_ds
from .errors import ConfigError, NotInPotentialSpace

DEFAULT_DEGREE = 8
DEFAULT_COEFF_BOUND = 0.3


@dataclass(frozen=True, eq=False)
class ManifoldConfig:
    """Complex dimension (1..3) plus the grid everything is sampled on."""

    n: int
    grid: Grid

    def __post_init__(self):
        if self.n not in (1, 2, 3):
            raise ConfigError(f"complex dimension must be 1, 2 or 3, got {self.n}")

    @property
    def volume(self):
        """Total volume of the class in ds units: (n+1)^n."""
        return float((self.n + 1) ** self.n)


@dataclass(frozen=True, eq=False)
class RadialForm:
    """Profile pair (A, B) of a rotation-invariant real (1,1)-form."""

    a: np.ndarray
    b: np.ndarray


class RadialPotential:
    """Polynomial potential in x, coefficients low to high degree.

    Node evaluation is exact polynomial evaluation (no interpolation error);
    results are cached per grid size.
    """

    __slots__ = ("coeffs", "_cache")

    def __init__(self, coeffs, max_degree=DEFAULT_DEGREE):
        c = tuple(float(v) for v in coeffs)
        if not c:
            c = (0.0,)
        if len(c) > max_degree + 1:
            raise ConfigError(f"potential degree {len(c) - 1} exceeds maximum {max_degree}")
        if not all(np.isfinite(c)):
            raise ConfigError("potential coefficients must be finite")
        object.__setattr__(self, "coeffs", c)
        object.__setattr__(self, "_cache", {})

    def __setattr__(self, *_):
        raise AttributeError("RadialPotential is immutable")

    def values(self, grid):
        cached = self._cache.get(grid.size)
        if cached is None:
            cached = np.polynomial.polynomial.polyval(grid.x, np.asarray(self.coeffs))
            cached.setflags(write=False)
            self._cache[grid.size] = cached
        return cached

    def __add__(self, other):
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, v in enumerate(b):
            out[i] += v
        return RadialPotential(out, max_degree=max(len(a) - 1, DEFAULT_DEGREE))

    def __sub__(self, other):
        return self + other.scaled(-1.0)

    def scaled(self, t):
        return RadialPotential([t * v for v in self.coeffs],
                               max_degree=max(len(self.coeffs) - 1, DEFAULT_DEGREE))

    def __repr__(self):
        return f"RadialPotential({list(self.coeffs)})"


ZERO_POTENTIAL = RadialPotential((0.0,))


@dataclass(frozen=True, eq=False)
class MetricState:
    """A validated positive metric with its cached profiles.

    ``phi_total`` is the nodal potential relative to the background, ``form``
    the metric profile pair, ``ricci`` the Ricci profile pair (``ricci_db``
    its x-derivative, used for endpoint-regular curvature ratios). ``q`` and
    ``r`` are the endpoint-regular factors described in the module docstring;
    ``log_density`` is log of the volume ratio against the background.
    Immutable after construction and safe to share across threads.
    """

    config: ManifoldConfig
    phi_total: np.ndarray
    form: RadialForm
    ahat: np.ndarray
    bhat: np.ndarray
    q: np.ndarray
    r: np.ndarray
    log_density: np.ndarray
    ricci: RadialForm
    ricci_db: np.ndarray

    @property
    def grid(self):
        return self.config.grid


def _potential_values(phi, grid):
    if isinstance(phi, RadialPotential):
        return phi.values(grid)
    values = np.asarray(phi, dtype=np.float64)
    if values.shape != (grid.size + 1,):
        raise ValueError("nodal potential does not match the grid")
    if not np.all(np.isfinite(values)):
        raise NotInPotentialSpace("potential has non-finite nodal values")
    return values


def state_from_total(config, phi_total):
    """Build a MetricState from the total nodal potential (background-relative).

    One code path for polynomial-sampled and flow (nodal) states alike: all
    derivatives come from the fourth-order stencils, so every downstream
    quantity converges at the same designed order.
    """
    g = config.grid
    n = config.n
    np1 = n + 1.0
    phi_total = _potential_values(phi_total, g)

    u = d_dx(phi_total, g)
    b = np1 * g.x + g.xm * u
    r = d_dx(b, g)
    q = np1 + g.omx * u
    ahat = r / np1
    bhat = q / np1
    min_a = float(ahat.min())
    min_b = float(bhat.min())
    if not (min_a > 0.0 and min_b > 0.0):
        raise NotInPotentialSpace(
            f"metric not positive: min Ahat = {min_a:.6g}, min Bhat = {min_b:.6g}")

    log_density = np.log(ahat)
    if n > 1:
        log_density = log_density + (n - 1) * np.log(bhat)

    b_ric = n - (n - 1) * (g.omx + g.xm * d_dx(q, g) / q) \
        - ((1.0 - 2.0 * g.x) + g.xm * d_dx(r, g) / r)
    db_ric = d_dx(b_ric, g)

    return MetricState(
        config=config,
        phi_total=phi_total,
        form=RadialForm(a=g.xm * r, b=b),
        ahat=ahat,
        bhat=bhat,
        q=q,
        r=r,
        log_density=log_density,
        ricci=RadialForm(a=g.xm * db_ric, b=b_ric),
        ricci_db=db_ric,
    )


def background(config):
    """The Fubini-Study state: B0 = (n+1)x, phi = 0, Ricci = metric."""
    return state_from_total(config, np.zeros(config.grid.size + 1))


def make_state(config, phi):
    """State of the metric perturbed by ``phi`` (polynomial or nodal)."""
    return state_from_total(config, _potential_values(phi, config.grid))


def state_from(base, phi):
    """State of ``base``'s metric perturbed by the relative potential ``phi``."""
    values = _potential_values(phi, base.config.grid)
    return state_from_total(base.config, base.phi_total + values)


def wedge_density(forms, n):
    """Reduced density of an n-fold wedge of radial forms.

    ``forms`` is a sequence of (RadialForm, multiplicity) pairs whose
    multiplicities sum to n. Multiplicity 0 entries are allowed and ignored.
    """
    active = [(f, int(m)) for f, m in forms if int(m) != 0]
    if any(m < 0 for _, m in active):
        raise ConfigError("wedge multiplicities must be nonnegative")
    if sum(m for _, m in active) != n:
        raise ConfigError(f"wedge multiplicities must sum to the dimension {n}")
    if not active:
        raise ConfigError("empty wedge product")
    size = active[0][0].b.shape[0]
    density = np.zeros(size)
    for j, (fj, mj) in enumerate(active):
        term = mj * fj.a
        if mj > 1:
            term = term * fj.b ** (mj - 1)
        for k, (fk, mk) in enumerate(active):
            if k != j:
                term = term * fk.b ** mk
        density += term
    return density


def scalar_curvature(state):
    """Pointwise scalar curvature 2 [A_ric/A + (n-1) B_ric/B].

    Both ratios are evaluated in endpoint-regular form: A_ric/A equals
    (dB_ric/dx)/(dB/dx) everywhere, and B_ric/B at x = 0 is replaced by the
    same derivative ratio (l'Hopital).
    """
    n = state.config.n
    dbr = state.ricci_db
    ratio_a = dbr / state.r
    if n == 1:
        return 2.0 * ratio_a
    ratio_b = np.empty_like(ratio_a)
    ratio_b[1:] = state.ricci.b[1:] / state.form.b[1:]
    ratio_b[0] = dbr[0] / state.r[0]
    return 2.0 * (ratio_a + (n - 1) * ratio_b)


def laplacian(state, values):
    """Trace of i ddbar f against the metric: 2 [d_ds^2 f / A + (n-1) d_ds f / B].

    Computed in endpoint-regular form; the sign convention is the opposite of
    the Riemannian Laplace-Beltrami operator.
    """
    g = state.grid
    n = state.config.n
    u = d_dx(values, g)
    second = d_dx(g.xm * u, g)
    out = 2.0 * second / state.r
    if n > 1:
        out += 2.0 * (n - 1) * g.omx * u / state.q
    return out


def gradient_pairing(f, fbar, grid):
    """Radial form of i df /\\ dbar(g): A = d_ds f * d_ds g, B = 0."""
    a = d_ds(f, grid) * d_ds(fbar, grid)
    return RadialForm(a=a, b=np.zeros_like(a))


def average(density, config):
    """Average of an n-form density over the class volume (n+1)^n."""
    return integrate_ds(density, config.grid) / config.volume


def sample_admissible(config, rng, count, coeff_bound=DEFAULT_COEFF_BOUND,
                      degree=DEFAULT_DEGREE, base=None, margin=0.3, max_tries=5000):
    """Random positive potentials: coefficients uniform in [-bound, bound].

    Rejection sampling against the positivity test, optionally relative to a
    ``base`` state. Candidates whose reduced ratios dip below ``margin`` are
    rejected as well: states arbitrarily close to the cone boundary are
    admissible but numerically degenerate (log-density gradients diverge),
    and every tolerance in the suite presumes interior states.
    Deterministic for a seeded generator.
    """
    out = []
    tries = 0
    while len(out) < count:
        if tries >= max_tries:
            raise ConfigError(
                f"could not sample {count} admissible potentials in {max_tries} tries")
        tries += 1
        candidate = RadialPotential(rng.uniform(-coeff_bound, coeff_bound, degree + 1))
        try:
            if base is None:
                state = make_state(config, candidate)
            else:
                state = state_from(base, candidate)
        except NotInPotentialSpace:
            continue
        if min(state.ahat.min(), state.bhat.min()) < margin:
            continue
        out.append(candidate)
    return out
