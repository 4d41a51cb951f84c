"""Ricci potential, Futaki invariant, and the canonical-class energies.

A ``Reference`` bundles a positive metric state with its Ricci potential and
the two normalization constants; all functionals are evaluated for a
potential *relative to* a reference, which makes the two-argument (cocycle)
form available through ``re_reference``.

Shift robustness: every functional here is invariant under adding a constant
to the potential because its mixed-term coefficients sum to zero. The
implementations subtract the potential's midpoint value before forming
products with volume densities, which makes that invariance exact in
floating point as well (potentials drift by large constants along the flow;
a fixed-node gauge keeps that drift out of the quadratures without masking
deliberately corrupted coefficient systems). ``mixed_sum`` is the uncentered
primitive and feels constants.
"""

import math
from dataclasses import dataclass

import numpy as np

from .calculus import cumulative_dx, d_ds, extrapolate_endpoints, integrate_ds
from .errors import ExpressionMismatch, NotInPotentialSpace
from .geometry import (
    RadialForm,
    _potential_values,
    average,
    background,
    state_from,
    wedge_density,
)


def k_energy_coefficients(n):
    """Mixed-term weights of the K-energy: (n, -1, ..., -1)."""
    coeffs = np.full(n + 1, -1.0)
    coeffs[0] = float(n)
    return coeffs


def e1_coefficients(n):
    """Mixed-term weights of the first Chen-Tian energy: (n-1, n-1, -2, ..., -2)."""
    coeffs = np.full(n + 1, -2.0)
    coeffs[0] = coeffs[1] = float(n - 1)
    return coeffs


@dataclass(frozen=True, eq=False)
class RicciPotential:
    """Solution h of i ddbar h = Ric - metric, normalized so that the
    average of e^h - 1 against the metric volume vanishes; ``c`` is the
    additive constant that enforced the normalization."""

    h: np.ndarray
    c: float


@dataclass(frozen=True, eq=False)
class Reference:
    """A metric state promoted to reference role, with cached quantities."""

    state: "MetricState"
    potential: RicciPotential
    c0: float
    c1: float
    density: np.ndarray  # volume density of the reference metric

    @property
    def config(self):
        return self.state.config

    @property
    def grid(self):
        return self.state.config.grid

    @property
    def form(self):
        return self.state.form


@dataclass(frozen=True)
class FunctionalReport:
    """Values of all functionals at one potential."""

    j: float
    j_mixed: float
    nu: float
    e1: float
    dirichlet: float
    residual: float
    c0: float
    c1: float


def ricci_potential(state, normalization_offset=0.0, endpoint_tol=1e-7):
    """Ricci potential of ``state``'s metric.

    dh/dx = (B_ric - B)/(x(1-x)) is integrated from the midpoint outward;
    the additive constant comes in closed form from the two quadratures that
    define the normalization. ``normalization_offset`` deliberately corrupts
    the constant (mutation fixtures only).
    """
    g = state.grid
    diff = state.ricci.b - state.form.b
    scale = 1.0 + float(np.abs(state.form.b).max())
    if abs(diff[0]) > endpoint_tol * scale or abs(diff[-1]) > endpoint_tol * scale:
        raise NotInPotentialSpace(
            f"Ricci-minus-metric profile does not vanish at the endpoints "
            f"({diff[0]:.3e}, {diff[-1]:.3e}); state is not admissible")
    slope = np.empty_like(diff)
    slope[1:-1] = diff[1:-1] / g.xm[1:-1]
    slope = extrapolate_endpoints(slope, g)
    h_raw = cumulative_dx(slope, g)
    h_raw -= h_raw[g.size // 2]
    density = wedge_density([(state.form, state.config.n)], state.config.n)
    total = integrate_ds(density, g)
    weighted = integrate_ds(np.exp(h_raw) * density, g)
    c = math.log(total / weighted) + normalization_offset
    return RicciPotential(h=h_raw + c, c=c)


def make_reference(state, normalization_offset=0.0):
    """Promote a state to reference role (computes h and the constants)."""
    n = state.config.n
    potential = ricci_potential(state, normalization_offset=normalization_offset)
    density = wedge_density([(state.form, n)], n)
    ric_plus = RadialForm(a=state.ricci.a + state.form.a, b=state.ricci.b + state.form.b)
    mixed = wedge_density([(ric_plus, 1), (state.form, n - 1)], n)
    c0 = average(potential.h * density, state.config)
    c1 = average(potential.h * mixed, state.config)
    return Reference(state=state, potential=potential, c0=c0, c1=c1, density=density)


def fubini_study_reference(config):
    """Reference at the background metric (h = 0 exactly)."""
    return make_reference(background(config))


def re_reference(ref, psi):
    """The perturbed metric as a new reference with its own Ricci potential."""
    return make_reference(state_from(ref.state, psi))


def _relative_state(ref, phi):
    values = _potential_values(phi, ref.grid)
    return state_from(ref.state, phi), values


def _mixed_densities(ref, state):
    n = ref.config.n
    return [wedge_density([(ref.form, k), (state.form, n - k)], n) for k in range(n + 1)]


def _mixed_terms(ref, state, values, coeffs):
    densities = _mixed_densities(ref, state)
    np1 = ref.config.n + 1
    return sum(
        coeffs[k] / np1 * average(values * densities[k], ref.config) for k in range(np1))


def mixed_sum(ref, phi, coeffs):
    """sum_k coeffs[k]/(n+1) <avg of phi * (ref^k wedge perturbed^(n-k))>."""
    coeffs = np.asarray(coeffs, dtype=np.float64)
    if coeffs.shape != (ref.config.n + 1,):
        raise ValueError(f"need {ref.config.n + 1} coefficients, got shape {coeffs.shape}")
    state, values = _relative_state(ref, phi)
    return _mixed_terms(ref, state, values, coeffs)


def _j_energy_from(ref, state, values, rel_tol=1e-6):
    n = ref.config.n
    centered = values - values[values.shape[0] // 2]
    grad = d_ds(centered, ref.grid) ** 2
    j_grad = 0.0
    for k in range(n):
        weight = (k + 1) / (n + 1)
        density = grad * ref.form.b ** k * state.form.b ** (n - 1 - k)
        j_grad += weight * average(density, ref.config)
    densities = _mixed_densities(ref, state)
    j_mixed = average(centered * ref.density, ref.config)
    j_mixed -= sum(average(centered * d, ref.config) for d in densities) / (n + 1)
    if abs(j_grad - j_mixed) > rel_tol * (1.0 + abs(j_grad)):
        raise ExpressionMismatch(
            f"gradient form {j_grad:.12e} and mixed form {j_mixed:.12e} of the "
            f"generalized energy disagree")
    return j_grad, j_mixed


def j_energy(ref, phi):
    """Generalized energy; computes both defining expressions and checks
    they agree before returning the gradient form (which is >= 0)."""
    state, values = _relative_state(ref, phi)
    return _j_energy_from(ref, state, values)[0]


def _k_energy_from(ref, state, values, coeffs=None):
    n = ref.config.n
    if coeffs is None:
        coeffs = k_energy_coefficients(n)
    centered = values - values[values.shape[0] // 2]
    log_rel = state.log_density - ref.state.log_density
    density = wedge_density([(state.form, n)], n)
    entropy = average((log_rel - ref.potential.h) * density, ref.config)
    return entropy + _mixed_terms(ref, state, centered, coeffs) + ref.c0


def k_energy(ref, phi, coeffs=None):
    """K-energy in synthetic form: entropy-type term, weighted mixed sums,
    plus the reference constant."""
    state, values = _relative_state(ref, phi)
    return _k_energy_from(ref, state, values, coeffs)


def _e1_energy_from(ref, state, values, coeffs=None):
    n = ref.config.n
    if coeffs is None:
        coeffs = e1_coefficients(n)
    centered = values - values[values.shape[0] // 2]
    log_rel = state.log_density - ref.state.log_density
    ric_plus = RadialForm(a=state.ricci.a + ref.form.a, b=state.ricci.b + ref.form.b)
    density = wedge_density([(ric_plus, 1), (state.form, n - 1)], n)
    entropy = average((log_rel - ref.potential.h) * density, ref.config)
    return entropy + _mixed_terms(ref, state, centered, coeffs) + ref.c1


def e1_energy(ref, phi, coeffs=None):
    """First Chen-Tian energy with its (n-1, n-1, -2, ...) mixed weights."""
    state, values = _relative_state(ref, phi)
    return _e1_energy_from(ref, state, values, coeffs)


def _velocity_from(ref, state, values):
    log_rel = state.log_density - ref.state.log_density
    return log_rel + values - ref.potential.h


def flow_velocity(ref, phi):
    """Potential-flow velocity log(volume ratio) + phi - h."""
    state, values = _relative_state(ref, phi)
    return _velocity_from(ref, state, values)


def _dirichlet_from(state, v):
    n = state.config.n
    density = d_ds(v, state.grid) ** 2
    if n > 1:
        density = density * state.form.b ** (n - 1)
    return average(density, state.config)


def dirichlet(state, v):
    """Average of i dv /\\ dbar(v) wedge metric^(n-1); nonnegative."""
    return _dirichlet_from(state, v)


def identity_residual(ref, phi, e1_coeffs=None):
    """E1 - 2 K-energy - Dirichlet(velocity); independent of phi.

    Its common value is the reference constant relating the two energies.
    """
    state, values = _relative_state(ref, phi)
    e1 = _e1_energy_from(ref, state, values, e1_coeffs)
    nu = _k_energy_from(ref, state, values)
    dir_term = _dirichlet_from(state, _velocity_from(ref, state, values))
    return e1 - 2.0 * nu - dir_term


def futaki(ref):
    """Futaki invariant paired with the radial holomorphic generator.

    The generator acts on chart functions as d/ds, so the invariant is the
    average of d_ds h against the reference volume. Independent of which
    metric in the class plays the reference role.
    """
    return average(d_ds(ref.potential.h, ref.grid) * ref.density, ref.config)


def futaki_of_state(state):
    """Futaki invariant computed from an arbitrary positive state."""
    n = state.config.n
    potential = ricci_potential(state)
    density = wedge_density([(state.form, n)], n)
    return average(d_ds(potential.h, state.grid) * density, state.config)


def evaluate(ref, phi, e1_coeffs=None):
    """All functionals at one potential, sharing a single state build."""
    state, values = _relative_state(ref, phi)
    j_grad, j_mixed = _j_energy_from(ref, state, values)
    nu = _k_energy_from(ref, state, values)
    e1 = _e1_energy_from(ref, state, values, e1_coeffs)
    dir_term = _dirichlet_from(state, _velocity_from(ref, state, values))
    return FunctionalReport(
        j=j_grad,
        j_mixed=j_mixed,
        nu=nu,
        e1=e1,
        dirichlet=dir_term,
        residual=e1 - 2.0 * nu - dir_term,
        c0=ref.c0,
        c1=ref.c1,
    )
