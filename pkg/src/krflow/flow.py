"""Potential-form Ricci flow dphi/dt = log(volume ratio) + phi - h.

The method-of-lines system is integrated with classical explicit RK4 on the
nodal values. Step control is adaptive: a step that leaves the positive cone
is rejected and retried at half the size, and after streaks of accepted
steps the size grows again, always capped by a spectral estimate of the
explicit stability limit (the reduced problem is stiff like a 1D diffusion
equation, so the cap, not accuracy, sets the step).

Potentials would drift by an exponentially growing constant along the flow
(the +phi term integrates the spatially constant mode). Every recorded
functional is shift invariant, so the drift is pure gauge; ``run`` re-zeroes
the midpoint value after each step because the drifted constant's stencil
roundoff would otherwise contaminate the curvature columns of long traces.
"""

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import ConfigError, FlowAborted, StepRejected
from .functionals import (
    _dirichlet_from,
    _e1_energy_from,
    _k_energy_from,
    _velocity_from,
    fubini_study_reference,
    futaki_of_state,
    identity_residual,
    make_reference,
)
from .geometry import (
    ManifoldConfig,
    RadialPotential,
    ZERO_POTENTIAL,
    _potential_values,
    make_state,
    scalar_curvature,
    state_from_total,
)

TRACE_COLUMNS = ("t", "nu", "e1", "dirichlet", "residual",
                 "scal_min", "scal_max", "futaki", "min_Ahat", "min_Bhat")


@dataclass
class FlowConfig:
    """Flow run parameters.

    ``initial`` and the optional ``reference`` are potentials relative to the
    background; ``dt_init`` defaults to 1e-4 (2048/N)^2 and is additionally
    capped by the stability estimate. ``representation`` is "nodal" (default)
    or "polynomial" (least-squares refit of degree ``fit_degree`` after every
    accepted step).
    """

    manifold: ManifoldConfig
    initial: object
    t_max: float
    dt_init: float | None = None
    dt_safety: float = 0.9
    record_every: int = 200
    reference: object | None = None
    representation: str = "nodal"
    fit_degree: int = 8
    max_halvings: int = 60
    grow_streak: int = 16
    stability_cap: bool = True  # cap dt by the spectral estimate; halving-on-rejection still applies
    gauge_fix: bool = True  # re-zero the potential's midpoint value after each step

    def __post_init__(self):
        if not self.t_max > 0.0:
            raise ConfigError(f"t_max must be positive, got {self.t_max}")
        if self.dt_init is not None and not self.dt_init > 0.0:
            raise ConfigError(f"dt_init must be positive, got {self.dt_init}")
        if not 0.0 < self.dt_safety <= 1.0:
            raise ConfigError(f"dt_safety must lie in (0, 1], got {self.dt_safety}")
        if self.record_every < 1:
            raise ConfigError(f"record_every must be >= 1, got {self.record_every}")
        if self.representation not in ("nodal", "polynomial"):
            raise ConfigError(f"unknown representation {self.representation!r}")


@dataclass(frozen=True)
class FlowRecord:
    t: float
    nu: float
    e1: float
    dirichlet: float
    residual: float
    scal_min: float
    scal_max: float
    futaki: float
    min_ahat: float
    min_bhat: float

    def row(self):
        return (self.t, self.nu, self.e1, self.dirichlet, self.residual,
                self.scal_min, self.scal_max, self.futaki, self.min_ahat, self.min_bhat)


@dataclass
class FlowTrace:
    """Time series of functional records along one flow run."""

    records: list = field(default_factory=list)
    c_omega: float = 0.0
    accepted: int = 0
    rejected: int = 0

    def residual_deviation(self):
        return max(abs(rec.residual - self.c_omega) for rec in self.records)

    def nu_violation(self):
        """Largest relative increase of the K-energy between consecutive
        records, (nu_next - nu) / (1 + |nu|); <= 0 means monotone."""
        if len(self.records) < 2:
            return 0.0
        return max((cur.nu - prev.nu) / (1.0 + abs(prev.nu))
                   for prev, cur in zip(self.records, self.records[1:]))

    def inequality_margin(self):
        """min over records of E1 - 2 nu - C; >= 0 up to rounding."""
        return min(rec.e1 - 2.0 * rec.nu - self.c_omega for rec in self.records)

    def min_positivity(self):
        return min(min(rec.min_ahat, rec.min_bhat) for rec in self.records)


def default_dt_init(grid):
    return 1e-4 * (2048.0 / grid.size) ** 2


def _stable_dt(config, r, q):
    """Explicit RK4 stability cap from a frozen-coefficient symbol bound.

    Diffusion coefficient in x is x(1-x)/r; 1.9/dx^2 bounds the squared
    symbol of the composed first-derivative stencils, 1.4/dx the first-order
    part, +2 covers the zero-order term.
    """
    g = config.grid
    n = config.n
    diff = float((g.xm / r).max())
    conv = float((np.abs(1.0 - 2.0 * g.x) / r).max())
    if n > 1:
        conv += float(((n - 1) * g.omx / q).max())
    lam = 1.9 * diff / (g.dx * g.dx) + 1.4 * conv / g.dx + 2.0
    return 2.5 / lam


def _shift_profile(ref):
    return ref.state.log_density + ref.state.phi_total + ref.potential.h


def _refit(values, grid, degree):
    coeffs = np.polynomial.polynomial.polyfit(grid.x, values, degree)
    return np.polynomial.polynomial.polyval(grid.x, coeffs)


def step(ref, phi, dt, representation="nodal", fit_degree=8):
    """One explicit RK4 step from the relative potential ``phi``.

    Raises StepRejected when any stage or the result leaves the positive
    cone; the caller is expected to halve dt and retry. Returns the updated
    relative potential (nodal array, or RadialPotential when the polynomial
    representation is requested).
    """
    g = ref.grid
    values = _potential_values(phi, g)
    total = ref.state.phi_total + values
    new_total, ok = _kernels.rk4_step(total, dt, _shift_profile(ref),
                                      g.x, g.xm, g.omx, g.dx, ref.config.n)
    if not ok:
        raise StepRejected(f"positivity lost at dt = {dt:.3e}")
    rel = new_total - ref.state.phi_total
    if representation == "polynomial":
        coeffs = np.polynomial.polynomial.polyfit(g.x, rel, fit_degree)
        return RadialPotential(coeffs, max_degree=fit_degree)
    return rel


def _record(ref, config, phi_total, t):
    state = state_from_total(config, phi_total)
    rel = phi_total - ref.state.phi_total
    nu = _k_energy_from(ref, state, rel)
    e1 = _e1_energy_from(ref, state, rel)
    dir_term = _dirichlet_from(state, _velocity_from(ref, state, rel))
    scal = scalar_curvature(state)
    return FlowRecord(
        t=t,
        nu=nu,
        e1=e1,
        dirichlet=dir_term,
        residual=e1 - 2.0 * nu - dir_term,
        scal_min=float(scal.min()),
        scal_max=float(scal.max()),
        futaki=futaki_of_state(state),
        min_ahat=float(state.ahat.min()),
        min_bhat=float(state.bhat.min()),
    )


def run(config):
    """Integrate to t_max, recording functionals every ``record_every``
    accepted steps (plus the initial and final states)."""
    manifold = config.manifold
    g = manifold.grid
    n = manifold.n
    if config.reference is None:
        ref = fubini_study_reference(manifold)
    else:
        ref = make_reference(make_state(manifold, config.reference))
    shift = _shift_profile(ref)
    phi_total = ref.state.phi_total + _potential_values(config.initial, g)
    state = state_from_total(manifold, phi_total)  # validates the initial data

    trace = FlowTrace(c_omega=c_omega_estimate(ref))
    trace.records.append(_record(ref, manifold, phi_total, 0.0))

    cap = _stable_dt(manifold, state.r, state.q) if config.stability_cap else np.inf
    dt = min(config.dt_init if config.dt_init is not None else default_dt_init(g), cap)
    t = 0.0
    streak = 0
    halvings = 0
    t_end = config.t_max * (1.0 - 1e-12)
    while t < t_end:
        dt_step = min(dt, config.t_max - t)
        new_total, ok = _kernels.rk4_step(phi_total, dt_step, shift,
                                          g.x, g.xm, g.omx, g.dx, n)
        if not ok:
            trace.rejected += 1
            halvings += 1
            dt = 0.5 * dt_step
            streak = 0
            if halvings > config.max_halvings or dt < 1e-14:
                raise FlowAborted(
                    f"dt underflow at t = {t:.6g} after {halvings} consecutive halvings")
            continue
        halvings = 0
        if config.gauge_fix:
            # the constant mode grows like e^t and is pure gauge (every
            # recorded functional is shift invariant); left alone it reaches
            # ~1e3 by t ~ 10 and its stencil roundoff pollutes the
            # derivative-heavy record columns
            new_total = new_total - (new_total[g.size // 2] - ref.state.phi_total[g.size // 2])
        if config.representation == "polynomial":
            rel = _refit(new_total - ref.state.phi_total, g, config.fit_degree)
            new_total = ref.state.phi_total + rel
        phi_total = new_total
        t += dt_step
        trace.accepted += 1
        streak += 1
        if streak >= config.grow_streak:
            streak = 0
            if config.stability_cap:
                u = _kernels.d_dx(phi_total, g.dx)
                r = _kernels.d_dx(u * g.xm + (n + 1.0) * g.x, g.dx)
                cap = _stable_dt(manifold, r, (n + 1.0) + g.omx * u)
            dt = min(dt / config.dt_safety, cap)
        if trace.accepted % config.record_every == 0:
            trace.records.append(_record(ref, manifold, phi_total, t))
    if trace.records[-1].t < t:
        trace.records.append(_record(ref, manifold, phi_total, t))
    return trace


def c_omega_estimate(ref):
    """The reference constant, measured as the identity residual at phi = 0.

    Equal (within discretization error) to the residual at any other
    potential and at any flow time.
    """
    return identity_residual(ref, ZERO_POTENTIAL)
