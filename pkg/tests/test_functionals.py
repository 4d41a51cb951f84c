import dataclasses

import numpy as np
import pytest

from krflow.calculus import build_grid, d_ds
from krflow.errors import ExpressionMismatch, NotInPotentialSpace
from krflow.functionals import (
    _j_energy_from,
    _relative_state,
    dirichlet,
    e1_coefficients,
    e1_energy,
    evaluate,
    flow_velocity,
    futaki,
    futaki_of_state,
    identity_residual,
    j_energy,
    k_energy,
    k_energy_coefficients,
    make_reference,
    mixed_sum,
    re_reference,
    ricci_potential,
)
from krflow.geometry import (
    ManifoldConfig,
    RadialPotential,
    average,
    laplacian,
    make_state,
    sample_admissible,
    scalar_curvature,
    wedge_density,
)

ZERO = RadialPotential((0.0,))


def gauss_path_integral(func, nodes=32):
    """Integral over t in [0,1] of func(t) by Gauss-Legendre quadrature."""
    points, weights = np.polynomial.legendre.leggauss(nodes)
    t = 0.5 * (points + 1.0)
    return 0.5 * sum(w * func(ti) for w, ti in zip(weights, t))


def test_coefficient_systems():
    assert list(k_energy_coefficients(2)) == [2.0, -1.0, -1.0]
    assert list(k_energy_coefficients(3)) == [3.0, -1.0, -1.0, -1.0]
    assert list(e1_coefficients(1)) == [0.0, 0.0]
    assert list(e1_coefficients(2)) == [1.0, 1.0, -2.0]
    assert list(e1_coefficients(3)) == [2.0, 2.0, -2.0, -2.0]
    for n in (1, 2, 3):
        assert sum(k_energy_coefficients(n)) == 0.0
        assert sum(e1_coefficients(n)) == 0.0


def test_ricci_potential_background(fs_ref1):
    assert np.abs(fs_ref1.potential.h).max() == 0.0
    assert fs_ref1.potential.c == 0.0
    assert fs_ref1.c0 == 0.0 and fs_ref1.c1 == 0.0


def test_ricci_potential_defining_equation():
    cfg = ManifoldConfig(n=2, grid=build_grid(1024))
    state = make_state(cfg, RadialPotential((0.0, 0.2, 0.1)))
    potential = ricci_potential(state)
    defect = d_ds(potential.h, cfg.grid) - (state.ricci.b - state.form.b)
    assert np.abs(defect).max() <= 1e-6


def test_ricci_potential_normalization(bent_ref1):
    state = bent_ref1.state
    cfg = state.config
    value = average((np.exp(bent_ref1.potential.h) - 1.0) * bent_ref1.density, cfg)
    assert abs(value) <= 1e-10


def test_ricci_potential_rejects_bad_endpoints(bent_ref1):
    state = bent_ref1.state
    from krflow.geometry import RadialForm
    doctored = dataclasses.replace(
        state, ricci=RadialForm(a=state.ricci.a, b=state.ricci.b + 1.0))
    with pytest.raises(NotInPotentialSpace):
        ricci_potential(doctored)


def test_j_energy_zero_and_constant(fs_ref1):
    assert j_energy(fs_ref1, ZERO) == 0.0
    assert abs(j_energy(fs_ref1, RadialPotential((1.3,)))) <= 1e-12


def test_j_energy_closed_form():
    cfg = ManifoldConfig(n=1, grid=build_grid(1024))
    ref = make_reference(make_state(cfg, ZERO))
    for eps in (0.1, 0.3):
        assert j_energy(ref, RadialPotential((0.0, eps))) == \
            pytest.approx(eps ** 2 / 24.0, abs=1e-7)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_j_energy_expressions_agree_and_nonnegative(n, rng):
    cfg = ManifoldConfig(n=n, grid=build_grid(512))
    from krflow.functionals import fubini_study_reference
    ref = fubini_study_reference(cfg)
    for phi in sample_admissible(cfg, rng, 5):
        report = evaluate(ref, phi)
        assert abs(report.j - report.j_mixed) <= 1e-6 * (1.0 + abs(report.j))
        assert report.j >= -1e-12


def test_j_energy_mismatch_raises(fs_ref1, rng):
    phi = sample_admissible(fs_ref1.config, rng, 1)[0]
    state, values = _relative_state(fs_ref1, phi)
    with pytest.raises(ExpressionMismatch):
        _j_energy_from(fs_ref1, state, values, rel_tol=1e-18)


def test_k_energy_zero_and_constant(fs_ref1, bent_ref1):
    for ref in (fs_ref1, bent_ref1):
        assert k_energy(ref, ZERO) == 0.0
        assert abs(k_energy(ref, RadialPotential((0.8,)))) <= 1e-8


def test_k_energy_path_integral_oracle():
    # nu(phi) equals the integral of its derivative along phi_t = t phi
    cfg = ManifoldConfig(n=1, grid=build_grid(512))
    from krflow.functionals import fubini_study_reference
    ref = fubini_study_reference(cfg)
    phi = RadialPotential((0.0, 0.2))
    xi = phi.values(cfg.grid)
    n = cfg.n

    def derivative(t):
        state = make_state(cfg, phi.scaled(t))
        density = wedge_density([(state.form, n)], n)
        return -0.5 * average(xi * (scalar_curvature(state) - 2.0 * n) * density, cfg)

    oracle = gauss_path_integral(derivative)
    assert k_energy(ref, phi) == pytest.approx(oracle, abs=1e-5)


def test_k_energy_synthetic_matches_direct_display(fs_ref2, rng):
    # the display with +phi inside the entropy term and the plain mixed sum
    cfg = fs_ref2.config
    n = cfg.n
    for phi in sample_admissible(cfg, rng, 3):
        state, values = _relative_state(fs_ref2, phi)
        density = wedge_density([(state.form, n)], n)
        log_rel = state.log_density - fs_ref2.state.log_density
        entropy = average((log_rel + values - fs_ref2.potential.h) * density, cfg)
        mixed = mixed_sum(fs_ref2, phi, np.ones(n + 1))
        direct = entropy - mixed + fs_ref2.c0
        assert k_energy(fs_ref2, phi) == pytest.approx(direct, abs=1e-7)


def test_e1_energy_zero_and_constant(fs_ref2, bent_ref2):
    for ref in (fs_ref2, bent_ref2):
        assert e1_energy(ref, ZERO) == 0.0
        assert abs(e1_energy(ref, RadialPotential((-0.4,)))) <= 1e-8


def test_e1_energy_path_integral_oracle():
    cfg = ManifoldConfig(n=2, grid=build_grid(512))
    from krflow.functionals import fubini_study_reference
    ref = fubini_study_reference(cfg)
    phi = RadialPotential((0.0, 0.2))
    xi = phi.values(cfg.grid)
    n = cfg.n

    def derivative(t):
        state = make_state(cfg, phi.scaled(t))
        lap = laplacian(state, xi)
        ric_wedge = wedge_density([(state.ricci, 1), (state.form, n - 1)], n)
        value = average(lap * ric_wedge, cfg)
        ric_sq = wedge_density([(state.ricci, 2), (state.form, n - 2)], n)
        full = wedge_density([(state.form, n)], n)
        value -= (n - 1) * average(xi * (ric_sq - full), cfg)
        return value

    oracle = gauss_path_integral(derivative)
    assert e1_energy(ref, phi) == pytest.approx(oracle, abs=1e-5)


def test_flow_velocity_fixed_point(fs_ref1):
    v = flow_velocity(fs_ref1, ZERO)
    assert np.abs(v).max() == 0.0


def test_flow_velocity_constant_shift(fs_ref1):
    v = flow_velocity(fs_ref1, RadialPotential((0.9,)))
    assert np.abs(v - 0.9).max() <= 1e-11


def test_flow_velocity_profile_identity(bent_ref2, rng):
    cfg = bent_ref2.config
    phi = sample_admissible(cfg, rng, 1, base=bent_ref2.state)[0]
    from krflow.geometry import state_from
    state = state_from(bent_ref2.state, phi)
    v = flow_velocity(bent_ref2, phi)
    defect = d_ds(v, cfg.grid) - (state.form.b - state.ricci.b)
    assert np.abs(defect).max() <= 1e-6


def test_dirichlet_values(fs_ref1):
    g = fs_ref1.grid
    assert dirichlet(fs_ref1.state, np.full(g.size + 1, 2.0)) == 0.0
    # background n=1, v = x: average of (x(1-x))^2 /(x(1-x)) over volume 2
    assert dirichlet(fs_ref1.state, g.x.copy()) == pytest.approx(1.0 / 12.0, abs=1e-12)


def test_dirichlet_nonnegative(fs_ref2, rng):
    for phi in sample_admissible(fs_ref2.config, rng, 5):
        state = make_state(fs_ref2.config, phi)
        v = flow_velocity(fs_ref2, phi)
        assert dirichlet(state, v) >= 0.0


def test_identity_residual_at_zero(fs_ref1, bent_ref1):
    assert identity_residual(fs_ref1, ZERO) == 0.0
    res = identity_residual(bent_ref1, ZERO)
    expected = -dirichlet(bent_ref1.state, -bent_ref1.potential.h)
    assert res == pytest.approx(expected, abs=1e-15)
    assert res <= 0.0


def test_identity_residual_constancy(fs_ref1, rng):
    cfg = fs_ref1.config
    residuals = [identity_residual(fs_ref1, ZERO)]
    residuals += [identity_residual(fs_ref1, phi)
                  for phi in sample_admissible(cfg, rng, 6)]
    assert max(residuals) - min(residuals) <= 1e-5


def test_futaki_background_exactly_zero(fs_ref1, fs_ref2):
    assert futaki(fs_ref1) == 0.0
    assert futaki(fs_ref2) == 0.0


@pytest.mark.parametrize("n", [1, 2])
def test_futaki_vanishes_and_reference_independent(n, rng):
    cfg = ManifoldConfig(n=n, grid=build_grid(512))
    values = []
    for psi in sample_admissible(cfg, rng, 3):
        values.append(futaki_of_state(make_state(cfg, psi)))
    assert max(abs(v) for v in values) <= 1e-6
    assert max(abs(a - b) for a in values for b in values) <= 1e-6


def test_re_reference_identity(fs_ref1, rng):
    same = re_reference(fs_ref1, ZERO)
    phi = sample_admissible(fs_ref1.config, rng, 1)[0]
    assert j_energy(same, phi) == pytest.approx(j_energy(fs_ref1, phi), abs=1e-14)
    assert k_energy(same, phi) == pytest.approx(k_energy(fs_ref1, phi), abs=1e-14)
    assert e1_energy(same, phi) == pytest.approx(e1_energy(fs_ref1, phi), abs=1e-14)


@pytest.mark.parametrize("n", [1, 2])
def test_cocycle_nu_e1(n, rng):
    cfg = ManifoldConfig(n=n, grid=build_grid(512))
    from krflow.functionals import fubini_study_reference
    ref = fubini_study_reference(cfg)
    p1, p2 = sample_admissible(cfg, rng, 2, coeff_bound=0.2)
    ref1 = re_reference(ref, p1)
    for f in (k_energy, e1_energy):
        total = f(ref, p2)
        split = f(ref, p1) + f(ref1, p2 - p1)
        scale = max(abs(total), abs(split))
        assert abs(total - split) <= 1e-6 * (1.0 + scale)


def test_mixed_sum_constant_telescoping(fs_ref2):
    const = RadialPotential((0.6,))
    n = fs_ref2.config.n
    assert abs(mixed_sum(fs_ref2, const, k_energy_coefficients(n))) <= 1e-8
    assert abs(mixed_sum(fs_ref2, const, e1_coefficients(n))) <= 1e-8


def test_mixed_sum_coefficient_length(fs_ref2):
    with pytest.raises(ValueError):
        mixed_sum(fs_ref2, ZERO, np.ones(5))


def test_mixed_sum_all_ones_derivative(fs_ref2, rng):
    # d/dt of the (n+1)-normalized all-ones mixed sum is the average of the
    # velocity against the evolved volume
    cfg = fs_ref2.config
    n = cfg.n
    phi = sample_admissible(cfg, rng, 1)[0]
    xi = RadialPotential(rng.uniform(-0.2, 0.2, 9))
    dt = 1e-4
    ones = np.ones(n + 1)
    lhs = (mixed_sum(fs_ref2, phi + xi.scaled(dt), ones)
           - mixed_sum(fs_ref2, phi + xi.scaled(-dt), ones)) / (2.0 * dt)
    state = make_state(cfg, phi)
    rhs = average(xi.values(cfg.grid) * wedge_density([(state.form, n)], n), cfg)
    assert abs(lhs - rhs) <= 1e-5 * (1.0 + abs(rhs))


def test_shift_invariance(fs_ref2, rng):
    phi = sample_admissible(fs_ref2.config, rng, 1)[0]
    shifted = phi + RadialPotential((5.0,))
    assert abs(j_energy(fs_ref2, shifted) - j_energy(fs_ref2, phi)) <= 1e-8
    assert abs(k_energy(fs_ref2, shifted) - k_energy(fs_ref2, phi)) <= 1e-8
    assert abs(e1_energy(fs_ref2, shifted) - e1_energy(fs_ref2, phi)) <= 1e-8
    assert abs(identity_residual(fs_ref2, shifted)
               - identity_residual(fs_ref2, phi)) <= 1e-8


def test_evaluate_report(fs_ref1, rng):
    phi = sample_admissible(fs_ref1.config, rng, 1)[0]
    report = evaluate(fs_ref1, phi)
    assert report.j >= 0.0
    assert report.dirichlet >= 0.0
    assert report.residual == pytest.approx(
        report.e1 - 2.0 * report.nu - report.dirichlet, abs=1e-15)
    assert report.c0 == fs_ref1.c0 and report.c1 == fs_ref1.c1
