import numpy as np
import pytest

from krflow.calculus import build_grid
from krflow.functionals import fubini_study_reference
from krflow.geometry import ManifoldConfig, RadialPotential, sample_admissible
from krflow.verification import (
    IDENTITIES,
    SuiteConfig,
    VariationalCheck,
    cocycle_check,
    run_suite,
    variational_check,
)

ZERO = RadialPotential((0.0,))


def test_rel_err_normalization():
    check = VariationalCheck(identity="DER_JFUNC", lhs=2.0, rhs=1.0, dt=1e-4)
    assert check.rel_err == pytest.approx(1.0 / 3.0)


def test_der_kenerg_critical_point(fs_ref1, rng):
    direction = RadialPotential(rng.uniform(-0.3, 0.3, 9))
    check = variational_check("DER_KENERG", fs_ref1, ZERO, direction)
    assert check.rhs == 0.0
    assert abs(check.lhs) <= 1e-6


@pytest.mark.parametrize("n", [1, 2])
@pytest.mark.parametrize("identity", IDENTITIES)
def test_variational_identities_random(identity, n, rng):
    cfg = ManifoldConfig(n=n, grid=build_grid(512))
    ref = fubini_study_reference(cfg)
    for _ in range(2):
        base = sample_admissible(cfg, rng, 1)[0]
        direction = RadialPotential(rng.uniform(-0.3, 0.3, 9))
        check = variational_check(identity, ref, base, direction, dt=1e-4)
        assert check.rel_err <= 1e-5


def test_der_j1fun_degenerate_dimension(fs_ref1, rng):
    base = sample_admissible(fs_ref1.config, rng, 1)[0]
    direction = RadialPotential(rng.uniform(-0.3, 0.3, 9))
    check = variational_check("DER_J1FUN", fs_ref1, base, direction)
    assert check.lhs == 0.0 and check.rhs == 0.0
    assert check.rel_err == 0.0


def test_unknown_identity(fs_ref1):
    from krflow.errors import ConfigError
    with pytest.raises(ConfigError):
        variational_check("DER_BOGUS", fs_ref1, ZERO, ZERO)


def test_cocycle_trivial_cases(fs_ref1, rng):
    phi = sample_admissible(fs_ref1.config, rng, 1)[0]
    assert cocycle_check(fs_ref1, ZERO, ZERO, "nu") == 0.0
    assert cocycle_check(fs_ref1, phi, phi, "nu") <= 1e-8
    assert cocycle_check(fs_ref1, phi, phi, "e1") <= 1e-8


@pytest.mark.parametrize("functional", ["nu", "e1", "mixed_energy"])
def test_cocycle_random_pairs(fs_ref2, functional, rng):
    p1, p2 = sample_admissible(fs_ref2.config, rng, 2, coeff_bound=0.2)
    assert cocycle_check(fs_ref2, p1, p2, functional) <= 1e-6


def test_j_cocycle_defect_is_structural(fs_ref1, rng):
    # J satisfies the diagonal axiom but not the cocycle: the defect equals
    # the average of (phi2 - phi1) against the difference of volume forms
    # and is of order one for generic pairs.
    p1, p2 = sample_admissible(fs_ref1.config, rng, 2)
    assert cocycle_check(fs_ref1, p1, p1, "j") <= 1e-8
    assert cocycle_check(fs_ref1, p1, p2, "j") > 1e-4


def test_suite_default_passes():
    report = run_suite(SuiteConfig(n=1, grid_size=1024))
    failed = [e.name for e in report.entries if not e.passed]
    assert report.passed, f"failing checks: {failed}"


def test_suite_n2_passes():
    report = run_suite(SuiteConfig(n=2, grid_size=1024, samples=10, fd_pairs=3))
    failed = [e.name for e in report.entries if not e.passed]
    assert report.passed, f"failing checks: {failed}"


def test_suite_deterministic():
    config = SuiteConfig(n=1, grid_size=512, samples=6, fd_pairs=2,
                         tolerances={"scal_class_average": 1e-5})
    a = run_suite(config).to_text()
    b = run_suite(config).to_text()
    assert a == b


def test_suite_reports_have_expected_shape():
    report = run_suite(SuiteConfig(n=1, grid_size=512, samples=6, fd_pairs=2,
                                   tolerances={"scal_class_average": 1e-5}))
    for entry in report.entries:
        line = entry.line()
        name, status, value, tolerance = line.split(",")
        assert status in ("PASS", "FAIL")
        float(value), float(tolerance)


def test_suite_b1_mutation_detected():
    report = run_suite(SuiteConfig(n=1, grid_size=1024, samples=8, fd_pairs=3,
                                   b1_offset=0.1))
    failed = {e.name for e in report.entries if not e.passed}
    assert "der_e1" in failed
    assert "residual_constancy_background" in failed
    assert "residual_constancy_perturbed" in failed
    assert not report.passed


def test_suite_h_mutation_detected():
    report = run_suite(SuiteConfig(n=1, grid_size=1024, samples=8, fd_pairs=3,
                                   h_norm_offset=0.1))
    failed = {e.name for e in report.entries if not e.passed}
    assert failed == {"h_normalization"}


def test_tolerance_overrides():
    config = SuiteConfig(n=1, grid_size=512, tolerances={"der_e1": 1e-3})
    assert config.tolerance("der_e1") == 1e-3
    assert config.tolerance("der_jfunc") == 1e-5
    with pytest.raises(KeyError):
        config.tolerance("not_a_check")
