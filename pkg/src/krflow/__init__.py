"""Numerical laboratory for canonical-class energy functionals and the
potential-form Ricci flow on rotationally symmetric metrics over CP^n."""

from ._kernels import backend_name as kernel_backend
from .calculus import Grid, build_grid, d_dx, d_ds, integrate_ds
from .errors import (
    ConfigError,
    DivergentIntegrand,
    ExpressionMismatch,
    FlowAborted,
    KrflowError,
    NotInPotentialSpace,
    StepRejected,
)
from .flow import FlowConfig, FlowTrace, c_omega_estimate, run, step
from .functionals import (
    FunctionalReport,
    Reference,
    RicciPotential,
    dirichlet,
    e1_energy,
    evaluate,
    flow_velocity,
    fubini_study_reference,
    futaki,
    identity_residual,
    j_energy,
    k_energy,
    make_reference,
    mixed_sum,
    re_reference,
    ricci_potential,
)
from .geometry import (
    ManifoldConfig,
    MetricState,
    RadialForm,
    RadialPotential,
    average,
    background,
    gradient_pairing,
    laplacian,
    make_state,
    sample_admissible,
    scalar_curvature,
    wedge_density,
)
from .verification import (
    SuiteConfig,
    SuiteReport,
    VariationalCheck,
    cocycle_check,
    run_suite,
    variational_check,
)

__version__ = "0.1.0"

__all__ = [
    "ConfigError", "DivergentIntegrand", "ExpressionMismatch", "FlowAborted",
    "FlowConfig", "FlowTrace", "FunctionalReport", "Grid", "KrflowError",
    "ManifoldConfig", "MetricState", "NotInPotentialSpace", "RadialForm",
    "RadialPotential", "Reference", "RicciPotential", "StepRejected",
    "SuiteConfig", "SuiteReport", "VariationalCheck", "average", "background",
    "build_grid", "c_omega_estimate", "cocycle_check", "d_dx", "d_ds",
    "dirichlet", "e1_energy", "evaluate", "flow_velocity",
    "fubini_study_reference", "futaki", "gradient_pairing",
    "identity_residual", "integrate_ds", "j_energy", "k_energy",
    "kernel_backend", "laplacian", "make_reference", "make_state",
    "mixed_sum", "re_reference", "ricci_potential", "run", "run_suite",
    "sample_admissible", "scalar_curvature", "step", "variational_check",
    "wedge_density",
]
