"""Command-line interface: verify / flow / eval.

Configuration files are INI-style (key-value entries inside named sections);
unknown sections or keys are rejected. Exit codes: 0 pass, 1 check or flow
failure, 2 configuration error. Outputs are byte-identical for identical
configs and seeds.
"""

import argparse
import configparser
import sys
from importlib import resources

import numpy as np

from .calculus import build_grid
from .errors import FlowAborted, KrflowError, NotInPotentialSpace, ConfigError
from .flow import FlowConfig, TRACE_COLUMNS, run
from .functionals import evaluate, fubini_study_reference, futaki, make_reference
from .geometry import ManifoldConfig, RadialPotential, make_state, sample_admissible
from .verification import SuiteConfig, run_suite

_SCHEMA = {
    "run": {"n", "grid_size"},
    "reference": {"coeffs"},
    "potential": {"coeffs", "random", "seed", "rho", "degree"},
    "flow": {"t_max", "dt_init", "dt_safety", "record_every", "representation",
             "fit_degree"},
    "suite": {"seed", "samples", "fd_pairs", "fd_dt", "flow_grid", "flow_t_max",
              "flow_record_every", "reference_coeffs", "rho", "degree"},
    "tolerances": None,  # any known tolerance name; validated separately
    "mutation": {"b1_offset", "h_norm_offset"},
    "output": {"report"},
}


def _fmt(value):
    return f"{value:.17g}"


def _parse_coeffs(text):
    return tuple(float(part) for part in text.replace(",", " ").split())


def load_config(path):
    """Parse and validate an INI config; raises ConfigError on any problem."""
    from .verification import DEFAULT_TOLERANCES

    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise ConfigError(f"cannot read config file {path}")
    for section in parser.sections():
        if section not in _SCHEMA:
            raise ConfigError(f"unknown config section [{section}]")
        allowed = _SCHEMA[section]
        for key in parser[section]:
            if allowed is None:
                if key not in DEFAULT_TOLERANCES:
                    raise ConfigError(f"unknown tolerance {key!r}")
            elif key not in allowed:
                raise ConfigError(f"unknown key {key!r} in section [{section}]")
    return parser


def _manifold(parser):
    run_sec = parser["run"] if parser.has_section("run") else {}
    n = int(run_sec.get("n", 1))
    grid_size = int(run_sec.get("grid_size", 1024))
    return ManifoldConfig(n=n, grid=build_grid(grid_size))


def _reference_potential(parser):
    if parser.has_section("reference") and parser["reference"].get("coeffs"):
        return RadialPotential(_parse_coeffs(parser["reference"]["coeffs"]))
    return None


def _potential(parser, manifold):
    sec = parser["potential"] if parser.has_section("potential") else {}
    if str(sec.get("random", "false")).lower() in ("1", "true", "yes"):
        rng = np.random.default_rng(int(sec.get("seed", 0)))
        return sample_admissible(
            manifold, rng, 1,
            coeff_bound=float(sec.get("rho", 0.3)),
            degree=int(sec.get("degree", 8)))[0]
    coeffs = _parse_coeffs(sec.get("coeffs", "0"))
    return RadialPotential(coeffs)


def _suite_config(parser, manifold):
    sec = dict(parser["suite"]) if parser.has_section("suite") else {}
    tolerances = {}
    if parser.has_section("tolerances"):
        tolerances = {k: float(v) for k, v in parser["tolerances"].items()}
    mutation = parser["mutation"] if parser.has_section("mutation") else {}
    reference_coeffs = (0.0, 0.2, 0.1)
    if sec.get("reference_coeffs"):
        reference_coeffs = _parse_coeffs(sec["reference_coeffs"])
    return SuiteConfig(
        n=manifold.n,
        grid_size=manifold.grid.size,
        seed=int(sec.get("seed", 20240901)),
        samples=int(sec.get("samples", 20)),
        fd_pairs=int(sec.get("fd_pairs", 5)),
        fd_dt=float(sec.get("fd_dt", 1e-4)),
        coeff_bound=float(sec.get("rho", 0.3)),
        degree=int(sec.get("degree", 8)),
        reference_coeffs=reference_coeffs,
        flow_grid=int(sec.get("flow_grid", 512)),
        flow_t_max=float(sec.get("flow_t_max", 0.5)),
        flow_record_every=int(sec.get("flow_record_every", 100)),
        tolerances=tolerances,
        b1_offset=float(mutation.get("b1_offset", 0.0)),
        h_norm_offset=float(mutation.get("h_norm_offset", 0.0)),
    )


def default_config_path():
    """Path of the bundled verification config."""
    return resources.files("krflow") / "configs" / "verify_default.ini"


def cmd_verify(config_path):
    """Run the verification suite; exit 0 iff every check passes."""
    parser = load_config(config_path)
    manifold = _manifold(parser)
    suite_config = _suite_config(parser, manifold)
    report = run_suite(suite_config)
    text = report.to_text()
    sys.stdout.write(text)
    if parser.has_section("output") and parser["output"].get("report"):
        with open(parser["output"]["report"], "w") as fh:
            fh.write(text)
    return 0 if report.passed else 1


def _trace_lines(trace):
    yield ",".join(TRACE_COLUMNS)
    for rec in trace.records:
        yield ",".join(_fmt(v) for v in rec.row())


def _summary_lines(trace):
    dev = trace.residual_deviation()
    dev_tol = 1e-5 * (1.0 + abs(trace.c_omega))
    nu_viol = max(0.0, trace.nu_violation())
    margin = trace.inequality_margin()
    monotone_ok = nu_viol <= 1e-8
    residual_ok = dev <= dev_tol
    inequality_ok = margin >= -1e-8
    yield f"# c_omega = {_fmt(trace.c_omega)}"
    yield f"# max_residual_deviation = {_fmt(dev)} (tolerance {_fmt(dev_tol)}): " \
          + ("PASS" if residual_ok else "FAIL")
    yield f"# nu_monotone_violation = {_fmt(nu_viol)} (tolerance 1e-08): " \
          + ("PASS" if monotone_ok else "FAIL")
    yield f"# inequality_margin = {_fmt(margin)} (floor -1e-08): " \
          + ("PASS" if inequality_ok else "FAIL")
    yield f"# steps_accepted = {trace.accepted}, steps_rejected = {trace.rejected}"


def cmd_flow(config_path, out_path):
    """Run the flow, write the trace plus a summary block; exit 1 when the
    flow aborts or the inequality verdict fails."""
    parser = load_config(config_path)
    manifold = _manifold(parser)
    sec = parser["flow"] if parser.has_section("flow") else {}
    flow_config = FlowConfig(
        manifold=manifold,
        initial=_potential(parser, manifold),
        t_max=float(sec.get("t_max", 1.0)),
        dt_init=float(sec["dt_init"]) if sec.get("dt_init") else None,
        dt_safety=float(sec.get("dt_safety", 0.9)),
        record_every=int(sec.get("record_every", 200)),
        reference=_reference_potential(parser),
        representation=sec.get("representation", "nodal"),
        fit_degree=int(sec.get("fit_degree", 8)),
    )
    try:
        trace = run(flow_config)
    except FlowAborted as exc:
        print(f"flow aborted: {exc}", file=sys.stderr)
        return 1
    with open(out_path, "w") as fh:
        for line in _trace_lines(trace):
            fh.write(line + "\n")
        for line in _summary_lines(trace):
            fh.write(line + "\n")
    return 0 if trace.inequality_margin() >= -1e-8 else 1


def cmd_eval(config_path, phi_text):
    """Print the functional report for one potential; exit 1 when the
    potential is not in the admissible cone."""
    parser = load_config(config_path)
    manifold = _manifold(parser)
    reference = _reference_potential(parser)
    if reference is None:
        ref = fubini_study_reference(manifold)
    else:
        ref = make_reference(make_state(manifold, reference))
    phi = RadialPotential(_parse_coeffs(phi_text))
    try:
        report = evaluate(ref, phi)
    except NotInPotentialSpace as exc:
        print(f"NotInPotentialSpace: {exc}", file=sys.stderr)
        return 1
    for name, value in (
        ("j", report.j),
        ("j_mixed", report.j_mixed),
        ("nu", report.nu),
        ("e1", report.e1),
        ("dirichlet", report.dirichlet),
        ("residual", report.residual),
        ("futaki", futaki(ref)),
        ("c0", report.c0),
        ("c1", report.c1),
    ):
        print(f"{name},{_fmt(value)}")
    return 0


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="krflow",
        description="Energy functionals and Ricci flow on rotationally "
                    "symmetric metrics over CP^n")
    sub = parser.add_subparsers(dest="command", required=True)

    p_verify = sub.add_parser("verify", help="run the verification suite")
    p_verify.add_argument("--config", default=None,
                          help="INI config (defaults to the bundled one)")

    p_flow = sub.add_parser("flow", help="integrate the flow and write a trace")
    p_flow.add_argument("--config", required=True)
    p_flow.add_argument("--out", required=True)

    p_eval = sub.add_parser("eval", help="evaluate the functionals at a potential")
    p_eval.add_argument("--config", required=True)
    p_eval.add_argument("--phi", required=True,
                        help="comma-separated polynomial coefficients, low degree first")

    args = parser.parse_args(argv)
    try:
        if args.command == "verify":
            config = args.config if args.config is not None else str(default_config_path())
            return cmd_verify(config)
        if args.command == "flow":
            return cmd_flow(args.config, args.out)
        if args.command == "eval":
            return cmd_eval(args.config, args.phi)
    except (ConfigError, ValueError, OSError, configparser.Error) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except KrflowError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    raise AssertionError("unreachable")


if __name__ == "__main__":
    sys.exit(main())
