"""
spinrelax command line

    python -m spinrelax spectrum --eps-tilde 0.2 --eta 1 --theta 1 [--json]
    python -m spinrelax sweep --eps-tilde 0.2 --eta 1 --theta-max 3 --out sweep.csv --svg fig/e02
    python -m spinrelax bifurcations --eps-tilde 0 --eta 1 --theta-max 3
    python -m spinrelax verify --samples 100000 --seed 7 --suite prop1

Exit codes: 0 success, 1 verification failure, 2 invalid input, 3 I/O failure.
"""

import argparse
import contextlib
import json
import logging
import os
import sys
from typing import Iterator, Optional, TextIO

import scipy.constants
from pydantic import BaseModel, ConfigDict, ValidationError, model_validator

from spinrelax import config, reports
from spinrelax.core_model import SystemParams, build_bloch_matrix, characteristic_curve, weak_coupling_constants
from spinrelax.cubic_spectrum import analyze_spectrum
from spinrelax.errors import RangeError, SpinRelaxError
from spinrelax.lindblad_dynamics import (
    DensityState,
    commutator_closed_form,
    default_tau_max,
    integrate_master,
    superoperator_commutator_norm,
)
from spinrelax.sweep_bifurcation import (
    Trace,
    critical_epsilon,
    find_bifurcations,
    sweep_temperature,
    track_direction_jumps,
)
from spinrelax.verification import Suite, run_suites

logger = logging.getLogger("spinrelax")

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_INVALID = 2
EXIT_IO = 3

# Boltzmann constant in meV / K
K_B_MEV = scipy.constants.k / scipy.constants.e * 1e3


class VerificationFailed(Exception):
    pass


def _reason(exc: ValidationError) -> str:
    msg = exc.errors()[0]["msg"]
    return msg.removeprefix("Value error, ")


def physical_theta(kelvin: float, hbar_omega0_mev: float) -> float:
    """theta = k_B T / (hbar Omega0)."""
    if kelvin < 0.0 or hbar_omega0_mev <= 0.0:
        raise RangeError("need kelvin >= 0 and hbar-omega0 > 0")
    return K_B_MEV * kelvin / hbar_omega0_mev


# ============================================================================
# Run configuration
# ============================================================================

class RunConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    command: str
    eps_tilde: Optional[float] = None
    eta: float = 1.0
    theta: Optional[float] = None
    thetas: list[float] = []
    theta_min: float = 0.0
    theta_max: float = 3.0
    n_points: int = 400
    tol: float = config.BISECTION_TOL
    seed: int = 0
    samples: int = 1000
    suite: Suite = Suite.ALL
    trace: Optional[Trace] = None
    rho0: Optional[tuple[float, float, float]] = None
    tau_max: Optional[float] = None
    dt: Optional[float] = None
    stride: int = 100
    lam_min: float = -0.5
    lam_max: Optional[float] = None
    eps_min: float = 0.05
    eps_max: float = 0.95
    out: Optional[str] = None
    svg: Optional[str] = None
    as_json: bool = False
    quiet: bool = False

    @model_validator(mode="after")
    def _check(self) -> "RunConfig":
        try:
            if self.eps_tilde is not None:
                SystemParams(eps_tilde=self.eps_tilde, eta=self.eta, theta=self.theta or 0.0)
            for t in self.thetas:
                SystemParams(eps_tilde=self.eps_tilde or 0.0, eta=self.eta, theta=t)
            if self.rho0 is not None:
                DensityState.of(self.rho0)
        except ValidationError as e:
            raise ValueError(_reason(e)) from None
        if self.n_points < 2:
            raise ValueError("need at least 2 points")
        if not 0.0 <= self.theta_min < self.theta_max:
            raise ValueError("need 0 <= theta-min < theta-max")
        if not self.tol > 0.0:
            raise ValueError("tol must be > 0")
        if self.samples < 1:
            raise ValueError("samples must be >= 1")
        if self.stride < 1:
            raise ValueError("stride must be >= 1")
        if self.dt is not None and not self.dt > 0.0:
            raise ValueError("dt must be > 0")
        if self.tau_max is not None and self.tau_max < 0.0:
            raise ValueError("tau-max must be >= 0")
        return self

    def params(self, theta: Optional[float] = None) -> SystemParams:
        return SystemParams(eps_tilde=self.eps_tilde, eta=self.eta,
                            theta=self.theta if theta is None else theta)

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "RunConfig":
        fields = {k: v for k, v in vars(args).items() if k in cls.model_fields and v is not None}
        kelvin = getattr(args, "kelvin", None)
        if kelvin is not None:
            fields["theta"] = physical_theta(kelvin, args.hbar_omega0)
        return cls(**fields)


# ============================================================================
# Output helpers
# ============================================================================

@contextlib.contextmanager
def _open_out(path: Optional[str]) -> Iterator[TextIO]:
    if path in (None, "-"):
        yield sys.stdout
        return
    parent = os.path.dirname(os.path.abspath(path))
    os.makedirs(parent, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        yield f


def _svg_path(prefix: str, suffix: str) -> str:
    os.makedirs(os.path.dirname(os.path.abspath(prefix)), exist_ok=True)
    return f"{prefix}_{suffix}.svg"


def _parse_triple(raw: str) -> tuple[float, float, float]:
    parts = [p for p in raw.split(",") if p.strip()]
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("expected rx,ry,rz")
    return tuple(float(p) for p in parts)


def _parse_list(raw: str) -> list[float]:
    return [float(p) for p in raw.split(",") if p.strip()]


# ============================================================================
# Commands
# ============================================================================

def cmd_spectrum(cfg: RunConfig) -> int:
    report = analyze_spectrum(build_bloch_matrix(cfg.params()))
    with _open_out(cfg.out) as out:
        if cfg.as_json:
            reports.dump_json(out, reports.model_json(report))
            return EXIT_OK
        out.write(f"regime: {report.regime.value}\n")
        out.write(f"discriminant: {reports.fmt(report.discriminant)}\n")
        for i, e in enumerate(report.eigenvalues, 1):
            out.write(f"lambda{i}: {reports.fmt(e.re)} {'+' if e.im >= 0 else '-'} {reports.fmt(abs(e.im))}i\n")
        out.write(f"gamma_L: {', '.join(reports.fmt(g) for g in report.gamma_L)}\n")
        out.write(f"gamma_T: {reports.fmt(report.gamma_T)}\n")
        out.write(f"omega: {reports.fmt(report.oscillation_freq)}\n")
        out.write(f"ratio: {reports.fmt(report.ratio)}\n")
        for i, l in enumerate(report.directions, 1):
            shown = "none" if l is None else ", ".join(reports.fmt(x) for x in l)
            out.write(f"l{i}: {shown}\n")
    return EXIT_OK


def _sweep(cfg: RunConfig):
    return sweep_temperature(cfg.eps_tilde, cfg.eta, (cfg.theta_min, cfg.theta_max),
                             cfg.n_points, progress=not cfg.quiet)


def cmd_sweep(cfg: RunConfig) -> int:
    records = _sweep(cfg)
    with _open_out(cfg.out) as out:
        reports.write_sweep_csv(out, records)
    if cfg.svg:
        title = f"e~={cfg.eps_tilde}, eta={cfg.eta}"
        reports.plot_rates(records, _svg_path(cfg.svg, "rates"), title)
        reports.plot_ratio(records, _svg_path(cfg.svg, "ratio"), title)
        reports.plot_directions(records, _svg_path(cfg.svg, "directions"), title)
    return EXIT_OK


def cmd_bifurcations(cfg: RunConfig) -> int:
    report = find_bifurcations(cfg.eps_tilde, cfg.eta, (cfg.theta_min, cfg.theta_max), cfg.tol)
    records = _sweep(cfg)
    jumps = (track_direction_jumps(records, Trace.UPWARD)
             + track_direction_jumps(records, Trace.DOWNWARD))
    report = report.model_copy(update={"jumps": jumps})
    with _open_out(cfg.out) as out:
        reports.dump_json(out, reports.bifurcation_json(report))
    return EXIT_OK


def cmd_critical_epsilon(cfg: RunConfig) -> int:
    report = critical_epsilon(cfg.eta, (cfg.eps_min, cfg.eps_max))
    with _open_out(cfg.out) as out:
        reports.dump_json(out, reports.model_json(report))
    return EXIT_OK


def cmd_direction(cfg: RunConfig) -> int:
    records = _sweep(cfg)
    traces = [cfg.trace] if cfg.trace else list(Trace)
    doc = {t.value: [reports.model_json(j) for j in track_direction_jumps(records, t)] for t in traces}
    with _open_out(cfg.out) as out:
        reports.dump_json(out, doc)
    if cfg.svg:
        reports.plot_directions(records, _svg_path(cfg.svg, "directions"),
                                f"e~={cfg.eps_tilde}, eta={cfg.eta}")
    return EXIT_OK


def cmd_simulate(cfg: RunConfig) -> int:
    params = cfg.params()
    rho0 = DensityState.of(cfg.rho0 or (0.0, 0.0, 1.0))
    tau_max = cfg.tau_max if cfg.tau_max is not None else default_tau_max(params)
    trajectory = integrate_master(rho0, params, tau_max, dt=cfg.dt, stride=cfg.stride)
    with _open_out(cfg.out) as out:
        reports.write_trajectory_csv(out, trajectory)
    if cfg.svg:
        reports.plot_trajectory(trajectory, _svg_path(cfg.svg, "trajectory"),
                                f"e~={cfg.eps_tilde}, eta={cfg.eta}, theta={cfg.theta}")
    return EXIT_OK


def cmd_weak_compare(cfg: RunConfig) -> int:
    params = cfg.params()
    doc = reports.model_json(weak_coupling_constants(params))
    doc["strong"] = reports.model_json(analyze_spectrum(build_bloch_matrix(params)))
    with _open_out(cfg.out) as out:
        reports.dump_json(out, doc)
    return EXIT_OK


def cmd_mechanism(cfg: RunConfig) -> int:
    thetas = cfg.thetas or [cfg.theta]
    lam_max = cfg.lam_max
    if lam_max is None:
        lam_max = 1.0 + 2.0 * max(2.0 * cfg.eta * t for t in thetas)
    curves, lam = [], None
    for t in thetas:
        lam, f = characteristic_curve(cfg.params(t), cfg.lam_min, lam_max, cfg.n_points)
        curves.append(f)
    with _open_out(cfg.out) as out:
        reports.write_curves_csv(out, lam, curves)
    if cfg.svg:
        reports.plot_curves(lam, curves, [f"theta={t:g}" for t in thetas],
                            _svg_path(cfg.svg, "mechanism"), f"e~={cfg.eps_tilde}, eta={cfg.eta}")
    return EXIT_OK


def cmd_commutator(cfg: RunConfig) -> int:
    params = cfg.params()
    doc = {
        "numeric": superoperator_commutator_norm(params),
        "closed_form": commutator_closed_form(params),
    }
    with _open_out(cfg.out) as out:
        reports.dump_json(out, reports.round_sig(doc))
    return EXIT_OK


def cmd_verify(cfg: RunConfig) -> int:
    results = run_suites(cfg.suite, cfg.samples, cfg.seed, progress=not cfg.quiet)
    with _open_out(cfg.out) as out:
        out.write(f"{'suite':<14}{'checked':>10}{'excluded':>10}{'failures':>10}  {'worst residual':<16}status\n")
        for r in results:
            out.write(f"{r.suite.value:<14}{r.checked:>10}{r.excluded:>10}{r.failures:>10}  "
                      f"{reports.fmt(r.worst_residual):<16}{'PASS' if r.passed else 'FAIL'}\n")
    failed = [r for r in results if not r.passed]
    if failed:
        raise VerificationFailed(json.dumps(reports.round_sig(failed[0].counterexample), sort_keys=True))
    return EXIT_OK


COMMANDS = {
    "spectrum": cmd_spectrum,
    "sweep": cmd_sweep,
    "bifurcations": cmd_bifurcations,
    "critical-epsilon": cmd_critical_epsilon,
    "direction": cmd_direction,
    "simulate": cmd_simulate,
    "weak-compare": cmd_weak_compare,
    "mechanism": cmd_mechanism,
    "commutator": cmd_commutator,
    "verify": cmd_verify,
}


# ============================================================================
# Argument parsing
# ============================================================================

def _add_params(p: argparse.ArgumentParser, theta: bool = True) -> None:
    p.add_argument("--eps-tilde", dest="eps_tilde", type=float, required=True)
    p.add_argument("--eta", type=float, default=1.0)
    if theta:
        group = p.add_mutually_exclusive_group(required=True)
        group.add_argument("--theta", type=float)
        group.add_argument("--kelvin", type=float, help="temperature in K (needs --hbar-omega0)")
        p.add_argument("--hbar-omega0", dest="hbar_omega0", type=float, default=1.0,
                       help="level splitting in meV, used with --kelvin")


def _add_grid(p: argparse.ArgumentParser, points: int) -> None:
    p.add_argument("--theta-min", dest="theta_min", type=float, default=0.0)
    p.add_argument("--theta-max", dest="theta_max", type=float, default=3.0)
    p.add_argument("--points", dest="n_points", type=int, default=points)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="spinrelax",
                                     description="Strong-coupling spin relaxation analysis")
    parser.add_argument("-v", "--verbose", action="store_true")
    parser.add_argument("-q", "--quiet", action="store_true", help="no progress bars")
    parser.add_argument("--log-file", dest="log_file", default=None)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("spectrum", help="eigenvalues, rates and directions at one point")
    _add_params(p)
    p.add_argument("--json", dest="as_json", action="store_true")
    p.add_argument("--out")

    p = sub.add_parser("sweep", help="temperature sweep as CSV")
    _add_params(p, theta=False)
    _add_grid(p, 400)
    p.add_argument("--out")
    p.add_argument("--svg", help="prefix for SVG plots")

    p = sub.add_parser("bifurcations", help="critical temperatures and direction jumps as JSON")
    _add_params(p, theta=False)
    _add_grid(p, 2000)
    p.add_argument("--tol", type=float)
    p.add_argument("--out")

    p = sub.add_parser("critical-epsilon", help="e~ above which no ThreeReal window exists")
    p.add_argument("--eta", type=float, default=1.0)
    p.add_argument("--eps-min", dest="eps_min", type=float, default=0.05)
    p.add_argument("--eps-max", dest="eps_max", type=float, default=0.95)
    p.add_argument("--out")

    p = sub.add_parser("direction", help="longitudinal direction jumps along a trace")
    _add_params(p, theta=False)
    _add_grid(p, 2000)
    p.add_argument("--trace", choices=[t.value for t in Trace])
    p.add_argument("--out")
    p.add_argument("--svg")

    p = sub.add_parser("simulate", help="integrate the master equation")
    _add_params(p)
    p.add_argument("--rho0", type=_parse_triple, help="initial Bloch vector rx,ry,rz")
    p.add_argument("--tau-max", dest="tau_max", type=float)
    p.add_argument("--dt", type=float)
    p.add_argument("--stride", type=int, default=100)
    p.add_argument("--out")
    p.add_argument("--svg")

    p = sub.add_parser("weak-compare", help="weak-coupling constants next to the strong-coupling spectrum")
    _add_params(p)
    p.add_argument("--out")

    p = sub.add_parser("mechanism", help="characteristic function f(lambda) at several temperatures")
    p.add_argument("--eps-tilde", dest="eps_tilde", type=float, required=True)
    p.add_argument("--eta", type=float, default=1.0)
    p.add_argument("--theta", dest="thetas", type=_parse_list, required=True, help="comma-separated")
    p.add_argument("--lam-min", dest="lam_min", type=float, default=-0.5)
    p.add_argument("--lam-max", dest="lam_max", type=float)
    p.add_argument("--points", dest="n_points", type=int, default=400)
    p.add_argument("--out")
    p.add_argument("--svg")

    p = sub.add_parser("commutator", help="norm of [H^, V^]")
    _add_params(p)
    p.add_argument("--out")

    p = sub.add_parser("verify", help="randomized equivalence and invariant suites")
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--suite", choices=[s.value for s in Suite], default=Suite.ALL.value)
    p.add_argument("--out")

    return parser


# ============================================================================
# Entry point
# ============================================================================

def setup_logging(verbose: bool = False, log_file: Optional[str] = None) -> None:
    log_file = log_file or config.LOG_FILE
    os.makedirs(os.path.dirname(os.path.abspath(log_file)), exist_ok=True)
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format="%(asctime)s [%(levelname)s] %(message)s",
        handlers=[
            logging.FileHandler(log_file),
            logging.StreamHandler(sys.stderr),
        ],
    )


def _run_guarded(cfg_factory, handler) -> int:
    """Single place mapping outcomes to exit codes."""
    try:
        cfg = cfg_factory()
        return handler(cfg)
    except ValidationError as e:
        print(f"error: {_reason(e)}", file=sys.stderr)
        return EXIT_INVALID
    except VerificationFailed as e:
        print(f"verification failed; first counterexample: {e}", file=sys.stderr)
        return EXIT_VERIFY_FAILED
    except OSError as e:
        print(f"error: cannot write output: {e}", file=sys.stderr)
        return EXIT_IO
    except (RangeError, SpinRelaxError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        setup_logging(args.verbose, args.log_file)
    except OSError as e:
        print(f"error: cannot open log file: {e}", file=sys.stderr)
        return EXIT_IO

    logger.debug(f"command {args.command} with {vars(args)}")
    return _run_guarded(lambda: RunConfig.from_args(args), COMMANDS[args.command])
