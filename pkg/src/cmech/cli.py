"""Command-line surface: simulate | geometry | quantize | verify.

Runs are reproducible from their resolved configuration alone; every report
embeds that configuration and the package version.  Exit codes: 0 ok,
2 configuration error, 3 integration failure, 4 nonlinearity,
5 verification failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field

from . import __version__, canon, curvegeo, odeint, quantop, report_io, scenarios, verification
from .canon import Hamiltonian, PhaseState
from .errors import (
    CmechError, ConfigError, EvaluationError, ExpressionParseError,
    IntegrationError, NonlinearityError, UnboundParameterError,
)
from .hamexpr import ParamSet

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INTEGRATION = 3
EXIT_NONLINEAR = 4
EXIT_VERIFY = 5


@dataclass
class RunConfig:
    """Fully resolved run description; serializable, no hidden state."""

    scenario: str | None = None
    hamiltonian: str | None = None
    params: dict = field(default_factory=dict)
    q0: float = 1.0
    p0: float = 0.0
    t0: float = 0.0
    n: int = 1
    integrator: str = "adaptive"  # rk4 | adaptive | exact
    step: float = 0.01
    nsteps: int = 1000
    t_end: float | None = None
    periods: float | None = None
    rel_tol: float = 1e-9
    abs_tol: float = 1e-12
    samples: int = 1001
    curve: str = curvegeo.Z_CURVE
    out_csv: str | None = None
    out_report: str | None = None

    def validate(self):
        if (self.scenario is None) == (self.hamiltonian is None):
            raise ConfigError("exactly one of --scenario or --hamiltonian is required")
        if self.scenario is not None and self.scenario not in scenarios.SCENARIO_NAMES:
            raise ConfigError(
                f"unknown scenario {self.scenario!r}; choose from {scenarios.SCENARIO_NAMES}"
            )
        if self.integrator not in ("rk4", "adaptive", "exact"):
            raise ConfigError(f"unknown integrator {self.integrator!r}")
        if self.curve not in (curvegeo.Z_CURVE, curvegeo.DUAL_CURVE):
            raise ConfigError(f"unknown curve selector {self.curve!r}")
        if self.t_end is None and self.periods is None:
            raise ConfigError("a time span is required: --t-end or --periods")

    def entries(self) -> dict:
        out = {"config.version": __version__}
        for name in (
            "scenario", "hamiltonian", "q0", "p0", "t0", "n", "integrator",
            "step", "nsteps", "t_end", "periods", "rel_tol", "abs_tol",
            "samples", "curve",
        ):
            out[f"config.{name}"] = getattr(self, name)
        for key in sorted(self.params):
            out[f"config.param.{key}"] = self.params[key]
        return out


def _parse_param(text: str) -> tuple[str, float]:
    name, sep, value = text.partition("=")
    if not sep or not name:
        raise ConfigError(f"--param expects name=value, got {text!r}")
    try:
        return name.strip(), float(value)
    except ValueError:
        raise ConfigError(f"--param {name}: {value!r} is not a number") from None


def _add_run_arguments(sub: argparse.ArgumentParser):
    sub.add_argument("--config", help="JSON config file; flags override its entries")
    sub.add_argument("--scenario", choices=scenarios.SCENARIO_NAMES)
    sub.add_argument("--hamiltonian", help="inline Hamiltonian expression")
    sub.add_argument("--param", action="append", default=[], metavar="NAME=VALUE")
    sub.add_argument("--q0", type=float)
    sub.add_argument("--p0", type=float)
    sub.add_argument("--t0", type=float)
    sub.add_argument("--n", type=int, help="momentum power index of the attenuated scenario")
    sub.add_argument("--integrator", choices=("rk4", "adaptive", "exact"))
    sub.add_argument("--step", type=float)
    sub.add_argument("--nsteps", type=int)
    sub.add_argument("--t-end", dest="t_end", type=float)
    sub.add_argument("--periods", type=float)
    sub.add_argument("--rel-tol", dest="rel_tol", type=float)
    sub.add_argument("--abs-tol", dest="abs_tol", type=float)
    sub.add_argument("--samples", type=int)
    sub.add_argument("--curve", choices=(curvegeo.Z_CURVE, curvegeo.DUAL_CURVE))
    sub.add_argument("--out-csv", dest="out_csv")
    sub.add_argument("--out-report", dest="out_report")


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig()
    if getattr(args, "config", None):
        try:
            with open(args.config) as fh:
                file_cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config file {args.config}: {exc}") from None
        for key, value in file_cfg.items():
            if not hasattr(cfg, key):
                raise ConfigError(f"unknown config key {key!r}")
            setattr(cfg, key, value)
    for key in (
        "scenario", "hamiltonian", "q0", "p0", "t0", "n", "integrator",
        "step", "nsteps", "t_end", "periods", "rel_tol", "abs_tol",
        "samples", "curve", "out_csv", "out_report",
    ):
        value = getattr(args, key, None)
        if value is not None:
            setattr(cfg, key, value)
    cfg.params = dict(cfg.params)
    for text in getattr(args, "param", []) or []:
        name, value = _parse_param(text)
        cfg.params[name] = value
    cfg.validate()
    return cfg


@dataclass
class PreparedRun:
    config: RunConfig
    scenario: scenarios.Scenario | None
    hamiltonian: Hamiltonian
    params: ParamSet
    initial: PhaseState
    t_end: float


def _prepare(cfg: RunConfig) -> PreparedRun:
    try:
        params = ParamSet(cfg.params)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    scenario = None
    if cfg.scenario:
        kwargs = {"q0": cfg.q0, "p0": cfg.p0, "t0": cfg.t0}
        if cfg.scenario == scenarios.ATTENUATED:
            kwargs["n"] = cfg.n
        try:
            scenario = scenarios.by_name(cfg.scenario, params, **kwargs)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        h = scenario.hamiltonian
        params = scenario.params
    else:
        try:
            h = Hamiltonian(cfg.hamiltonian)
        except ExpressionParseError as exc:
            raise ConfigError(f"bad --hamiltonian: {exc}") from None
    initial = PhaseState(cfg.q0, cfg.p0, cfg.t0)
    if cfg.t_end is not None:
        t_end = cfg.t_end
    else:
        if scenario is None or scenario.period is None:
            raise ConfigError("--periods requires a scenario with a known period")
        t_end = cfg.t0 + cfg.periods * scenario.period
    if t_end < cfg.t0:
        raise ConfigError("t_end precedes t0")
    return PreparedRun(cfg, scenario, h, params, initial, t_end)


def _trajectory(run: PreparedRun) -> odeint.Trajectory:
    cfg = run.config
    if cfg.integrator == "exact":
        if run.scenario is None or run.scenario.closed_form is None:
            raise ConfigError("--integrator exact requires a scenario with a closed form")
        return run.scenario.sample(run.t_end, cfg.samples)
    if cfg.integrator == "rk4":
        span = run.t_end - cfg.t0
        nsteps = cfg.nsteps if cfg.nsteps else max(1, int(math.ceil(span / cfg.step)))
        step = span / nsteps if nsteps else cfg.step
        return odeint.integrate_rk4(run.hamiltonian, run.initial, step, nsteps, run.params)
    traj = odeint.integrate_adaptive(
        run.hamiltonian, run.initial, run.t_end, cfg.rel_tol, cfg.abs_tol, run.params
    )
    if cfg.samples and len(traj) > 1:
        import numpy as np

        times = np.linspace(traj.t0, traj.t_end, cfg.samples)
        traj = odeint.resample(traj, times)
    return traj


def _emit(text: str, path: str | None, stdout):
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        stdout.write(text)


def cmd_simulate(args, stdout) -> int:
    cfg = _config_from_args(args)
    run = _prepare(cfg)
    traj = _trajectory(run)
    csv_text = report_io.trajectory_csv(traj, cfg.curve)
    if cfg.out_csv:
        with open(cfg.out_csv, "w") as fh:
            fh.write(csv_text)
    entries = dict(cfg.entries())
    entries.update(
        {
            "kind": "simulate",
            "run.samples": len(traj),
            "run.t_end": traj.t_end,
            "run.method": traj.method,
            "run.final_q": float(traj.q[-1]),
            "run.final_p": float(traj.p[-1]),
            "run.out_csv": cfg.out_csv,
        }
    )
    _emit(report_io.render_report(entries), cfg.out_report, stdout)
    if not cfg.out_report and not cfg.out_csv:
        stdout.write(csv_text)
    return EXIT_OK


def cmd_geometry(args, stdout) -> int:
    cfg = _config_from_args(args)
    run = _prepare(cfg)
    if cfg.integrator == "adaptive" and run.scenario is not None and run.scenario.closed_form:
        # analytic sampling is both faster and sharper when available
        cfg.integrator = "exact"
    traj = _trajectory(run)
    period = run.scenario.period if run.scenario else None
    rep = curvegeo.geometry_report(traj, cfg.curve, period=(run.t_end - cfg.t0) if period else None)
    entries = dict(cfg.entries())
    entries.update(
        {
            "kind": "geometry",
            "geometry.curve": rep.curve,
            "geometry.samples": rep.n_samples,
            "geometry.singular_samples": rep.singular_count,
            "geometry.closed": rep.closed,
            "geometry.arc_length": rep.length,
            "geometry.area": rep.area,
            "geometry.area_phase_plane": rep.area_phase_plane,
            "geometry.period": rep.period,
            "geometry.kappa_min": rep.kappa_min,
            "geometry.kappa_max": rep.kappa_max,
            "geometry.kappa_length_product": rep.kappa_length_product,
            "geometry.energy_classical": rep.energy_classical,
            "geometry.energy_symplectic": rep.energy_symplectic,
            "geometry.energy_area_ratio": rep.energy_area_ratio,
        }
    )
    if rep.bounds is not None:
        entries["bounds.length"] = "PASS" if rep.bounds.length_ok else "FAIL"
        entries["bounds.area"] = "PASS" if rep.bounds.area_ok else "FAIL"
        entries["bounds.tight"] = rep.bounds.tight
        entries["bounds.printed_ordering.length"] = (
            "PASS" if rep.bounds.printed_length_ok else "FAIL"
        )
        entries["bounds.printed_ordering.area"] = (
            "PASS" if rep.bounds.printed_area_ok else "FAIL"
        )
    else:
        entries["bounds.skipped"] = rep.bounds_skip_reason
    if run.scenario is not None and run.scenario.name == scenarios.HARMONIC:
        energy = curvegeo.energy_symplectic(run.hamiltonian, run.initial, run.params)
        worst = 0.0
        for s in curvegeo.curve_samples(traj, curvegeo.DUAL_CURVE):
            if not s.singular:
                worst = max(
                    worst, curvegeo.curvature_energy_residual(s, energy, run.params)
                )
        entries["geometry.curvature_energy_max_residual"] = worst
    for i, note in enumerate(rep.notes):
        entries[f"geometry.note.{i}"] = note
    _emit(report_io.render_report(entries), cfg.out_report, stdout)
    return EXIT_OK


def cmd_quantize(args, stdout) -> int:
    cfg = _config_from_args(args)
    if cfg.t_end is None:
        cfg.t_end = cfg.t0  # span is irrelevant for quantization
    run = _prepare(cfg)
    entries = dict(cfg.entries())
    entries["kind"] = "quantize"
    if run.scenario is not None:
        table = quantop.commutator_table(run.scenario)
        qe = quantop.quantum_energy(run.scenario)
    else:
        params = run.params
        a0, a1, a2 = quantop.operator_chain(run.hamiltonian, params)
        hbar = params["hbar"]
        pairs = {
            "zdag_z": (a0.dagger(), a0),
            "z_zdotdag": (a0, a1.dagger()),
            "zdotdag_zddot": (a1.dagger(), a2),
            "zdot_zddotdag": (a1, a2.dagger()),
        }
        table = [
            quantop.CommutatorEntry(
                name=name,
                engine=quantop.commutator(x, y, hbar),
                oracle=quantop.commutator_oracle(x, y, hbar),
                reference=None,
            )
            for name, (x, y) in pairs.items()
        ]
        qe = None
    for entry in table:
        entries[f"commutator.{entry.name}.legend"] = quantop.COMMUTATOR_LEGEND[entry.name]
        entries[f"commutator.{entry.name}.engine"] = entry.engine
        entries[f"commutator.{entry.name}.oracle"] = entry.oracle
        entries[f"commutator.{entry.name}.reference"] = entry.reference
        entries[f"commutator.{entry.name}.reference_delta"] = entry.reference_delta
    if qe is not None:
        entries["energy.recipe"] = qe.recipe
        entries["energy.value"] = qe.value
        entries["energy.reference"] = qe.reference
        entries["energy.reference_delta"] = qe.reference_delta
    _emit(report_io.render_report(entries), cfg.out_report, stdout)
    return EXIT_OK


def cmd_verify(args, stdout) -> int:
    only = args.only or None
    try:
        results = verification.run(only=only)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    entries = {"kind": "verify", "version": __version__}
    all_passed = True
    for res in results:
        line = f"[{'PASS' if res.passed else 'FAIL'}] {res.cid} {res.title}: {res.detail}\n"
        stdout.write(line)
        entries[f"criterion.{res.cid}"] = "PASS" if res.passed else "FAIL"
        entries[f"criterion.{res.cid}.detail"] = res.detail
        all_passed = all_passed and res.passed
    entries["summary.total"] = len(results)
    entries["summary.passed"] = sum(1 for r in results if r.passed)
    entries["summary.failed"] = sum(1 for r in results if not r.passed)
    text = report_io.render_report(entries)
    if args.out_report:
        with open(args.out_report, "w") as fh:
            fh.write(text)
    else:
        stdout.write(text)
    return EXIT_OK if all_passed else EXIT_VERIFY


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cmech",
        description="Complexified Hamiltonian mechanics: simulation, geometry, quantization",
    )
    parser.add_argument("--version", action="version", version=f"cmech {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("simulate", "integrate a flow and write the trajectory CSV"),
        ("geometry", "phase-curve geometry report"),
        ("quantize", "commutator table and quantum-energy report"),
    ):
        p = sub.add_parser(name, help=help_text)
        _add_run_arguments(p)
    v = sub.add_parser("verify", help="run the acceptance verification suite")
    v.add_argument("--only", action="append", choices=verification.GROUPS,
                   help="restrict to a verification group (repeatable)")
    v.add_argument("--out-report", dest="out_report")
    return parser


def main(argv: list[str] | None = None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "simulate": cmd_simulate,
        "geometry": cmd_geometry,
        "quantize": cmd_quantize,
        "verify": cmd_verify,
    }
    try:
        return handlers[args.command](args, stdout)
    except (ConfigError, ExpressionParseError, UnboundParameterError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NonlinearityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NONLINEAR
    except IntegrationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INTEGRATION
    except EvaluationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CmechError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
