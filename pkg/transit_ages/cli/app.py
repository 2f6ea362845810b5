"""Command-line front end.

    validate   <file> [--samples N] [--t0 A --t1 B] [--delta D]
    simulate   <file> --t0 A --t1 B [--dt-out D] [--init equilibrium|PATH] [--ages] -o out.csv
    autonomous <file> --at T
    pullback   <file> --at T [--horizon H]
    casa       --t-end Y [--co2 verbatim|logistic] [--xi-b V] [--s0 V] [--b89 V] -o out.csv
"""
import argparse
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional

import numpy as np
import pandas as pd

from transit_ages.ages.simulation import csv_columns, simulate_with_ages
from transit_ages.ages.transit import frozen_summary
from transit_ages.config.settings import (
    DEFAULT_ATOL,
    DEFAULT_METHOD,
    DEFAULT_PULLBACK_HORIZON,
    DEFAULT_RTOL,
    DEFAULT_SAMPLE_COUNT,
    LOG_FORMAT,
    LOG_LEVEL,
)
from transit_ages.config.system_file import SystemFileLoader
from transit_ages.core.errors import ArgumentError, ConfigurationError, TransitAgesError
from transit_ages.core.system import CompartmentalSystem, default_sample_times
from transit_ages.core.validation import certify_stability, check_compartmental, check_mean_age_stability, detect_blocks
from transit_ages.numerics.integrators import RK4_FIXED, RK45_ADAPTIVE, SolverConfig, integrate_ivp, uniform_grid
from transit_ages.numerics.linalg import equilibrium
from transit_ages.numerics.transition import pullback_solution
from transit_ages.cli.output import RunManifest, input_hash, write_output

log = logging.getLogger(__name__)


class _Parser(argparse.ArgumentParser):
    """argparse exits with status 2 on bad input; parse errors here are exit 1."""

    def error(self, message):
        raise ArgumentError(f"{self.prog}: {message}")


def _vec(v) -> str:
    return "(" + ",".join(f"{float(a):.17g}" for a in v) + ")"


def _solver_args(p):
    p.add_argument("--method", choices=[RK4_FIXED, RK45_ADAPTIVE], default=DEFAULT_METHOD)
    p.add_argument("--rtol", type=float, default=DEFAULT_RTOL)
    p.add_argument("--atol", type=float, default=DEFAULT_ATOL)


def _solver_config(args) -> SolverConfig:
    try:
        return SolverConfig(method=args.method, rtol=args.rtol, atol=args.atol)
    except ValueError as exc:
        raise ConfigurationError(f"Invalid solver settings: {exc}") from exc


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="transit_ages")
    ap.add_argument("--log-level", default=LOG_LEVEL)
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("validate", help="compliance, block structure and stability certificate")
    p.add_argument("file")
    p.add_argument("--samples", type=int, default=DEFAULT_SAMPLE_COUNT)
    p.add_argument("--t0", type=float, default=0.0)
    p.add_argument("--t1", type=float, default=100.0)
    p.add_argument("--delta", type=float, default=None)

    p = sub.add_parser("simulate", help="integrate the system and write a CSV time series")
    p.add_argument("file")
    p.add_argument("--t0", type=float, required=True)
    p.add_argument("--t1", type=float, required=True)
    p.add_argument("--dt-out", type=float, default=None)
    p.add_argument("--init", default="equilibrium")
    p.add_argument("--ages", action="store_true")
    _solver_args(p)
    p.add_argument("-o", "--output", default=None)

    p = sub.add_parser("autonomous", help="freeze B(T), s(T) and print the equilibrium summary")
    p.add_argument("file")
    p.add_argument("--at", type=float, required=True)

    p = sub.add_parser("pullback", help="approximate the pullback attracting solution at T")
    p.add_argument("file")
    p.add_argument("--at", type=float, required=True)
    p.add_argument("--horizon", type=float, default=None)
    p.add_argument("--samples", type=int, default=DEFAULT_SAMPLE_COUNT)
    _solver_args(p)

    p = sub.add_parser("casa", help="run the nine-pool carbon scenario")
    p.add_argument("--t-end", type=float, required=True)
    p.add_argument("--co2", choices=["verbatim", "logistic"], default=None)
    p.add_argument("--xi-b", type=float, default=None)
    p.add_argument("--s0", type=float, default=None)
    p.add_argument("--b89", type=float, default=None)
    p.add_argument("--dt-out", type=float, default=1.0)
    p.add_argument("--forcing-out", default=None)
    _solver_args(p)
    p.add_argument("-o", "--output", default=None)
    return ap


# ============================================================
# Commands
# ============================================================
def _load(path: str) -> CompartmentalSystem:
    return SystemFileLoader(path).build()


def cmd_validate(args, out) -> int:
    system = _load(args.file)
    times = default_sample_times(args.t0, args.t1, args.samples)
    report = check_compartmental(system, times)
    blocks = detect_blocks(system, times)
    cert = certify_stability(system, blocks, times)
    log.info("validated %s: compliant=%s blocks=%s", args.file, report.compliant, blocks.partition)

    print(f"system: {system.name or args.file} (d={system.dimension}, domain {system.domain.describe()})", file=out)
    print(f"samples: {times.size} over [{args.t0:g}, {args.t1:g}]", file=out)
    print(f"compliance: {report.describe()}", file=out)
    print(f"blocks: {list(blocks.partition)} (m={blocks.m})", file=out)
    print(f"certificate: {cert.describe()}", file=out)
    if args.delta is not None:
        age_report = check_mean_age_stability(system, blocks, times, args.delta)
        print(f"mean-age stability (delta={args.delta:g}): {age_report.describe()}", file=out)
    return 0 if report.compliant else 3


def _initial_state(system, args):
    if args.init == "equilibrium":
        B, s = system.evaluate(args.t0)
        return equilibrium(B, s), None
    path = Path(args.init)
    if not path.exists():
        raise ConfigurationError(f"--init must be 'equilibrium' or an existing JSON file, got {args.init}")
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"Initial state file {path} is not valid JSON: {exc}") from exc
    if "x0" not in data:
        raise ConfigurationError(f"Initial state file {path} has no 'x0'")
    d = system.dimension
    x0 = np.asarray(data["x0"], dtype=float)
    if x0.shape != (d,):
        raise ArgumentError(f"Initial state x0 in {path} must have {d} entries, got shape {x0.shape}")
    abar0 = data.get("abar0")
    if abar0 is not None:
        abar0 = np.asarray(abar0, dtype=float)
        if abar0.shape != (d,):
            raise ArgumentError(f"Initial ages abar0 in {path} must have {d} entries, got shape {abar0.shape}")
    return x0, abar0


def cmd_simulate(args, out, argv) -> int:
    if args.t1 <= args.t0:
        raise ArgumentError(f"--t1 {args.t1} must exceed --t0 {args.t0}")
    system = _load(args.file)
    cfg = _solver_config(args)
    x0, abar0 = _initial_state(system, args)
    dt = args.dt_out if args.dt_out is not None else (args.t1 - args.t0) / 100.0
    times = uniform_grid(args.t0, args.t1, dt)

    if args.ages:
        frame = simulate_with_ages(system, args.t0, x0, args.t1, abar0, cfg, times).to_frame()
    else:
        system.domain.require(args.t0)
        traj = integrate_ivp(system.rhs, args.t0, x0, args.t1, cfg, times)
        d = system.dimension
        data = {"t": traj.times}
        for i in range(d):
            data[f"x_{i + 1}"] = traj.states[:, i]
        data["total_x"] = traj.states.sum(axis=1)
        frame = pd.DataFrame(data, columns=csv_columns(d, with_ages=False))

    config = {"t0": args.t0, "t1": args.t1, "dt_out": dt, "init": args.init, "ages": args.ages,
              "solver": cfg.model_dump()}
    manifest = RunManifest(command="simulate", argv=list(argv), input_path=args.file, config=config,
                           columns=list(frame.columns), input_hash=input_hash(args.file, config))
    write_output(frame, args.output, manifest, out)
    return 0


def cmd_autonomous(args, out) -> int:
    system = _load(args.file)
    for line in frozen_summary(system, args.at).as_lines():
        print(line, file=out)
    return 0


def cmd_pullback(args, out) -> int:
    system = _load(args.file)
    cfg = _solver_config(args)
    certificate = None
    horizon = args.horizon if args.horizon is not None else DEFAULT_PULLBACK_HORIZON
    if horizon > 0:
        times = default_sample_times(args.at - horizon, args.at, args.samples)
        if all(system.domain.contains(float(t)) for t in times):
            certificate = certify_stability(system, detect_blocks(system, times), times)
    result = pullback_solution(system, args.at, args.horizon, cfg, certificate)
    print(f"t={result.t:.17g}", file=out)
    print(f"horizon={result.horizon:.17g}", file=out)
    print(f"nu={_vec(result.value)}", file=out)
    bound = "not quantified" if result.truncation_bound is None else f"{result.truncation_bound:.17g}"
    print(f"truncation_bound={bound}", file=out)
    return 0


def cmd_casa(args, out, argv) -> int:
    from transit_ages.casa.params import CasaParams
    from transit_ages.casa.scenario import run_scenario

    overrides = {k: v for k, v in (("co2_model", args.co2), ("xi_b", args.xi_b), ("s0", args.s0),
                                   ("b89", args.b89)) if v is not None}
    try:
        params = CasaParams().with_overrides(**overrides)
    except ValueError as exc:
        raise ConfigurationError(f"Invalid CASA parameters: {exc}") from exc
    cfg = _solver_config(args)
    result = run_scenario(params, args.t_end, cfg, args.dt_out)
    frame = result.to_frame()

    config = {"t_end": args.t_end, "dt_out": args.dt_out, "params": params.model_dump(),
              "solver": cfg.model_dump()}
    manifest = RunManifest(command="casa", argv=list(argv), config=config, columns=list(frame.columns),
                           input_hash=input_hash(None, config))
    write_output(frame, args.output, manifest, out)
    if args.forcing_out is not None:
        forcing_manifest = manifest.model_copy(update={"columns": list(result.forcing.columns)})
        write_output(result.forcing, args.forcing_out, forcing_manifest, out)
    return 0


# ============================================================
# Entry point
# ============================================================
def _configure_logging(level: str) -> None:
    if not isinstance(logging.getLevelName(level.upper()), int):
        raise ArgumentError(f"Unknown log level '{level}'")
    logging.basicConfig(level=level.upper(), format=LOG_FORMAT, stream=sys.stderr)


def execute(argv: Optional[List[str]] = None, out=None) -> int:
    """Run one command; returns the process exit status."""
    argv = list(sys.argv[1:] if argv is None else argv)
    out = out or sys.stdout
    try:
        args = build_parser().parse_args(argv)
        _configure_logging(args.log_level)
        if args.command == "validate":
            return cmd_validate(args, out)
        if args.command == "simulate":
            return cmd_simulate(args, out, argv)
        if args.command == "autonomous":
            return cmd_autonomous(args, out)
        if args.command == "pullback":
            return cmd_pullback(args, out)
        return cmd_casa(args, out, argv)
    except TransitAgesError as exc:
        print(f"error: {exc.detail}", file=sys.stderr)
        return exc.exit_code
