"""Command line interface.

    thermoflux run <config>                    one simulation, diagnostics CSV
    thermoflux analyze --model ... [flags]     exponents / weights / thresholds
    thermoflux sweep <config> --vary k=v1,v2   cartesian parameter sweep
    thermoflux check                           built-in invariant suite

Exit codes: 0 success, 1 usage or configuration error, 2 numerical abort
(degenerate state), 3 invariant-suite failure.  THERMOFLUX_OUTPUT_DIR
overrides the [output] directory of run/sweep.
"""
import argparse
import itertools
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import analysis, diagnostics, solver, thermo
from .config import build_initial_state, parse_config
from .errors import ThermofluxError
from .grid import write_snapshot

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERICAL = 2
EXIT_CHECK_FAILED = 3


def _output_dir(cfg):
    override = os.environ.get("THERMOFLUX_OUTPUT_DIR")
    return Path(override) if override else Path(cfg.output.directory)


def _make_monitor(cfg, tolerance=0.0):
    model = cfg.model
    if model.kind == thermo.IDEAL_GAS and model.conductivity.kind == thermo.COND_IDEAL_GAS_LAW:
        aux = analysis.gamma_exponents(model.kappa1, model.kappa2, model.conductivity.value)
    elif model.kind == thermo.POROUS_MEDIA and model.conductivity.kind == thermo.COND_PM_LAW:
        aux = diagnostics.PMAuxInfo.build(model)
    else:
        aux = None  # no extremum theory for this configuration
    return diagnostics.DiagnosticsMonitor(model, aux, tolerance=tolerance)


def _execute_run(cfg, out_dir):
    out_dir.mkdir(parents=True, exist_ok=True)
    state = build_initial_state(cfg)
    h = cfg.grid.h
    dt0 = solver.stable_dt(cfg.model, state, dt_safety=cfg.solver.dt_safety)
    # envelope slack of the form C*(dt + h^2)*T; C fixed at 50 for CLI runs
    tolerance = 50.0 * (dt0 + h * h) * max(cfg.solver.t_end, dt0)
    monitor = _make_monitor(cfg, tolerance)
    snap_index = [0]

    with diagnostics.DiagnosticsWriter(out_dir / "diagnostics.csv") as writer:
        def observer(s):
            writer.write(monitor.record(s))
            if cfg.output.snapshots:
                base = out_dir / f"rho_{snap_index[0]:06d}"
                write_snapshot(base, s.rho, "rho", s.t)
                write_snapshot(out_dir / f"w_{snap_index[0]:06d}", s.w, "w", s.t)
                snap_index[0] += 1

        final, status = solver.run(cfg.model, state, cfg.solver, observer)
    (out_dir / "status.txt").write_text(status + "\n")
    return status


def cmd_run(args):
    try:
        cfg = parse_config(Path(args.config).read_text())
    except (OSError, ThermofluxError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    status = _execute_run(cfg, _output_dir(cfg))
    print(f"status: {status}")
    return EXIT_OK if status == solver.COMPLETED else EXIT_NUMERICAL


def _scan_csv(path, params, branch, table):
    with open(path, "w", newline="\n") as fh:
        fh.write("rho,f,psi,gtilde\n")
        for rho, f, psi in zip(table.rho, table.f, table.psi):
            g = analysis.gtilde_pm(branch, rho, params)
            fh.write(f"{rho:.17g},{f:.17g},{psi:.17g},{g:.17g}\n")


def cmd_analyze(args):
    if args.model == thermo.IDEAL_GAS:
        if args.dtilde is None:
            print("error: --dtilde is required for the ideal-gas analysis", file=sys.stderr)
            return EXIT_USAGE
        e = analysis.gamma_exponents(args.kappa1, args.kappa2, args.dtilde)
        sign_plus, sign_minus = analysis.gtilde_ideal_signs(e)
        for key, value in [("beta", e.beta), ("d_tilde", e.d_tilde),
                           ("gamma_plus", e.gamma_plus), ("gamma_minus", e.gamma_minus),
                           ("disc", e.disc), ("c_plus", e.c_plus), ("c_minus", e.c_minus),
                           ("sign_plus", sign_plus), ("sign_minus", sign_minus)]:
            print(f"{key} = {value:.17g}" if isinstance(value, float) else f"{key} = {value}")
        return EXIT_OK
    if args.alpha is None or args.d is None:
        print("error: --alpha and --d are required for porous-media analysis", file=sys.stderr)
        return EXIT_USAGE
    params = analysis.PMBranchParams(a=args.alpha - 1.0, kappa2=args.kappa2, d=args.d)
    thr = analysis.find_thresholds(params, rho_min=args.rho_min, rho_max=args.rho_max,
                                   points=args.points)
    print(f"a = {params.a:.17g}")
    print(f"kappa2 = {params.kappa2:.17g}")
    print(f"d = {params.d:.17g}")
    print(f"rho_bar = {thr.rho_bar:.17g}")
    print(f"rho_under = {thr.rho_under:.17g}")
    print(f"g_minus_positive = {thr.g_minus_positive}")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rhos = np.geomspace(args.rho_min, args.rho_max, args.points)
    for branch in (analysis.BRANCH_PLUS, analysis.BRANCH_MINUS):
        table = analysis.weight_function(branch, params, 1.0, 1.0, rhos)
        _scan_csv(out / f"branch_{branch}.csv", params, branch, table)
    print(f"wrote {out / 'branch_plus.csv'} and {out / 'branch_minus.csv'}")
    return EXIT_OK


def _sweep_key(section, key, value):
    return f"{section}.{key}={value}"


def _apply_override(text, section, key, value):
    """Rewrite one key inside one section of the config text."""
    lines = text.splitlines()
    current = None
    replaced = False
    for i, raw in enumerate(lines):
        stripped = raw.split("#", 1)[0].strip()
        if stripped.startswith("[") and stripped.endswith("]"):
            current = stripped[1:-1].strip()
            continue
        if current == section and stripped.partition("=")[0].strip() == key:
            lines[i] = f"{key} = {value}"
            replaced = True
    if not replaced:
        out, current = [], None
        for raw in lines:
            out.append(raw)
            stripped = raw.strip()
            if stripped == f"[{section}]":
                out.append(f"{key} = {value}")
                replaced = True
        lines = out
    if not replaced:
        lines += [f"[{section}]", f"{key} = {value}"]
    return "\n".join(lines) + "\n"


def _run_sweep_point(payload):
    text, out_dir = payload
    cfg = parse_config(text)
    return _execute_run(cfg, Path(out_dir))


def cmd_sweep(args):
    try:
        base_text = Path(args.config).read_text()
        parse_config(base_text)  # early validation
    except (OSError, ThermofluxError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    axes = []
    for vary in args.vary:
        key_part, sep, values = vary.partition("=")
        if not sep or "." not in key_part:
            print(f"error: --vary expects section.key=v1,v2,..., got {vary!r}", file=sys.stderr)
            return EXIT_USAGE
        section, key = key_part.split(".", 1)
        axes.append([(section, key, v) for v in values.split(",")])
    cfg0 = parse_config(base_text)
    base_out = _output_dir(cfg0)
    jobs = []
    for combo in itertools.product(*axes):
        text = base_text
        for section, key, value in combo:
            text = _apply_override(text, section, key, value)
        sub = "__".join(_sweep_key(s, k, v) for s, k, v in combo)
        jobs.append((text, str(base_out / sub)))
    statuses = []
    if args.jobs == 1:
        statuses = [_run_sweep_point(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            statuses = list(pool.map(_run_sweep_point, jobs))
    for (text, out_dir), status in zip(jobs, statuses):
        print(f"{out_dir}: {status}")
    return EXIT_OK if all(s == solver.COMPLETED for s in statuses) else EXIT_NUMERICAL


def cmd_check(_args):
    from . import checks
    return EXIT_OK if checks.run_all() else EXIT_CHECK_FAILED


def build_parser():
    parser = argparse.ArgumentParser(prog="thermoflux",
                                     description="non-isothermal fluid model toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one simulation from a config file")
    p_run.add_argument("config")
    p_run.set_defaults(func=cmd_run)

    p_an = sub.add_parser("analyze", help="exponent/weight/threshold analysis, no PDE run")
    p_an.add_argument("--model", required=True,
                      choices=[thermo.IDEAL_GAS, thermo.POROUS_MEDIA])
    p_an.add_argument("--kappa1", type=float, required=True)
    p_an.add_argument("--kappa2", type=float, required=True)
    p_an.add_argument("--dtilde", type=float, default=None)
    p_an.add_argument("--d", type=float, default=None)
    p_an.add_argument("--alpha", type=float, default=None)
    p_an.add_argument("--rho-min", type=float, default=1e-6)
    p_an.add_argument("--rho-max", type=float, default=1e6)
    p_an.add_argument("--points", type=int, default=200)
    p_an.add_argument("--out", default="analysis_out")
    p_an.set_defaults(func=cmd_analyze)

    p_sw = sub.add_parser("sweep", help="cartesian product of parameter overrides")
    p_sw.add_argument("config")
    p_sw.add_argument("--vary", action="append", required=True,
                      metavar="section.key=v1,v2,...")
    p_sw.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    p_sw.set_defaults(func=cmd_sweep)

    p_ck = sub.add_parser("check", help="run the built-in invariant suite")
    p_ck.set_defaults(func=cmd_check)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except ThermofluxError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
