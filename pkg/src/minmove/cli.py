"""Command-line front end.

    minmove run CONFIG [--out DIR] [--quiet]
    minmove converge CONFIG [--out DIR] [--jobs N] [--quiet]
    minmove validate [--out DIR] [--quiet]

Exit codes: 0 ok, 1 check failure, 2 invalid input, 3 solver failure.
"""

import argparse
import csv
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from minmove.checks import run_checks
from minmove.config import RunConfig
from minmove.diagnostics import (
    audit_energy_estimate,
    fit_rate,
    incremental_orders,
    l2_qt_error,
    positivity_audit,
)
from minmove.errors import ConfigurationError, NonConvergence, NonFiniteEnergy
from minmove.stepper import run

EXIT_OK, EXIT_CHECK, EXIT_INPUT, EXIT_SOLVER = 0, 1, 2, 3

log = logging.getLogger("minmove")


def _g(v):
    return format(float(v), ".17g")


def write_snapshots(path, traj):
    m = traj.isotherm.m_components
    x = traj.grid.nodes
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "x"] + [f"u_{k + 1}" for k in range(m)])
        for n, U in zip(traj.steps, traj.levels):
            t = traj.times[n]
            for xi, row in zip(x, U):
                w.writerow([_g(t), _g(xi)] + [_g(v) for v in row])


def write_diagnostics(path, traj):
    m = traj.isotherm.m_components
    header = ["step", "t", "energy", "cumulative_dirichlet", "min_value"]
    header += [f"mass_{k + 1}" for k in range(m)]
    for k in range(m):
        header += [f"support_left_{k + 1}", f"support_right_{k + 1}", f"gaps_{k + 1}"]
    header += ["iterations", "grad_norm"]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for d in traj.diagnostics:
            row = [d.step, _g(d.time), _g(d.energy), _g(d.cumulative_dirichlet), _g(d.min_value)]
            row += [_g(v) for v in d.mass]
            for s in d.supports:
                if s.empty:
                    row += ["nan", "nan", 0]
                else:
                    row += [_g(s.interval[0]), _g(s.interval[1]), len(s.gaps)]
            if d.step == 0:
                row += [0, _g(0.0)]
            else:
                rep = traj.reports[d.step - 1]
                row += [rep.iterations, _g(rep.grad_norm)]
            w.writerow(row)


def _audit_lines(traj, cfg):
    lines = []
    if traj.has_source:
        lines.append("energy audit: skipped (nonzero source)")
        energy_ok = True
    else:
        audit = audit_energy_estimate(traj)
        energy_ok = audit.passed
        lines.append(
            f"energy audit: {'PASS' if audit.passed else 'FAIL'} "
            f"max_n [E(n) + cumulative Dirichlet(n)] = {_g(audit.lhs)} "
            f"<= bound {_g(audit.bound)} (margin {_g(audit.margin)}, worst step {audit.worst_step})"
        )
    floor = -10.0 * cfg.solver.grad_tol
    min_value = positivity_audit(traj)
    lines.append(
        f"positivity audit: {'PASS' if min_value >= floor else 'FAIL'} "
        f"min value {_g(min_value)} (floor {_g(floor)})"
    )
    iters = [r.iterations for r in traj.reports]
    if iters:
        lines.append(
            f"solver: {len(iters)} steps, iterations max {max(iters)} mean {np.mean(iters):.2f}, "
            f"fallback steps {sum(r.fallback_used for r in traj.reports)}"
        )
    return lines, energy_ok and min_value >= floor


def _load(path):
    try:
        return RunConfig.from_file(path)
    except ConfigurationError as exc:
        log.error("invalid configuration: %s", exc)
        return None


def _prepare_out(cfg, out):
    out_dir = Path(out if out is not None else cfg.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "effective.ini").write_text(cfg.to_ini())
    return out_dir


def cmd_run(config_path, out=None):
    cfg = _load(config_path)
    if cfg is None:
        return EXIT_INPUT
    if cfg.converge is not None:
        log.error("config has a [converge] section; use the converge command")
        return EXIT_INPUT
    try:
        spec = cfg.build_problem()
        out_dir = _prepare_out(cfg, out)
    except ConfigurationError as exc:
        log.error("invalid configuration: %s", exc)
        return EXIT_INPUT
    except OSError as exc:
        log.error("cannot write output: %s", exc)
        return EXIT_INPUT
    try:
        traj = run(spec, cfg.solver, stride=cfg.stride, support_eps=cfg.support_eps)
    except NonConvergence as exc:
        log.error("solver failed at step %s: %s", exc.step, exc)
        return EXIT_SOLVER
    except NonFiniteEnergy as exc:
        log.error("solver failed: %s", exc)
        return EXIT_SOLVER
    lines, ok = _audit_lines(traj, cfg)
    try:
        write_snapshots(out_dir / "snapshots.csv", traj)
        write_diagnostics(out_dir / "diagnostics.csv", traj)
        (out_dir / "report.txt").write_text("\n".join(lines) + "\n")
    except OSError as exc:
        log.error("cannot write output: %s", exc)
        return EXIT_INPUT
    for line in lines:
        log.info(line)
    return EXIT_OK if ok else EXIT_CHECK


def _converge_member(args):
    m, dx, spec, prof, solver = args
    traj = run(spec, solver)
    audit = audit_energy_estimate(traj)
    return m, dx, spec.time.N, l2_qt_error(traj, prof.exact()), audit, positivity_audit(traj)


def cmd_converge(config_path, out=None, jobs=1):
    cfg = _load(config_path)
    if cfg is None:
        return EXIT_INPUT
    if cfg.converge is None:
        log.error("config has no [converge] section")
        return EXIT_INPUT
    try:
        members = [(m, dx, spec, prof, cfg.solver) for m, dx, spec, prof in cfg.sweep_problems()]
        out_dir = _prepare_out(cfg, out)
    except ConfigurationError as exc:
        log.error("invalid configuration: %s", exc)
        return EXIT_INPUT
    except OSError as exc:
        log.error("cannot write output: %s", exc)
        return EXIT_INPUT
    try:
        if jobs > 1:
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                results = list(pool.map(_converge_member, members))
        else:
            results = [_converge_member(a) for a in members]
    except (NonConvergence, NonFiniteEnergy) as exc:
        log.error("solver failed: %s", exc)
        return EXIT_SOLVER

    rates = []
    report = []
    ok = True
    for m in cfg.converge.pme_exponents:
        pts = [(dx, e) for mm, dx, _, e, _, _ in results if mm == m]
        r, c = fit_rate(pts)
        rates.append((m, r, c))
        log.info("m = %g: fitted rate %.4f, prefactor %.4g; incremental orders %s",
                 m, r, c, ", ".join(f"{o:.3f}" for o in incremental_orders(pts)))
    log.info("%8s %10s %6s %24s", "m", "dx", "N", "e2")
    for m, dx, N, e, audit, min_value in results:
        log.info("%8g %10g %6d %24.17g", m, dx, N, e)
        passed = audit.passed and min_value >= -10.0 * cfg.solver.grad_tol
        ok = ok and passed
        report.append(f"m={_g(m)} dx={_g(dx)} N={N}: energy margin {_g(audit.margin)}, "
                      f"min value {_g(min_value)} -> {'PASS' if passed else 'FAIL'}")
    try:
        with open(out_dir / "errors.csv", "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["m", "dx", "e2"])
            for m, dx, _, e, _, _ in results:
                w.writerow([_g(m), _g(dx), _g(e)])
        with open(out_dir / "rates.csv", "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["m", "rate", "prefactor"])
            for m, r, c in rates:
                w.writerow([_g(m), _g(r), _g(c)])
        (out_dir / "report.txt").write_text("\n".join(report) + "\n")
    except OSError as exc:
        log.error("cannot write output: %s", exc)
        return EXIT_INPUT
    return EXIT_OK if ok else EXIT_CHECK


def cmd_validate(out=None, perturb_gradient=0.0):
    results = run_checks(perturb_gradient=perturb_gradient)
    lines = [f"{'PASS' if r.passed else 'FAIL'}  {r.name}: {r.detail}" for r in results]
    for line in lines:
        log.info(line)
    if out is not None:
        try:
            Path(out).mkdir(parents=True, exist_ok=True)
            (Path(out) / "validate.txt").write_text("\n".join(lines) + "\n")
        except OSError as exc:
            log.error("cannot write report: %s", exc)
            return EXIT_INPUT
    failed = [r.name for r in results if not r.passed]
    if failed:
        log.error("failed checks: %s", "; ".join(failed))
        return EXIT_CHECK
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="minmove", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="run one simulation")
    p_run.add_argument("config")
    p_conv = sub.add_parser("converge", help="ZKB convergence study")
    p_conv.add_argument("config")
    p_conv.add_argument("--jobs", type=int, default=1, help="parallel sweep members")
    p_val = sub.add_parser("validate", help="run the built-in identity checks")
    p_val.add_argument("--perturb-gradient", type=float, default=0.0, help=argparse.SUPPRESS)
    for p in (p_run, p_conv, p_val):
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--quiet", action="store_true", help="only print errors")
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    handler = logging.StreamHandler(sys.stderr if args.quiet else sys.stdout)
    handler.setFormatter(logging.Formatter("%(message)s"))
    log.handlers[:] = [handler]
    log.propagate = False
    log.setLevel(logging.ERROR if args.quiet else logging.INFO)
    if args.command == "run":
        return cmd_run(args.config, args.out)
    if args.command == "converge":
        return cmd_converge(args.config, args.out, args.jobs)
    return cmd_validate(args.out, args.perturb_gradient)


if __name__ == "__main__":
    sys.exit(main())
