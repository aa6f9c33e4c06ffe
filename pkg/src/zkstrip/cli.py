"""Command-line surface: scenario dispatch and artifact emission.

Subcommands:
  run <config> [--output-dir DIR]   run the configured experiment
  check-smallness --L --norm-u0 --J0 [--constants=theorem|estimate4]
  lemmas [--output-dir DIR]         run the lemma suite
  version

Exit codes: 0 completed experiment (scientific verdicts live in the reports),
1 solver failure (blowup/nan), 2 configuration violations, 3 unwritable
output directory.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

from . import __version__
from .artifacts import report_envelope, write_json, write_series_csv
from .experiments import (OutsideTheoremError, decay_experiment, epsilon_convergence,
                          lemma_suite, perturbation_experiment, predicted_rates)
from .functionals import j0_functional, smallness_check
from .grid import make_profile
from .integrator import run as run_integrator
from .runconfig import ConfigError, RunConfig, parse_config

EXIT_OK = 0
EXIT_SOLVER = 1
EXIT_CONFIG = 2
EXIT_OUTPUT = 3


def _ensure_outdir(path: str) -> bool:
    try:
        os.makedirs(path, exist_ok=True)
        probe = os.path.join(path, ".write-probe~")
        with open(probe, "w", encoding="utf-8") as fh:
            fh.write("")
        os.unlink(probe)
        return True
    except OSError:
        return False


def _run_summary(result) -> dict:
    return {
        "status": result.status,
        "step_count": result.step_count,
        "max_energy_residual": result.max_energy_residual,
        "energy_within_tol": result.energy_within_tol,
        "snapshots": len(result.series),
    }


def _smallness_for(cfg: RunConfig, ops, grid):
    u0 = make_profile(grid, cfg.profile_spec(grid))
    norm_u0 = math.sqrt(grid.integrate(u0.values ** 2))
    j0 = j0_functional(ops, u0)
    return smallness_check(grid.L, norm_u0, j0), u0


def dispatch(cfg: RunConfig, output_dir: str | None = None) -> int:
    """Run the configured experiment and write its artifacts."""
    outdir = output_dir or cfg.directory
    if not _ensure_outdir(outdir):
        print(f"error: output directory {outdir!r} is not writable", file=sys.stderr)
        return EXIT_OUTPUT

    def out(name):
        return os.path.join(outdir, name)

    if cfg.kind == "lemmas":
        report = lemma_suite(L=cfg.L, seed=cfg.seed)
        doc = report_envelope("lemmas", cfg.raw_text, lemmas=report.to_dict())
        write_json(out("report.json"), doc)
        print(f"lemma suite: {report.n_pass}/{report.n_total} checks passed")
        print(f"wrote {out('report.json')}")
        return EXIT_OK

    grid = cfg.build_grid()
    ops = cfg.build_operators(grid)
    icfg = cfg.integrator_config()
    smallness, u0 = _smallness_for(cfg, ops, grid)
    write_json(out("smallness.json"),
               report_envelope("smallness", cfg.raw_text, smallness=smallness.to_dict()))

    print(f"smallness verdict: {smallness.verdict['overall']} "
          f"(geometry {smallness.verdict['geometry']}, u0 {smallness.verdict['u0']}, "
          f"J0 {smallness.verdict['J0']})")

    if cfg.kind == "single-run":
        result = run_integrator(ops, u0, icfg)
        if "csv" in cfg.formats:
            write_series_csv(out("series.csv"), result.series)
        doc = report_envelope("single-run", cfg.raw_text, run=_run_summary(result),
                              smallness=smallness.to_dict())
        write_json(out("report.json"), doc)
        print(f"run status: {result.status} after {result.step_count} steps; "
              f"max energy residual {result.max_energy_residual:.3e}")
        return EXIT_OK if result.completed else EXIT_SOLVER

    if cfg.kind == "decay":
        try:
            res = decay_experiment(ops, cfg.profile_spec(grid), icfg,
                                   window=cfg.fit_window(),
                                   allow_outside_theorem=cfg.allow_outside_theorem)
        except OutsideTheoremError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        if "csv" in cfg.formats:
            write_series_csv(out("series.csv"), res.run_result.series)
        doc = report_envelope(
            "decay", cfg.raw_text,
            smallness=res.smallness.to_dict(),
            run=_run_summary(res.run_result),
            degenerate=res.degenerate,
            outside_theorem=res.outside_theorem,
            window=list(res.window),
            predicted_rates=predicted_rates(grid.L),
            fits={name: fit.to_dict() for name, fit in res.fits.items()},
            fit_errors=res.fit_errors,
        )
        write_json(out("report.json"), doc)
        if res.degenerate:
            print("degenerate case: zero initial data, no decay fits")
        for name, fit in res.fits.items():
            print(f"  {name:13s} fitted rate {fit.fitted_rate:10.4f}  "
                  f"predicted {fit.predicted_rate:8.4f}  margin {fit.margin:6.2f}  "
                  f"r^2 {fit.r_squared:.5f}")
        status_ok = res.run_result.completed
        print(f"run status: {res.run_result.status}; wrote {out('report.json')}")
        return EXIT_OK if status_ok else EXIT_SOLVER

    if cfg.kind == "epsilon-convergence":
        report = epsilon_convergence(ops, cfg.profile_spec(grid), icfg, cfg.epsilon_list)
        doc = report_envelope("epsilon-convergence", cfg.raw_text,
                              smallness=smallness.to_dict(),
                              convergence=report.to_dict())
        write_json(out("report.json"), doc)
        if report.degenerate:
            print("degenerate case: all regularized runs coincide with the reference")
        else:
            print(f"measured order in epsilon: {report.fitted_order:.3f}")
        return EXIT_OK

    if cfg.kind == "perturbation":
        report = perturbation_experiment(ops, cfg.profile_spec(grid), cfg.perturb_spec(),
                                         icfg, cfg.delta)
        doc = report_envelope("perturbation", cfg.raw_text,
                              smallness=smallness.to_dict(),
                              perturbation=report.to_dict())
        write_json(out("report.json"), doc)
        print(f"delta={report.delta:g}: initial gap {report.initial_gap:.6e}, "
              f"envelope bound satisfied: {report.bound_satisfied}")
        return EXIT_OK

    raise AssertionError(f"unhandled experiment kind {cfg.kind}")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="zkstrip",
                                     description="Strip-domain dispersive solver and "
                                                 "energy-decay verification harness")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run an experiment from a config file")
    p_run.add_argument("config")
    p_run.add_argument("--output-dir", default=None,
                       help="override [output].directory (default ./out)")

    p_small = sub.add_parser("check-smallness", help="evaluate the smallness conditions")
    p_small.add_argument("--L", type=float, required=True)
    p_small.add_argument("--norm-u0", type=float, required=True)
    p_small.add_argument("--J0", type=float, required=True)
    p_small.add_argument("--constants", choices=("theorem", "estimate4"),
                         default="theorem")

    p_lem = sub.add_parser("lemmas", help="run the lemma verification suite")
    p_lem.add_argument("--output-dir", default="./out")

    sub.add_parser("version", help="print the package version")

    args = parser.parse_args(argv)

    if args.command == "version":
        print(__version__)
        return EXIT_OK

    if args.command == "check-smallness":
        try:
            report = smallness_check(args.L, args.norm_u0, args.J0,
                                     constants=args.constants)
        except ValueError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        print(json.dumps(report.to_dict(), indent=2))
        return EXIT_OK

    if args.command == "lemmas":
        if not _ensure_outdir(args.output_dir):
            print(f"error: output directory {args.output_dir!r} is not writable",
                  file=sys.stderr)
            return EXIT_OUTPUT
        report = lemma_suite()
        write_json(os.path.join(args.output_dir, "report.json"),
                   report_envelope("lemmas", None, lemmas=report.to_dict()))
        print(f"lemma suite: {report.n_pass}/{report.n_total} checks passed")
        return EXIT_OK

    # run
    try:
        cfg = parse_config(args.config)
    except ConfigError as exc:
        for v in exc.violations:
            print(f"config error: {v}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return dispatch(cfg, output_dir=args.output_dir)


if __name__ == "__main__":
    sys.exit(main())
