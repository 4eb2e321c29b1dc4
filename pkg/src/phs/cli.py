"""Command-line front end.

    phs check <config|fixture> [--out DIR]
    phs simulate <config|fixture> [--out DIR]
    phs properties <config|fixture> --suite NAME [--seed K] [--out FILE]
    phs fixtures list
    phs fixtures show <name>

Exit codes: 0 success (generator, audit passed, all properties passed),
2 the boundary condition does not generate a C0-semigroup,
1 any other failure (bad config, failed audit or property, runtime error).
The environment variable PHS_THREADS caps worker threads; ``--threads`` sets it.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path

import numpy as np

from .config import (SystemConfig, build_control_system, build_grid, build_initial_state, build_input,
                     build_system, dumps_config, load_config)
from .control import dumps_report, energy_audit, prepare, result_to_report, simulate
from .errors import ConfigError, NotAGeneratorError, PHSError
from .fixtures import FIXTURES, fixture, list_fixtures
from .hamiltonian import check_generation
from .properties import SUITES, run_suite
from .statespace import write_snapshot_csv

EXIT_OK, EXIT_ERROR, EXIT_NOT_GENERATOR = 0, 1, 2


def resolve_config(target: str) -> SystemConfig:
    """A config file path, or the name of a built-in fixture."""
    path = Path(target)
    if path.is_file():
        return load_config(path)
    if target in FIXTURES:
        return fixture(target).config
    raise ConfigError(f"{target!r} is neither a config file nor a fixture "
                      f"(fixtures: {', '.join(FIXTURES)})")


def _write_json(path: Path, data: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps_report(data) + "\n")


def cmd_check(cfg: SystemConfig, out: Path) -> int:
    phs = build_system(cfg)
    report = check_generation(phs)
    data = {"name": cfg.name, **report.to_dict()}
    _write_json(out / "report.json", data)
    print(f"{cfg.name}: {report.verdict} (n_plus={report.n_plus}, n_minus={report.n_minus}, "
          f"sigma_min(U2)={report.sigma_min_U2:.3e}, rank check "
          f"{'agrees' if report.cross_check_agrees else 'DISAGREES'})")
    for note in report.notes:
        print(f"  note: {note}")
    if report.generator:
        return EXIT_OK
    return EXIT_NOT_GENERATOR if report.verdict == "not-generator" else EXIT_ERROR


def write_timeseries(path: Path, result, audit) -> None:
    q = result.y.shape[1]
    res = np.full(result.times.size, np.nan)
    if audit is not None and audit.residuals.size:
        res[1:-1] = audit.residuals
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        header = ["t"]
        for j in range(q):
            header += [f"re_y_{j}", f"im_y_{j}"]
        writer.writerow(header + ["energy_x", "energy_g", "audit_residual"])
        for k, t in enumerate(result.times):
            row = [repr(float(t))]
            for v in result.y[k]:
                row += [repr(float(v.real)), repr(float(v.imag))]
            row += [repr(float(result.energy_x[k])), repr(float(result.energy_g[k])), repr(float(res[k]))]
            writer.writerow(row)


def write_snapshots(directory: Path, snapshots) -> None:
    """One statespace CSV per stored time plus ``index.csv`` mapping files to times."""
    directory.mkdir(parents=True, exist_ok=True)
    with open(directory / "index.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "file"])
        for k, (t, state) in enumerate(snapshots):
            name = f"snapshot_{k:04d}.csv"
            write_snapshot_csv(directory / name, state)
            writer.writerow([repr(t), name])


def cmd_simulate(cfg: SystemConfig, out: Path) -> int:
    if cfg.simulation is None:
        raise ConfigError("config has no [simulation] section")
    phs = build_system(cfg)
    bcs = build_control_system(cfg, phs)
    if bcs is None:
        raise ConfigError("system.W_B1: simulation needs at least one controlled boundary row")
    grid = build_grid(cfg)
    try:
        prep = prepare(bcs, grid)
    except NotAGeneratorError as exc:
        _write_json(out / "report.json", {"name": cfg.name, "error": str(exc),
                                          "generation": exc.report.to_dict()})
        print(f"{cfg.name}: refused, {exc}", file=sys.stderr)
        return EXIT_NOT_GENERATOR
    sim = cfg.simulation
    x0 = build_initial_state(cfg, grid)
    result = simulate(bcs, x0, build_input(cfg), sim["T"], sim["dt"], sim["snapshots"], prep=prep)
    audit = energy_audit(result, cfg.tolerances["audit_constant"])
    out.mkdir(parents=True, exist_ok=True)
    write_timeseries(out / "timeseries.csv", result, audit)
    write_snapshots(out / "snapshots", result.snapshots)
    _write_json(out / "report.json", {"name": cfg.name, **result_to_report(result, audit)})
    print(f"{cfg.name}: {result.meta['steps']} steps of {result.dt:.3g} ({result.mode}, {result.status}); "
          f"audit max residual {audit.max_residual:.3e} vs bound {audit.bound:.3e} "
          f"{'pass' if audit.passed else 'FAIL'}")
    return EXIT_OK if audit.passed else EXIT_ERROR


def cmd_properties(cfg: SystemConfig, suite: str, seed: int, out: Path | None) -> int:
    phs = build_system(cfg)
    results = run_suite(suite, phs, seed)
    data = {"name": cfg.name, "suite": suite, "seed": seed, "passed": all(r.passed for r in results),
            "suites": [r.to_dict() for r in results]}
    if out is not None:
        _write_json(out, data)
    for r in results:
        for p in r.properties:
            print(f"{'PASS' if p['passed'] else 'FAIL'}  {r.suite}.{p['name']}  "
                  f"residual={p['residual']:.3e}  tol={p['tol']:.1e}")
    return EXIT_OK if data["passed"] else EXIT_ERROR


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="phs", description="Port-Hamiltonian systems on the half-line")
    ap.add_argument("--threads", type=int, default=None, help="cap on worker threads (sets PHS_THREADS)")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="generation verdict and report.json")
    p.add_argument("target", help="config file or fixture name")
    p.add_argument("--out", type=Path, default=Path("phs-out"), help="output directory")

    p = sub.add_parser("simulate", help="simulate and audit the energy balance")
    p.add_argument("target", help="config file or fixture name")
    p.add_argument("--out", type=Path, default=Path("phs-out"), help="output directory")

    p = sub.add_parser("properties", help="run a seeded property suite")
    p.add_argument("target", help="config file or fixture name")
    p.add_argument("--suite", required=True, choices=SUITES + ("all",))
    p.add_argument("--seed", type=int, default=None, help="seed (default: the config's seed)")
    p.add_argument("--out", type=Path, default=None, help="JSON report file")

    p = sub.add_parser("fixtures", help="built-in example systems")
    fx = p.add_subparsers(dest="action", required=True)
    fx.add_parser("list", help="list fixture names")
    show = fx.add_parser("show", help="print a fixture as a config file")
    show.add_argument("name", choices=list(FIXTURES))
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.threads is not None:
        os.environ["PHS_THREADS"] = str(max(1, args.threads))
    try:
        if args.command == "fixtures":
            if args.action == "list":
                for name, desc in list_fixtures():
                    print(f"{name:28s} {desc}")
            else:
                sys.stdout.write(dumps_config(fixture(args.name).config))
            return EXIT_OK
        cfg = resolve_config(args.target)
        if args.command == "check":
            return cmd_check(cfg, args.out)
        if args.command == "simulate":
            return cmd_simulate(cfg, args.out)
        seed = cfg.seed if args.seed is None else args.seed
        return cmd_properties(cfg, args.suite, seed, args.out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except PHSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
