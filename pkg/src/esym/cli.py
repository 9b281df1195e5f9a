"""Command-line surface.

Subcommands: list (built-in scenarios), run (a config file), verify
(invariant suites), export (reshape a trajectory JSON).  Exit codes are the
machine contract: 0 success, 1 configuration error, 2 truncated run
(left_region or step_underflow; partial records are still written).
ESYM_LOG controls verbosity (debug/info/warning).
"""

import argparse
import json
import logging
import os
import sys
from pathlib import Path


from . import __version__
from .config import load_config, resolve
from .errors import ConfigError, EsymError
from .integrator import integrate, invariant_report
from .io import (read_trajectory_json, write_plot_csv, write_plot_svg,
                 write_report_json, write_trajectory_csv, write_trajectory_json)
from .scenarios import SCENARIO_BUILDERS, build_scenario, calogero_identity_report

log = logging.getLogger("esym")


def _setup_logging():
    level = os.environ.get("ESYM_LOG", "warning").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")


def cmd_list(args):
    entries = []
    for name in sorted(SCENARIO_BUILDERS):
        spec = build_scenario(name)
        entries.append({
            "name": name,
            "kind": spec.kind,
            "state_dim": spec.dim,
            "state_names": list(spec.state_names),
            "provenance": spec.provenance,
        })
    if args.json:
        print(json.dumps(entries, indent=1))
        return 0
    width = max(len(e["name"]) for e in entries)
    for e in entries:
        dim = f"dim {e['state_dim']}" if e["state_dim"] else "identity"
        print(f"{e['name']:<{width}}  {dim:<9}  {e['provenance']}")
    return 0


def cmd_run(args):
    try:
        run = resolve(load_config(args.config))
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 1
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    formats = [args.format] if args.format in ("csv", "json") else None
    if args.format == "both":
        formats = ["csv", "json"]
    if formats is None:
        formats = run.outputs["formats"]
    plots = run.outputs["plots"] + [tuple(p.split(":")) for p in (args.plot or [])]
    seed = run.seed if args.seed is None else args.seed
    spec = run.spec
    meta = {"scenario": spec.name, "provenance": spec.provenance, "seed": seed,
            "config": run.echo, "version": __version__}

    if spec.kind == "identity":
        report = calogero_identity_report(seed=seed,
                                          n_values=spec.params.get("n_values", (2, 3, 4)))
        report.update(meta)
        write_report_json(out_dir / "report.json", report)
        print(f"identity check: max relative disagreement "
              f"{report['max_rel_disagreement']:.3e}")
        return 0 if report["max_rel_disagreement"] < 1e-10 else 2

    log.info("running scenario %s for T=%s", spec.name, run.integrator.horizon)
    from .errors import IntegrationAbort

    try:
        traj = integrate(spec.field, spec.state0, run.integrator,
                         region=spec.region, monitors=spec.monitors, meta=meta)
    except IntegrationAbort as err:
        print(f"integration aborted: {err} (t={err.t}, state={err.state})",
              file=sys.stderr)
        return 2
    except EsymError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 1
    report = {"status": traj.status, "samples": len(traj.times),
              "invariants": invariant_report(traj)}
    report.update(meta)
    if "csv" in formats:
        write_trajectory_csv(out_dir / "trajectory.csv", traj, spec.state_names)
    if "json" in formats:
        write_trajectory_json(out_dir / "trajectory.json", traj, spec.state_names,
                              meta=meta)
    write_report_json(out_dir / "report.json", report)
    from .io import trajectory_rows

    columns, rows = trajectory_rows(traj, spec.state_names)
    for pair in plots:
        stem = f"plot_{pair[0]}_{pair[1]}"
        write_plot_csv(out_dir / f"{stem}.csv", columns, rows, pair)
        if args.svg or run.outputs["svg"]:
            write_plot_svg(out_dir / f"{stem}.svg", columns, rows, pair)
    print(f"status: {traj.status}; {len(traj.times)} samples -> {out_dir}")
    if traj.status != "completed":
        return 2
    return 0


def cmd_verify(args):
    from .verify import run as run_suites

    try:
        checks = run_suites(scope=args.scope, seed=args.seed or 1234,
                            quick=args.quick)
    except ValueError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    rows = [c.row() for c in checks]
    if args.json:
        print(json.dumps([{"suite": s, "check": n, "measured": m, "tolerance": t,
                           "passed": p} for s, n, m, t, p in rows], indent=1))
    else:
        width = max(len(f"{s}:{n}") for s, n, m, t, p in rows)
        for s, n, m, t, p in rows:
            mark = "pass" if p else "FAIL"
            print(f"[{mark}] {s + ':' + n:<{width}}  measured {m:.3e}  tol {t:.1e}")
        failed = sum(1 for r in rows if not r[4])
        print(f"{len(rows) - failed}/{len(rows)} checks passed")
    return 0 if all(r[4] for r in rows) else 1


def cmd_export(args):
    try:
        payload = read_trajectory_json(args.input)
    except (OSError, json.JSONDecodeError) as err:
        print(f"config error: cannot read {args.input}: {err}", file=sys.stderr)
        return 1
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    columns, rows = payload["columns"], payload["rows"]
    if args.format == "csv":
        import csv as csv_mod

        path = out_dir / (Path(args.input).stem + ".csv")
        with open(path, "w", newline="") as handle:
            writer = csv_mod.writer(handle)
            writer.writerow(columns)
            for row in rows:
                writer.writerow([f"{float(v):.17g}" for v in row])
        print(f"wrote {path}")
    for pair_text in args.plot or []:
        pair = tuple(pair_text.split(":"))
        if len(pair) != 2:
            print(f"config error: plot pair '{pair_text}' must be 'a:b'", file=sys.stderr)
            return 1
        stem = f"plot_{pair[0]}_{pair[1]}"
        try:
            write_plot_csv(out_dir / f"{stem}.csv", columns, rows, pair)
        except KeyError as err:
            print(f"config error: {err}", file=sys.stderr)
            return 1
        if args.svg:
            write_plot_svg(out_dir / f"{stem}.svg", columns, rows, pair)
        print(f"wrote {out_dir / (stem + '.csv')}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="esym",
        description="Hamiltonian mechanics on singular tangent structures")
    sub = parser.add_subparsers(dest="command", required=True)

    p_list = sub.add_parser("list", help="list built-in scenarios")
    p_list.add_argument("--json", action="store_true", help="machine-readable output")
    p_list.set_defaults(fn=cmd_list)

    p_run = sub.add_parser("run", help="run a config file")
    p_run.add_argument("--config", required=True, help="TOML run configuration")
    p_run.add_argument("--out", default="out", help="output directory")
    p_run.add_argument("--format", choices=("csv", "json", "both"), default=None)
    p_run.add_argument("--seed", type=int, default=None)
    p_run.add_argument("--plot", action="append", metavar="A:B",
                       help="emit a two-column series (repeatable)")
    p_run.add_argument("--svg", action="store_true", help="also render plots as SVG")
    p_run.set_defaults(fn=cmd_run)

    p_verify = sub.add_parser("verify", help="run invariant suites")
    p_verify.add_argument("scope", nargs="?", default="all",
                          help="all, a module name or a scenario name")
    p_verify.add_argument("--seed", type=int, default=None)
    p_verify.add_argument("--json", action="store_true")
    p_verify.add_argument("--quick", action="store_true",
                          help="smaller sample counts")
    p_verify.set_defaults(fn=cmd_verify)

    p_export = sub.add_parser("export", help="reshape a trajectory JSON")
    p_export.add_argument("--input", required=True, help="trajectory.json path")
    p_export.add_argument("--out", default="out")
    p_export.add_argument("--format", choices=("csv", "none"), default="csv")
    p_export.add_argument("--plot", action="append", metavar="A:B")
    p_export.add_argument("--svg", action="store_true")
    p_export.set_defaults(fn=cmd_export)
    return parser


def main(argv=None):
    _setup_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.fn(args)


def script_entry():
    sys.exit(main())
