"""Command-line front end: scenario files in, CSV traces and JSON summaries out.

Subcommands:
  run <scenario.toml> --out DIR     single run -> trace.csv + summary.json
  sweep <scenario.toml> --axis A --values V1,V2,...   summary table
  presets                           list built-in scenario presets
  repro fig1|fig2|figA1 --out DIR   run a named benchmark bundle

Exit codes: 0 success, 1 configuration error, 2 numerical abort.
"""
from __future__ import annotations

import argparse
import copy
import dataclasses
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .engine import Scenario, ScenarioResult, sweep
from .errors import FreqestError, NonFiniteState
from .scenario import (
    PRESET_NOTES,
    PRESETS,
    build_scenario,
    load_scenario_file,
    preset_scenario,
    scenario_to_dict,
)

#: bump when the CSV column layout changes
TRACE_FORMAT_VERSION = 1


def emit_trace(result: ScenarioResult, path) -> None:
    """Write the recorded trace as CSV: header row, one line per sample, %.9g."""
    path = Path(path)
    names = result.column_names()
    data = result.column_data()
    with open(path, "w", newline="") as fh:
        fh.write(",".join(names) + "\n")
        if result.rows:
            np.savetxt(fh, np.column_stack(data), fmt="%.9g", delimiter=",")


def summary_dict(result: ScenarioResult, sc: Scenario) -> dict:
    return {
        "freqest_version": __version__,
        "trace_format": TRACE_FORMAT_VERSION,
        "rows": result.rows,
        "columns": result.column_names(),
        "settle_tol": result.settle_tol,
        "settling_times": result.settling_times,
        "final_errors": result.final_errors,
        "branch_switches": result.branch_switches,
        "config": scenario_to_dict(sc),
    }


def emit_summary(result: ScenarioResult, sc: Scenario, path) -> None:
    with open(path, "w") as fh:
        json.dump(summary_dict(result, sc), fh, indent=2, sort_keys=True)
        fh.write("\n")


def emit_gnuplot(result: ScenarioResult, csv_path, path) -> None:
    """Ready-to-run gnuplot script plotting the estimate columns against time."""
    names = result.column_names()
    plots = []
    for col in ("w_hat", "w_hat_baseline", "w_true"):
        if col in names:
            plots.append(f"'{Path(csv_path).name}' using 1:{names.index(col) + 1} with lines title '{col}'")
    script = "\n".join(
        [
            "set datafile separator ','",
            "set xlabel 'time [s]'",
            "set ylabel 'frequency estimate [rad/s]'",
            "set key right bottom",
            "plot \\",
            ", \\\n".join("  " + p for p in plots),
            "pause -1",
        ]
    )
    Path(path).write_text(script + "\n")


def _apply_overrides(sc: Scenario, args) -> Scenario:
    sim = sc.sim
    changes = {}
    if args.dt is not None:
        changes["dt"] = args.dt
    if args.horizon is not None:
        changes["horizon"] = args.horizon
    if args.scheme is not None:
        changes["scheme"] = args.scheme
    if args.stride is not None:
        changes["record_stride"] = args.stride
    if changes:
        sc = sc.replace(sim=dataclasses.replace(sim, **changes))
    return sc


def _run_and_emit(sc: Scenario, out: Path, stem: str, gnuplot: bool) -> ScenarioResult:
    out.mkdir(parents=True, exist_ok=True)
    result = sc.run()
    csv_path = out / f"{stem}.csv"
    emit_trace(result, csv_path)
    emit_summary(result, sc, out / f"{stem}_summary.json")
    if gnuplot:
        emit_gnuplot(result, csv_path, out / f"{stem}.gnuplot")
    report = ", ".join(
        f"{name}: settling={result.settling_times[name]:g}s final_err={result.final_errors[name]:.3g}"
        for name in sc.sim.estimators
    )
    print(f"{stem}: rows={result.rows} {report}")
    return result


def cmd_run(args) -> int:
    sc = _apply_overrides(load_scenario_file(args.scenario), args)
    _run_and_emit(sc, Path(args.out), Path(args.scenario).stem, args.gnuplot)
    return 0


def cmd_sweep(args) -> int:
    sc = _apply_overrides(load_scenario_file(args.scenario), args)
    values = [float(v) for v in args.values.split(",") if v.strip()]
    rows = sweep(sc, args.axis, values)
    header = f"{'value':>14}  {'settling[s]':>24}  {'final_err':>24}  switches"
    print(header)
    for row in rows:
        st = " ".join(f"{k}={v:g}" for k, v in row.settling_times.items())
        fe = " ".join(f"{k}={v:.3g}" for k, v in row.final_errors.items())
        print(f"{row.value:>14g}  {st:>24}  {fe:>24}  {row.branch_switches}")
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        payload = {
            "axis": args.axis,
            "values": values,
            "rows": [dataclasses.asdict(r) for r in rows],
            "config": scenario_to_dict(sc),
        }
        with open(out / "sweep.json", "w") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")
    return 0


def cmd_presets(args) -> int:
    for name in PRESETS:
        print(f"{name:24} {PRESET_NOTES.get(name, '')}")
    return 0


def _fig_bundle(which: str) -> list[tuple[str, Scenario]]:
    """Scenario list for a named reproduction bundle."""
    if which in ("fig1", "fig2"):
        prop = "fig2-proposed" if which == "fig2" else "fig1-proposed"
        runs = []
        for label, scale in (("small", 1.0), ("large", 5e6)):
            d = copy.deepcopy(PRESETS[prop])
            d["baseline"] = copy.deepcopy(PRESETS["fig1-baseline-mfile"]["baseline"])
            d["baseline"]["h0"] = scale
            d["estimator"]["zeta0"] = scale
            d["sim"]["estimators"] = ["proposed", "baseline"]
            d["sim"]["horizon"] = 40.0
            d["sim"]["record_stride"] = 1000
            d["name"] = f"{which}-{label}"
            runs.append((f"{which}_{label}", build_scenario(d)))
        return runs
    if which == "figA1":
        return [(f"figA1_{label}", preset_scenario(f"figA1-{label}")) for label in "abcde"]
    raise FreqestError(f"unknown figure bundle {which!r}")


def cmd_repro(args) -> int:
    out = Path(args.out)
    for stem, sc in _fig_bundle(args.figure):
        sc = _apply_overrides(sc, args)
        _run_and_emit(sc, out, stem, args.gnuplot)
    return 0


def _add_overrides(p: argparse.ArgumentParser) -> None:
    p.add_argument("--dt", type=float, default=None, help="override step size")
    p.add_argument("--horizon", type=float, default=None, help="override horizon [s]")
    p.add_argument("--scheme", choices=("euler", "rk4"), default=None, help="override scheme")
    p.add_argument("--stride", type=int, default=None, help="override record stride")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="freqest", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"freqest {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run one scenario file")
    p.add_argument("scenario", help="TOML scenario file")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--gnuplot", action="store_true", help="also emit a gnuplot script")
    _add_overrides(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="run a scenario over a parameter axis")
    p.add_argument("scenario")
    p.add_argument("--axis", required=True, help="one of zeta0, h0, eta, dt, r")
    p.add_argument("--values", required=True, help="comma-separated values")
    p.add_argument("--out", default=None, help="optional output directory for sweep.json")
    _add_overrides(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("presets", help="list built-in presets")
    p.set_defaults(func=cmd_presets)

    p = sub.add_parser("repro", help="run a named benchmark bundle")
    p.add_argument("figure", choices=("fig1", "fig2", "figA1"))
    p.add_argument("--out", required=True)
    p.add_argument("--gnuplot", action="store_true")
    _add_overrides(p)
    p.set_defaults(func=cmd_repro)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except NonFiniteState as exc:
        print(f"numerical abort: {exc}", file=sys.stderr)
        return 2
    except (FreqestError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
