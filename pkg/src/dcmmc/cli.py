"""Command-line front end: simulate / design / loss / sweep."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import yaml

from . import scenario as sc
from .sim import SimulationError


def _add_scenario_arg(p: argparse.ArgumentParser) -> None:
    p.add_argument("scenario", help="scenario YAML file or shipped preset name "
                   f"({', '.join(sc.preset_names())})")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="dcmmc",
        description="Simulation and design studies of a diode-clamped "
                    "modular multilevel converter leg with displaced "
                    "phase-shifted carriers.")
    sub = p.add_subparsers(dest="command", required=True)

    ps = sub.add_parser("simulate", help="run one scenario and write trace/reports")
    _add_scenario_arg(ps)
    ps.add_argument("--delta-a", type=float, default=None,
                    help="override the final displacement value")
    ps.add_argument("--duration", type=float, default=None,
                    help="override simulated seconds")
    ps.add_argument("--delay", choices=["none", "zero_order_hold"], default=None,
                    help="override the reference delay model")
    ps.add_argument("--out", default=None,
                    help="output directory (default runs/<scenario name>)")

    pd = sub.add_parser("design", help="evaluate the balancing design rules")
    _add_scenario_arg(pd)
    pd.add_argument("--tolerance", type=float, default=None,
                    help="capacitor tolerance fraction (default: scenario's "
                         "mismatch tolerance, else 0)")
    pd.add_argument("--delta-a", type=float, default=None,
                    help="displacement to size for (default: scenario's final value)")
    pd.add_argument("--u-diff-max", type=float, default=None,
                    help="allowed inter-module voltage difference in volts "
                         "(default: 1%% of the nominal module voltage)")
    pd.add_argument("--i-d-max", type=float, default=None,
                    help="clamp diode current rating in amps (default: 10x the "
                         "average balancing current)")
    pd.add_argument("--out", default=None, help="write the report here instead of stdout")

    pl = sub.add_parser("loss", help="closed-form loss report (no simulation)")
    _add_scenario_arg(pl)
    pl.add_argument("--delta-a", type=float, default=None,
                    help="displacement for the balancing terms "
                         "(default: scenario's final value)")
    pl.add_argument("--out", default=None, help="write the report here instead of stdout")

    pw = sub.add_parser("sweep", help="run the scenario across one parameter axis")
    _add_scenario_arg(pw)
    pw.add_argument("--axis", required=True, choices=list(sc.SWEEP_AXES))
    pw.add_argument("--values", required=True,
                    help="comma-separated axis values, e.g. 0,0.002,0.01")
    pw.add_argument("--out", default=None,
                    help="output directory (default runs/<scenario name>-<axis>)")
    pw.add_argument("--workers", type=int, default=1, help="parallel processes")
    return p


def _cmd_simulate(args) -> int:
    spec = sc.parse_scenario(args.scenario)
    out = Path(args.out) if args.out else Path("runs") / spec.name
    res = sc.run(spec, out_dir=out, delta_a=args.delta_a,
                 duration=args.duration, delay_model=args.delay)
    tr = res.trace
    if not tr.ok:
        why = "unresolved diode conduction pattern" if tr.status == 1 else "non-finite state"
        print(f"simulation failed at t = {tr.fail_time:.6f} s: {why}", file=sys.stderr)
        print(f"truncated outputs in {out}", file=sys.stderr)
        return 2
    print(f"completed {tr.time[-1]:.3f} s, wrote {', '.join(res.files)} to {out}")
    if res.metrics is not None:
        m = res.metrics
        conv = "never" if m.convergence_time is None else f"{m.convergence_time:.3f} s"
        print(f"spread_final = {m.spread_final:.5f} of nominal, "
              f"convergence at {conv}, thd = {m.thd_voltage}")
    return 0


def _cmd_design(args) -> int:
    spec = sc.parse_scenario(args.scenario)
    tree = sc.design_report_tree(spec, capacitor_tolerance=args.tolerance,
                                 delta_a=args.delta_a,
                                 u_diff_max=args.u_diff_max, i_d_max=args.i_d_max)
    text = yaml.safe_dump(tree, sort_keys=False)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def _cmd_loss(args) -> int:
    spec = sc.parse_scenario(args.scenario)
    tree = sc.analytic_loss_report(spec, delta_a=args.delta_a)
    text = yaml.safe_dump(tree, sort_keys=False)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def _cmd_sweep(args) -> int:
    spec = sc.parse_scenario(args.scenario)
    try:
        values = [float(v) for v in args.values.split(",") if v.strip() != ""]
    except ValueError:
        print(f"--values must be comma-separated numbers, got '{args.values}'",
              file=sys.stderr)
        return 2
    out = Path(args.out) if args.out else Path("runs") / f"{spec.name}-{args.axis}"
    rows = sc.sweep(spec, args.axis, values, out_dir=out, workers=args.workers)
    print(f"{args.axis:>16}  {'status':<8} {'spread':>10} {'conv_s':>8} "
          f"{'loss_W':>12} {'bal_W':>10}")
    for r in rows:
        print(f"{r['value']:>16.6g}  {r['status'][:8]:<8} {r['spread_final']:>10.4g} "
              f"{r['convergence_time_s']:>8.4g} {r['total_loss_W']:>12.6g} "
              f"{r['balancing_loss_W']:>10.4g}")
    print(f"wrote sweep.csv, sweep.yaml to {out}")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {"simulate": _cmd_simulate, "design": _cmd_design,
                "loss": _cmd_loss, "sweep": _cmd_sweep}
    try:
        return handlers[args.command](args)
    except sc.ScenarioError as exc:
        print(f"scenario error: {exc}", file=sys.stderr)
        return 2
    except SimulationError as exc:
        print(f"simulation error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
