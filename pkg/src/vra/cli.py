"""Command-line front end: run scenarios, suites, sweeps, and trace metrics."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .harness import (
    EXIT_CONFIG,
    EXIT_ERROR,
    EXIT_NOTHING_TO_RUN,
    EXIT_OK,
    ConfigError,
    boundary_window,
    load_scenario,
    metrics_for_trace,
    near_boundary_metrics,
    realizable_fraction,
    run_experiment_suite,
    run_scenario,
    sweep_scenario,
)
from .plant import Trace


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", type=Path, default=Path("out"), help="output directory")
    p.add_argument("--seed", type=int, default=None, help="override scenario seed")
    p.add_argument("--controller", default=None, help="override controller id")
    p.add_argument("--dt-p", type=float, default=None, help="override reasoning step")


def _print_metrics(name: str, trace: Trace) -> None:
    frac = realizable_fraction(trace)
    print(f"{name}: steps={len(trace)} realizable_fraction={frac:.4f}")
    m = metrics_for_trace(trace)
    if m is None:
        print(f"{name}: no boundary approach; no near-boundary metrics")
        return
    print(
        f"{name}: success={'yes' if m.success else 'no'} "
        f"dqd_max={m.dqd_max:.4g} dqd_rms={m.dqd_rms:.4g} "
        f"dtau_rms={m.dtau_rms:.4g} f_zc={m.f_zc:.4g}"
    )


def cmd_run(args: argparse.Namespace) -> int:
    sc = load_scenario(args.scenario)
    traces = run_scenario(
        sc,
        controller_override=args.controller,
        seed_override=args.seed,
        dt_p_override=args.dt_p,
    )
    args.out.mkdir(parents=True, exist_ok=True)
    for trial, trace in enumerate(traces):
        path = args.out / f"{sc.name}_trial{trial}.csv"
        trace.to_csv(path)
        if args.full_diagnostics:
            trace.write_diagnostics_csv(args.out / f"{sc.name}_trial{trial}_diag.csv")
        _print_metrics(f"{sc.name}[{trial}]", trace)
        print(f"{sc.name}[{trial}]: trace written to {path}")
    return EXIT_OK


def cmd_suite(args: argparse.Namespace) -> int:
    report = run_experiment_suite(
        args.config_dir,
        args.out,
        emit_gnuplot=args.emit_gnuplot,
        full_diagnostics=args.full_diagnostics,
    )
    for name, err in report.errors.items():
        print(f"error in {name}: {err}", file=sys.stderr)
    for agg in report.aggregate():
        success = agg["success"]
        tag = "-" if success is None else ("yes" if success else "no")
        print(
            f"{agg['scenario']:28s} {agg['controller']:10s} dt_p={agg['dt_p']:<6g} "
            f"success={tag:3s} realizable={agg['realizable_fraction']:.3f} "
            f"dtau_rms={agg['dtau_rms']:.4g}"
        )
    for name, same in report.identical_trials.items():
        if same:
            print(f"note: {name}: all trials identical (same seed)")
    if report.status == "nothing to run":
        print("nothing to run")
        return EXIT_NOTHING_TO_RUN
    print(f"report written to {args.out}")
    return EXIT_ERROR if report.errors else EXIT_OK


def cmd_metrics(args: argparse.Namespace) -> int:
    trace = Trace.from_csv(args.trace)
    if trace.joint is None:
        print(
            "trace has no parameter sidecar (.meta.json); metrics need it",
            file=sys.stderr,
        )
        return EXIT_CONFIG
    _print_metrics(Path(args.trace).stem, trace)
    window = boundary_window(trace)
    if window is not None:
        m = near_boundary_metrics(trace, window)
        t0 = trace["time"][window[0]]
        t1 = trace["time"][min(window[1], len(trace) - 1)]
        print(f"window: steps {window[0]}..{window[1]} (t={t0:.3f}..{t1:.3f} s)")
        print(f"window realizable_fraction={m.realizable_fraction:.4f}")
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace) -> int:
    sc = load_scenario(args.scenario)
    values = [float(v) for v in args.values.split(",")]
    args.out.mkdir(parents=True, exist_ok=True)
    for v, trace in sweep_scenario(sc, args.param, values):
        path = args.out / f"{sc.name}_{args.param.replace('.', '_')}_{v:g}.csv"
        trace.to_csv(path)
        top_speed = float(abs(trace["qd"]).max())
        frac = realizable_fraction(trace)
        print(
            f"{args.param}={v:g}: top_speed={top_speed:.4f} rad/s "
            f"realizable_fraction={frac:.4f} -> {path}"
        )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="vra",
        description="Voltage-realizable acceleration toolkit: scenario runner, "
        "experiment suite, and trace metrics.",
    )
    sub = p.add_subparsers(dest="command", required=True)

    pr = sub.add_parser("run", help="run one scenario file")
    pr.add_argument("scenario", type=Path)
    _add_common(pr)
    pr.add_argument("--emit-gnuplot", action="store_true")
    pr.add_argument("--full-diagnostics", action="store_true",
                    help="write the per-step feasibility sidecar CSV")
    pr.set_defaults(fn=cmd_run)

    ps = sub.add_parser("suite", help="run every scenario in a directory")
    ps.add_argument("config_dir", type=Path)
    ps.add_argument("--out", type=Path, default=Path("out"))
    ps.add_argument("--emit-gnuplot", action="store_true")
    ps.add_argument("--full-diagnostics", action="store_true")
    ps.set_defaults(fn=cmd_suite)

    pm = sub.add_parser("metrics", help="recompute metrics from a trace CSV")
    pm.add_argument("trace", type=Path)
    pm.set_defaults(fn=cmd_metrics)

    pw = sub.add_parser("sweep", help="sweep one scenario parameter")
    pw.add_argument("scenario", type=Path)
    pw.add_argument("--param", required=True, help="dotted config path, e.g. motor.v_limit")
    pw.add_argument("--values", required=True, help="comma-separated values")
    pw.add_argument("--out", type=Path, default=Path("out"))
    pw.set_defaults(fn=cmd_sweep)

    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, ValueError, RuntimeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    raise SystemExit(main())
