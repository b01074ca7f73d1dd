"""
Command-line front end.

    encircle run      --scenario S --out DIR [--set k=v ...] [--no-plots] [--stride N]
    encircle bounds   --scenario S [--set k=v ...] [--epsilon-d E] [--t1-d T]
    encircle compare  --scenario S --out DIR [--set k=v ...]
    encircle sweep    --scenario S --out DIR --key gains.k_e --values 6,8,12
    encircle plot     --csv DIR/telemetry.csv [--out DIR]

Exit codes: 0 success, 1 unreadable or invalid scenario (or unusable
gains for ``bounds``), 2 numerical blowup. Bound violations and an empty
bound set are reported in the outputs, not fatal.
"""

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from .analysis.metrics import dithering_metric, settling_time
from .analysis.report import bound_report, exponent_note
from .control.enclosing import relative_state
from .errors import DegenerateRadius, GainTooSmall, Infeasible, NumericalBlowup, ScenarioError
from .estimators.bounds import (
    initial_estimator_lyapunov,
    real_error_bounds,
    round_up_odd_ratio,
    theoretical_bounds,
    tune_alpha1,
    z_settling_bound,
)
from .estimators.estimator import local_observation
from .scenario.scenario import REFERENCE_SCENARIO_PATH, Scenario, apply_overrides, read_raw
from .simulation.engine import Simulator
from .simulation.sweep import run_sweep
from .telemetry.csv_export import write_telemetry_csv
from .telemetry.plots import write_plots
from .utils import log_summary


def load(args, extra=()):
    """Scenario of ``--scenario`` with the ``--set`` overrides applied."""
    raw = read_raw(args.scenario)
    assignments = list(args.set or []) + list(extra)
    if getattr(args, "stride", None) is not None:
        assignments.append(f"sim.sample_stride={args.stride}")
    try:
        raw = apply_overrides(raw, assignments)
    except ValueError as err:
        raise ScenarioError(str(err)) from err
    return Scenario.from_dict(raw)


def _write_json(path, payload):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    return path


def scenario_bounds(scenario):
    return theoretical_bounds(
        scenario.beta, scenario.gains, scenario.n, initial_estimator_lyapunov(scenario)
    )


def write_run(log, scenario, out_dir, plots=True):
    """Writes telemetry, bound report, serialized log and figures of one run

    A gain below the threshold empties the bound set; the report then has
    no accuracy fields and says so in its notes.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = write_telemetry_csv(log, out_dir / "telemetry.csv")
    try:
        bounds, notes = scenario_bounds(scenario), []
    except GainTooSmall as err:
        bounds, notes = None, [f"{err}; the bound set is empty, only z and delta are checked"]
        print(f"Warning: {err}")
        sys.stdout.flush()
    report = bound_report(
        log, bounds, scenario.pattern, scenario.gains, beta=scenario.beta, notes=notes
    )
    _write_json(out_dir / "bound_report.json", report.to_dict())
    log_summary(report.to_dict())
    log.save(out_dir / "run_log.pt")
    if plots:
        write_plots(csv_path, out_dir)
    return report


def cmd_run(args):
    scenario = load(args)
    log = Simulator(scenario=scenario, verbose=args.verbose).run()
    report = write_run(log, scenario, args.out, plots=not args.no_plots)
    print(f"Wrote {args.out}: {log.n_samples} samples, {len(report.violations)} bound violations")
    return 0


def bounds_summary(scenario, epsilon_d=0.1, t1_d=0.5):
    """Every closed-form quantity of a scenario as a JSON-ready dict."""
    gains = scenario.gains
    V1_0 = initial_estimator_lyapunov(scenario)
    bounds = theoretical_bounds(scenario.beta, gains, scenario.n, V1_0)
    epsilon_rho, epsilon_delta = real_error_bounds(bounds.epsilon, scenario.pattern)

    p_tilde = local_observation(scenario.observation_graph, scenario.leader_positions())
    states = relative_state(scenario.follower_positions(), p_tilde)
    t2_bound = float(z_settling_bound(states.rho - scenario.pattern.rho_d, gains))

    notes = [exponent_note(scenario.beta, gains, scenario.n)]
    try:
        alpha1_min = tune_alpha1(
            epsilon_d, t1_d, scenario.beta, gains.k_e, scenario.n, gains.eta, V1_0
        )
        suggestion = list(round_up_odd_ratio(alpha1_min))
    except Infeasible as err:
        alpha1_min, suggestion = None, None
        notes.append(f"alpha1 tuning infeasible: {err}")

    return {
        "V1_0": V1_0,
        "f": bounds.f_value,
        "epsilon": bounds.epsilon,
        "epsilon_rho": epsilon_rho,
        "epsilon_delta": epsilon_delta,
        "t1_bound": bounds.t1_bound,
        "t2_bound": t2_bound,
        "alpha1_min": alpha1_min,
        "alpha1_suggestion": suggestion,
        "epsilon_d": epsilon_d,
        "t1_d": t1_d,
        "notes": notes,
    }


def cmd_bounds(args):
    scenario = load(args)
    summary = bounds_summary(scenario, args.epsilon_d, args.t1_d)
    print(json.dumps(summary, indent=2))
    return 0


def compare_logs(logs, window_start=None):
    """Dithering of the continuous and signum runs over a common window

    The window starts once both runs have their estimator errors settled
    below the guaranteed accuracy (or at half the horizon if either never
    settles, or has no bound set), unless ``window_start`` is given.
    """
    if window_start is None:
        starts = []
        for key, log in logs.items():
            scenario = Scenario.from_dict(log.scenario, validate=False)
            try:
                epsilon = scenario_bounds(scenario).epsilon
            except GainTooSmall:
                starts.append(None)
                continue
            starts.append(settling_time(log.times, log.estimator_error, epsilon))
        if any(t is None for t in starts):
            window_start = float(logs["continuous"].times[-1]) / 2
        else:
            window_start = max(starts)

    result = {"window_start": window_start}
    for key, log in logs.items():
        metric = dithering_metric(log.window(window_start).controls)
        result[f"tv_{key}"] = float(metric.total_variation.sum())
        result[f"max_jump_{key}"] = float(metric.max_jump.max())
        result[f"tv_{key}_per_follower"] = metric.total_variation.tolist()
    result["tv_ratio"] = result["tv_continuous"] / result["tv_signum"] if result["tv_signum"] > 0 else None
    result["max_jump_ratio"] = (
        result["max_jump_signum"] / result["max_jump_continuous"]
        if result["max_jump_continuous"] > 0
        else None
    )
    return result


def cmd_compare(args):
    scenario = load(args)
    scenarios = {
        "continuous": dataclasses.replace(scenario, estimator="continuous"),
        "signum": dataclasses.replace(scenario, estimator="signum"),
    }
    logs = run_sweep(scenarios, max_workers=2, verbose=args.verbose)
    out_dir = Path(args.out)
    for key, log in logs.items():
        write_telemetry_csv(log, out_dir / key / "telemetry.csv")
    comparison = compare_logs(logs)
    comparison["k_sgn"] = scenario.signum_gain
    _write_json(out_dir / "comparison.json", comparison)
    print(json.dumps({k: v for k, v in comparison.items() if not k.endswith("per_follower")}, indent=2))
    return 0


def _parse_values(text):
    values = []
    for item in text.split(","):
        item = item.strip()
        try:
            values.append(json.loads(item))
        except json.JSONDecodeError:
            values.append(item)
    return values


def cmd_sweep(args):
    values = _parse_values(args.values)
    scenarios = {json.dumps(v): load(args, [f"{args.key}={json.dumps(v)}"]) for v in values}
    logs = run_sweep(scenarios, max_workers=args.workers, verbose=args.verbose)

    entries = []
    for value, (label, log) in zip(values, logs.items()):
        scenario = scenarios[label]
        entry = {"value": value, "epsilon": None, "settling_estimator": None,
                 "max_post_estimator_error": None, "max_post_e_rho": None}
        try:
            epsilon = scenario_bounds(scenario).epsilon
        except GainTooSmall as err:
            entry["note"] = str(err)
            entries.append(entry)
            continue
        entry["epsilon"] = epsilon
        settled = settling_time(log.times, log.estimator_error, epsilon)
        entry["settling_estimator"] = settled
        if settled is not None:
            window = log.window(settled)
            entry["max_post_estimator_error"] = float(window.estimator_error.max())
            entry["max_post_e_rho"] = float(window.e_rho.abs().max())
        entries.append(entry)

    path = _write_json(Path(args.out) / "sweep.json", {"key": args.key, "runs": entries})
    print(f"Wrote {path}")
    return 0


def cmd_plot(args):
    written = write_plots(args.csv, args.out)
    print("Wrote " + ", ".join(str(p) for p in written))
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="encircle",
        description="Finite-time enclosing of moving targets by a follower swarm.",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    def scenario_args(sub, out=True):
        sub.add_argument("--scenario", default=str(REFERENCE_SCENARIO_PATH),
                         help="scenario JSON file (default: bundled reference scenario)")
        sub.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                         help="override a scenario value, e.g. gains.k_e=12 (repeatable)")
        sub.add_argument("--verbose", action="store_true")
        if out:
            sub.add_argument("--out", default="out", help="output directory (default: out)")

    run = subparsers.add_parser("run", help="simulate a scenario")
    scenario_args(run)
    run.add_argument("--no-plots", action="store_true", help="skip the SVG figures")
    run.add_argument("--stride", type=int, default=None, help="log every N-th step")
    run.set_defaults(func=cmd_run)

    bounds = subparsers.add_parser("bounds", help="print the theoretical bounds as JSON")
    scenario_args(bounds, out=False)
    bounds.add_argument("--epsilon-d", type=float, default=0.1, help="desired accuracy for alpha1 tuning")
    bounds.add_argument("--t1-d", type=float, default=0.5, help="desired settling time for alpha1 tuning")
    bounds.set_defaults(func=cmd_bounds)

    compare = subparsers.add_parser("compare", help="continuous estimator against the signum baseline")
    scenario_args(compare)
    compare.add_argument("--stride", type=int, default=None, help="log every N-th step")
    compare.set_defaults(func=cmd_compare)

    sweep = subparsers.add_parser("sweep", help="run one scenario over several values of a key")
    scenario_args(sweep)
    sweep.add_argument("--key", required=True, help="dotted scenario key, e.g. gains.k_e")
    sweep.add_argument("--values", required=True, help="comma separated JSON values")
    sweep.add_argument("--workers", type=int, default=None, help="concurrent runs")
    sweep.set_defaults(func=cmd_sweep)

    plot = subparsers.add_parser("plot", help="render the SVG figures of a telemetry CSV")
    plot.add_argument("--csv", required=True, help="telemetry.csv written by run")
    plot.add_argument("--out", default=None, help="output directory (default: next to the CSV)")
    plot.set_defaults(func=cmd_plot)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ScenarioError, GainTooSmall, DegenerateRadius) as err:
        print(f"Error: {err}", file=sys.stderr)
        return 1
    except NumericalBlowup as err:
        print(f"Error: {err}", file=sys.stderr)
        return 2
    except OSError as err:
        print(f"Error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
