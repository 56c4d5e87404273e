"""Command-line front end.

Verbs: simulate a scenario, compare controllers on an experiment, tune a
controller, or extract plot-ready channel CSVs from a stored trajectory.
Failures print a machine-readable JSON object on stderr and exit nonzero
(2 for configuration errors, 3 for divergence/singularity/tuning failures).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__, harness, metrics
from .dynamics import SimulationDiverged
from .harness import ConfigError, TuningFailed
from .smc import ControlSingularityError


def _error(kind: str, ex: Exception, **detail) -> None:
    payload = {"error": kind, "message": str(ex)}
    t = getattr(ex, "time", None)
    if t is not None:
        detail["time"] = t
    if detail:
        payload["detail"] = detail
    print(json.dumps(payload, sort_keys=True, default=str), file=sys.stderr)


def _overrides(args) -> dict:
    return {"seed": args.seed, "out": getattr(args, "out", None),
            "dt": args.dt, "horizon": args.horizon}


def _cmd_simulate(args) -> int:
    bundle = harness.load_scenario(args.scenario, _overrides(args))
    traj = harness.run_scenario(bundle)
    out = Path(args.out or bundle.resolved.get("out") or f"{bundle.name}_out")
    harness.write_trajectory_csv(traj, out / "trajectory.csv", seed=bundle.seed,
                                 config=bundle.resolved)
    target = bundle.scenario.reference.eval(bundle.scenario.t_final)[0]
    delta = getattr(bundle.controller, "delta", None) or 0.05
    report = metrics.evaluate(traj, target, delta=delta)
    (out / "metrics.json").write_text(
        report.to_json(version=__version__, seed=bundle.seed,
                       conventions=harness.CONVENTIONS,
                       config=harness._public_config(bundle.resolved)) + "\n")
    print(f"wrote {out / 'trajectory.csv'} and {out / 'metrics.json'}")
    return 0


def _cmd_compare(args) -> int:
    spec = harness.load_experiment(args.experiment, _overrides(args))
    out = Path(args.out or spec.out or f"{spec.name}_out")
    result = harness.run_experiment(spec, out)
    print(f"wrote comparison to {out / 'comparison.csv'}")
    for run in result.runs:
        line = f"  {run.label}: {run.status}"
        if run.report is not None:
            line += (f" rise={run.report.rise_time} settle={run.report.settling_time}"
                     f" ise={run.report.ise:.6g}")
        print(line)
    return 0


def _cmd_tune(args) -> int:
    spec = harness.load_experiment(args.experiment, _overrides(args))
    out = Path(args.out or spec.out or f"{spec.name}_out")
    result = harness.run_tuning(spec, out)
    print(f"tuned {sorted(k for k in result.tuned_cfg if k != 'kind')} "
          f"-> fitness {result.fitness:.6g}; wrote {out}")
    return 0


def _cmd_plotdata(args) -> int:
    traj = harness.read_trajectory_csv(args.trajectory)
    channels = [c.strip() for c in args.channels.split(",") if c.strip()]
    out = Path(args.out or (Path(args.trajectory).with_suffix("").name + "_plot.csv"))
    harness.emit_plot_data(traj, channels, out, seed=args.seed, config=traj.meta)
    print(f"wrote {out}")
    return 0


def _cmd_presets(args) -> int:
    for name in harness.list_presets():
        print(name)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pidsmc",
                                     description="sliding-mode control simulation toolkit")
    parser.add_argument("--version", action="version", version=f"pidsmc {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, with_out=True):
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument("--dt", type=float, default=None, help="override the sampling step")
        p.add_argument("--horizon", type=float, default=None, help="override the horizon")
        if with_out:
            p.add_argument("--out", default=None, help="output directory")

    p = sub.add_parser("simulate", help="run one scenario and store its trajectory")
    p.add_argument("scenario", help="scenario file or bundled preset name")
    common(p)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("compare", help="run every controller of an experiment")
    p.add_argument("experiment", help="experiment file or bundled preset name")
    common(p)
    p.set_defaults(func=_cmd_compare)

    p = sub.add_parser("tune", help="tune a controller with the swarm optimizer")
    p.add_argument("experiment", help="experiment file with a [tune] block")
    common(p)
    p.set_defaults(func=_cmd_tune)

    p = sub.add_parser("plotdata", help="extract channels from a trajectory CSV")
    p.add_argument("trajectory", help="trajectory CSV produced by simulate/compare")
    p.add_argument("--channels", required=True, help="comma-separated channel names")
    p.add_argument("--out", default=None, help="output CSV path")
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=_cmd_plotdata)

    p = sub.add_parser("presets", help="list bundled scenario/experiment presets")
    p.set_defaults(func=_cmd_presets)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as ex:
        _error("config", ex)
        return 2
    except SimulationDiverged as ex:
        _error("diverged", ex)
        return 3
    except ControlSingularityError as ex:
        _error("singular", ex)
        return 3
    except TuningFailed as ex:
        _error("tuning_failed", ex)
        return 3


if __name__ == "__main__":
    raise SystemExit(main())
