"""Scenario/experiment configuration, execution, and artifact persistence.

Scenario and experiment files are TOML. A scenario names a plant, controller,
reference, disturbance and time grid; an experiment pairs one scenario with a
list of controllers to compare and, optionally, a tuning block. Every output
file embeds the toolkit version, the seed and the fully resolved config in a
header so a persisted file replays byte-identically.
"""

from __future__ import annotations

import csv
import json
import logging
import math
import sys
from dataclasses import dataclass, field, fields as dc_fields
from pathlib import Path
from typing import Optional

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from . import __version__, metrics, mpso
from .dynamics import (
    ConicalTank,
    ConstantReference,
    Disturbance,
    InvertedPendulum,
    PendulumParams,
    Scenario,
    SimulationDiverged,
    SinusoidReference,
    TankParams,
    Trajectory,
    VanDerPol,
    simulate,
)
from .smc import (
    ConstantControl,
    ControlSingularityError,
    FirstOrderSmc,
    PidController,
    PidSmcEquivalent,
    PidSmcProposed,
    ReachingParams,
    SurfaceGains,
)

CONVENTIONS = ("rise: 90%->10% of initial deviation; settling: earliest stay inside "
               "max(band*|initial deviation|, 1e-4); chattering: mean |du| over final 20%; "
               "lyapunov: V=s^2/2 central-difference decrease outside |s|<=delta")

CONTROLLER_KINDS = ("pid", "smc1", "pid_smc_eq", "pid_smc_proposed", "constant")
DEFAULT_METRICS = ("rise_time", "settling_time", "ise", "chattering_amplitude")


class ConfigError(ValueError):
    """Invalid or inconsistent scenario/experiment configuration."""


class TuningFailed(RuntimeError):
    """Every candidate in the swarm failed to produce a finite fitness."""

    def __init__(self, message: str, trace: Optional[np.ndarray] = None):
        super().__init__(message)
        self.trace = trace


# ---------------------------------------------------------------------------
# config loading


def preset_dir() -> Path:
    return Path(__file__).resolve().parent / "presets"


def list_presets() -> list[str]:
    return sorted(p.stem for p in preset_dir().glob("*.toml"))


def resolve_config_path(source: str | Path) -> Path:
    """Resolve a filesystem path or a bundled preset name."""
    path = Path(source)
    if path.exists():
        return path
    candidate = preset_dir() / f"{source}.toml"
    if candidate.exists():
        return candidate
    raise ConfigError(f"no such scenario/experiment file or preset: {source!r}")


def load_toml(source: str | Path) -> dict:
    path = resolve_config_path(source)
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except tomllib.TOMLDecodeError as ex:
        raise ConfigError(f"{path}: {ex}") from ex


def _check_keys(table: dict, allowed: set[str], where: str) -> None:
    unknown = set(table) - allowed
    if unknown:
        raise ConfigError(f"{where}: unknown keys {sorted(unknown)}")


def _dataclass_from_table(cls, table: dict, where: str):
    names = {f.name for f in dc_fields(cls)}
    _check_keys(table, names, where)
    try:
        return cls(**table)
    except (TypeError, ValueError) as ex:
        raise ConfigError(f"{where}: {ex}") from ex


def build_plant(cfg: dict):
    _check_keys(cfg, {"kind", "params"}, "[plant]")
    kind = cfg.get("kind")
    params = cfg.get("params", {})
    if kind == "pendulum":
        return InvertedPendulum(_dataclass_from_table(PendulumParams, params, "[plant.params]"))
    if kind == "tank":
        return ConicalTank(_dataclass_from_table(TankParams, params, "[plant.params]"))
    if kind == "vdp":
        _check_keys(params, set(), "[plant.params]")
        return VanDerPol()
    raise ConfigError(f"unknown plant kind {kind!r} (expected pendulum, tank or vdp)")


def build_reference(cfg: dict):
    kind = cfg.get("kind", "constant")
    if kind == "constant":
        _check_keys(cfg, {"kind", "value"}, "[reference]")
        return ConstantReference(float(cfg.get("value", 0.0)))
    if kind == "sinusoid":
        _check_keys(cfg, {"kind", "amplitude", "angular_freq"}, "[reference]")
        try:
            return SinusoidReference(float(cfg["amplitude"]), float(cfg["angular_freq"]))
        except KeyError as ex:
            raise ConfigError(f"[reference]: sinusoid needs {ex.args[0]}") from ex
    raise ConfigError(f"unknown reference kind {kind!r}")


def build_disturbance(cfg: dict) -> Disturbance:
    kind = cfg.get("kind", "none")
    allowed = {
        "none": {"kind"},
        "sinusoid": {"kind", "amplitude", "angular_freq"},
        "impulse": {"kind", "area", "onset_time"},
        "leak": {"kind", "coefficient", "onset_time"},
    }
    if kind not in allowed:
        raise ConfigError(f"unknown disturbance kind {kind!r}")
    _check_keys(cfg, allowed[kind], "[disturbance]")
    try:
        if kind == "none":
            return Disturbance.none()
        if kind == "sinusoid":
            return Disturbance.sinusoid(float(cfg["amplitude"]), float(cfg["angular_freq"]))
        if kind == "impulse":
            return Disturbance.impulse(float(cfg["area"]), float(cfg.get("onset_time", 0.0)))
        return Disturbance.leak(float(cfg["coefficient"]), float(cfg.get("onset_time", 0.0)))
    except (KeyError, ValueError) as ex:
        raise ConfigError(f"[disturbance]: {ex}") from ex


def build_controller(cfg: dict, plant_order: int):
    kind = cfg.get("kind")
    if kind not in CONTROLLER_KINDS:
        raise ConfigError(
            f"unknown controller kind {kind!r} (expected one of {', '.join(CONTROLLER_KINDS)})")
    table = {k: v for k, v in cfg.items() if k not in ("kind", "label")}
    try:
        if kind == "pid_smc_proposed":
            _check_keys(table, {"kp", "ki", "kd", "k", "k_sc", "alpha", "delta", "law"},
                        "[controller pid_smc_proposed]")
            gains = SurfaceGains(kp=float(table["kp"]), ki=float(table["ki"]),
                                 kd=float(table.get("kd", 0.0)))
            reaching = ReachingParams(k=float(table["k"]), k_sc=float(table["k_sc"]),
                                      alpha=float(table.get("alpha", 0.5)),
                                      delta=float(table.get("delta", 0.05)),
                                      law=str(table.get("law", "proposed")))
            return PidSmcProposed(gains, reaching, first_order=(plant_order == 1))
        if kind == "pid_smc_eq":
            _check_keys(table, {"kp", "ki", "kd", "switch_gain", "delta", "smoothing"},
                        "[controller pid_smc_eq]")
            gains = SurfaceGains(kp=float(table["kp"]), ki=float(table["ki"]),
                                 kd=float(table.get("kd", 0.0)))
            return PidSmcEquivalent(gains, switch_gain=float(table.get("switch_gain", 0.0)),
                                    delta=float(table.get("delta", 0.05)),
                                    smoothing=str(table.get("smoothing", "sat")))
        if kind == "smc1":
            _check_keys(table, {"lam", "k_sc", "delta", "smoothing"}, "[controller smc1]")
            return FirstOrderSmc(lam=float(table.get("lam", 5.0)),
                                 k_sc=float(table["k_sc"]),
                                 delta=float(table.get("delta", 0.05)),
                                 smoothing=str(table.get("smoothing", "sat")))
        if kind == "pid":
            _check_keys(table, {"kp", "ki", "kd", "action"}, "[controller pid]")
            gains = SurfaceGains(kp=float(table["kp"]), ki=float(table["ki"]),
                                 kd=float(table.get("kd", 0.0)))
            return PidController(gains, action=str(table.get("action", "direct")))
        _check_keys(table, {"value"}, "[controller constant]")
        return ConstantControl(float(table.get("value", 0.0)))
    except KeyError as ex:
        raise ConfigError(f"[controller {kind}]: missing key {ex.args[0]!r}") from ex
    except ValueError as ex:
        raise ConfigError(f"[controller {kind}]: {ex}") from ex


def _apply_overrides(cfg: dict, overrides: Optional[dict]) -> dict:
    if not overrides:
        return cfg
    cfg = dict(cfg)
    if overrides.get("seed") is not None:
        cfg["seed"] = overrides["seed"]
    if overrides.get("out") is not None:
        cfg["out"] = overrides["out"]
    sim_over = {k: overrides[k] for k in ("dt", "horizon") if overrides.get(k) is not None}
    if sim_over:
        sim = dict(cfg.get("sim", {}))
        if "dt" in sim_over:
            sim["dt"] = sim_over["dt"]
        if "horizon" in sim_over:
            sim["t_final"] = sim_over["horizon"]
        cfg["sim"] = sim
    return cfg


@dataclass
class ScenarioBundle:
    name: str
    plant: object
    controller: object
    scenario: Scenario
    resolved: dict
    seed: Optional[int] = None


def _build_scenario_parts(cfg: dict, where: str = "scenario"):
    _check_keys(cfg, {"name", "seed", "out", "plant", "controller", "reference",
                      "disturbance", "sim"}, f"[{where}]")
    if "plant" not in cfg:
        raise ConfigError(f"[{where}] needs a [plant] table")
    plant = build_plant(cfg["plant"])
    reference = build_reference(cfg.get("reference", {"kind": "constant"}))
    disturbance = build_disturbance(cfg.get("disturbance", {"kind": "none"}))
    sim = cfg.get("sim", {})
    _check_keys(sim, {"x0", "t_final", "dt"}, "[sim]")
    for key in ("x0", "t_final"):
        if key not in sim:
            raise ConfigError(f"[sim] needs {key}")
    if disturbance.kind == "leak" and plant.kind != "tank":
        raise ConfigError("leak disturbances only apply to the tank plant")
    if disturbance.kind == "sinusoid":
        _warn_switching_margin(cfg.get("controller"), disturbance)
    try:
        scenario = Scenario(x0=tuple(float(v) for v in sim["x0"]),
                            t_final=float(sim["t_final"]), dt=float(sim.get("dt", 0.01)),
                            reference=reference, disturbance=disturbance)
    except (TypeError, ValueError) as ex:
        raise ConfigError(f"[sim]: {ex}") from ex
    return plant, scenario


def _warn_switching_margin(controller_cfg: Optional[dict], disturbance: Disturbance) -> None:
    # k_sc > d_max is the textbook switching-gain condition; the bundled
    # presets rely on the proportional reaching term instead, so this is
    # advisory only.
    if not controller_cfg:
        return
    k_sc = controller_cfg.get("k_sc")
    bound = disturbance.bound()
    if k_sc is not None and bound is not None and float(k_sc) <= bound:
        logging.getLogger(__name__).info(
            "switching gain k_sc=%s does not dominate the disturbance bound %s; "
            "reaching relies on the proportional term", k_sc, bound)


def load_scenario(source: str | Path, overrides: Optional[dict] = None) -> ScenarioBundle:
    cfg = _apply_overrides(load_toml(source), overrides)
    name = cfg.get("name", Path(str(source)).stem)
    if "controller" not in cfg:
        raise ConfigError("scenario file needs a [controller] table (experiments use 'compare')")
    plant, scenario = _build_scenario_parts(cfg)
    controller = build_controller(cfg["controller"], plant.order)
    return ScenarioBundle(name=name, plant=plant, controller=controller, scenario=scenario,
                          resolved=cfg, seed=cfg.get("seed"))


def run_scenario(bundle: ScenarioBundle) -> Trajectory:
    return simulate(bundle.plant, bundle.controller, bundle.scenario)


# ---------------------------------------------------------------------------
# experiments


@dataclass
class ExperimentSpec:
    """One scenario run under several controllers, plus optional tuning."""

    name: str
    scenario_cfg: dict
    controllers: list[dict]
    metric_names: tuple[str, ...] = DEFAULT_METRICS
    out: Optional[str] = None
    seed: Optional[int] = None
    settling_band: float = 0.02
    tune: Optional[dict] = None
    resolved: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.controllers:
            raise ConfigError("experiment needs at least one controller")
        labels = [c.get("label", c.get("kind")) for c in self.controllers]
        if len(set(labels)) != len(labels):
            raise ConfigError("controller labels must be unique; add label = ... to duplicates")


def load_experiment(source: str | Path, overrides: Optional[dict] = None) -> ExperimentSpec:
    cfg = _apply_overrides(load_toml(source), overrides)
    _check_keys(cfg, {"name", "seed", "out", "settling_band", "metrics", "scenario",
                      "controllers", "tune"}, "experiment")
    if "scenario" not in cfg:
        raise ConfigError("experiment needs a [scenario] table or a scenario = \"...\" reference")
    scenario_cfg = cfg["scenario"]
    if isinstance(scenario_cfg, str):
        scenario_cfg = load_toml(scenario_cfg)
    controllers = cfg.get("controllers", [])
    metric_names = tuple(cfg.get("metrics", DEFAULT_METRICS))
    unknown_metrics = set(metric_names) - set(DEFAULT_METRICS)
    if unknown_metrics:
        raise ConfigError(f"unknown metrics {sorted(unknown_metrics)}; "
                          f"available: {list(DEFAULT_METRICS)}")
    spec = ExperimentSpec(
        name=cfg.get("name", Path(str(source)).stem),
        scenario_cfg=scenario_cfg,
        controllers=list(controllers),
        metric_names=metric_names,
        out=cfg.get("out"),
        seed=cfg.get("seed"),
        settling_band=float(cfg.get("settling_band", 0.02)),
        tune=cfg.get("tune"),
        resolved=cfg,
    )
    # fail on unresolvable pieces before any simulation runs
    plant, _ = _build_scenario_parts(spec.scenario_cfg)
    for ctrl_cfg in spec.controllers:
        build_controller(ctrl_cfg, plant.order)
    return spec


@dataclass
class ExperimentRun:
    label: str
    status: str  # ok | diverged | singular
    trajectory: Optional[Trajectory] = None
    report: Optional[metrics.MetricReport] = None
    detail: str = ""


@dataclass
class ExperimentResult:
    spec: ExperimentSpec
    runs: list[ExperimentRun]
    target: float

    def run(self, label: str) -> ExperimentRun:
        for r in self.runs:
            if r.label == label:
                return r
        raise KeyError(label)


def run_experiment(spec: ExperimentSpec, out_dir: Optional[str | Path] = None) -> ExperimentResult:
    """Simulate every controller on the identical scenario and persist results.

    A diverging controller becomes a 'diverged' comparison row instead of
    aborting the experiment.
    """
    plant, scenario = _build_scenario_parts(spec.scenario_cfg)
    target = scenario.reference.eval(scenario.t_final)[0]
    runs: list[ExperimentRun] = []
    for ctrl_cfg in spec.controllers:
        label = ctrl_cfg.get("label", ctrl_cfg.get("kind"))
        controller = build_controller(ctrl_cfg, plant.order)
        try:
            traj = simulate(plant, controller, scenario)
        except SimulationDiverged as ex:
            runs.append(ExperimentRun(label, "diverged", detail=f"{ex} (t={ex.time:.4g})"))
            continue
        except ControlSingularityError as ex:
            at = "" if ex.time is None else f" (t={ex.time:.4g})"
            runs.append(ExperimentRun(label, "singular", detail=f"{ex}{at}"))
            continue
        delta = getattr(controller, "delta", None) or 0.05
        report = metrics.evaluate(traj, target, delta=delta, band_fraction=spec.settling_band)
        runs.append(ExperimentRun(label, "ok", trajectory=traj, report=report))

    result = ExperimentResult(spec=spec, runs=runs, target=target)
    if out_dir is not None:
        persist_experiment(result, Path(out_dir))
    return result


# ---------------------------------------------------------------------------
# tuning


def _tunable_run(spec: ExperimentSpec, base_cfg: dict, param_names: list[str]):
    plant, scenario = _build_scenario_parts(spec.scenario_cfg)

    def run(values: np.ndarray) -> Trajectory:
        cfg = dict(base_cfg)
        for name, value in zip(param_names, values):
            cfg[name] = float(value)
        controller = build_controller(cfg, plant.order)
        return simulate(plant, controller, scenario)

    return run


@dataclass
class TuningResult:
    spec: ExperimentSpec
    tuned_cfg: dict
    position: np.ndarray
    fitness: float
    trace: np.ndarray
    pre: ExperimentResult
    post: ExperimentResult


def run_tuning(spec: ExperimentSpec, out_dir: Optional[str | Path] = None) -> TuningResult:
    """Tune one controller's parameters against the ISE objective, then re-run
    the experiment with the tuned values and persist pre/post reports."""
    if not spec.tune:
        raise ConfigError("experiment has no [tune] block")
    tune = dict(spec.tune)
    _check_keys(tune, {"controller", "params", "bounds", "n", "k_max", "kmax",
                       "subpopulations", "seed", "variant", "stochastic"}, "[tune]")
    if "kmax" in tune:
        tune.setdefault("k_max", tune.pop("kmax"))
    params = list(tune.get("params", []))
    if not params:
        raise ConfigError("[tune] params list must be nonempty")
    bounds = tune.get("bounds")
    if not bounds or len(bounds) != len(params):
        raise ConfigError("[tune] bounds must pair one [lo, hi] per parameter")

    target_kind = tune.get("controller", spec.controllers[0].get("kind"))
    base_cfg = None
    for ctrl_cfg in spec.controllers:
        if ctrl_cfg.get("label", ctrl_cfg.get("kind")) == target_kind:
            base_cfg = dict(ctrl_cfg)
            break
    if base_cfg is None:
        raise ConfigError(f"[tune] controller {target_kind!r} is not in the experiment")

    run = _tunable_run(spec, base_cfg, params)
    lo = tuple(float(b[0]) for b in bounds)
    hi = tuple(float(b[1]) for b in bounds)
    try:
        config = mpso.SwarmConfig(
            n=int(tune.get("n", 50)), k_max=int(tune.get("k_max", 90)),
            lo=lo, hi=hi,
            subpopulations=int(tune.get("subpopulations", 5)),
            seed=tune.get("seed", spec.seed),
            variant=str(tune.get("variant", "modified")),
            stochastic=bool(tune.get("stochastic", True)),
        )
    except ValueError as ex:
        raise ConfigError(f"[tune]: {ex}") from ex
    result = mpso.optimize(lambda x: mpso.ise_objective(run, x), config)
    if not math.isfinite(result.fitness):
        raise TuningFailed("every swarm candidate diverged or failed", trace=result.trace)

    tuned_cfg = dict(base_cfg)
    for name, value in zip(params, result.position):
        tuned_cfg[name] = float(value)

    pre = run_experiment(spec)
    post_controllers = [tuned_cfg if c.get("label", c.get("kind")) == target_kind else c
                        for c in spec.controllers]
    post_resolved = dict(spec.resolved)
    post_resolved["controllers"] = post_controllers
    post_spec = ExperimentSpec(name=spec.name + "_tuned", scenario_cfg=spec.scenario_cfg,
                               controllers=post_controllers, metric_names=spec.metric_names,
                               out=spec.out, seed=spec.seed, settling_band=spec.settling_band,
                               resolved=post_resolved)
    post = run_experiment(post_spec)

    tuning = TuningResult(spec=spec, tuned_cfg=tuned_cfg, position=result.position,
                          fitness=result.fitness, trace=result.trace, pre=pre, post=post)
    if out_dir is not None:
        persist_tuning(tuning, Path(out_dir))
    return tuning


# ---------------------------------------------------------------------------
# persistence


def _fmt(value: float) -> str:
    return repr(float(value))


def _public_config(config) -> dict:
    # the output directory is where the file already lives, not semantics;
    # dropping it keeps artifacts byte-identical across output locations
    if isinstance(config, dict):
        return {k: v for k, v in config.items() if k != "out"}
    return config


def _header_lines(seed, config: dict) -> list[str]:
    blob = json.dumps(_public_config(config), sort_keys=True, separators=(",", ":"),
                      default=str)
    return [
        f"# pidsmc {__version__}",
        f"# seed: {seed}",
        f"# config: {blob}",
        f"# conventions: {CONVENTIONS}",
    ]


def write_trajectory_csv(traj: Trajectory, path: str | Path, seed=None,
                         config: Optional[dict] = None) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    names = traj.channel_names()
    columns = [traj.channel(n) for n in names]
    with open(path, "w", newline="") as fh:
        for line in _header_lines(seed, config or traj.meta):
            fh.write(line + "\n")
        fh.write(",".join(names) + "\n")
        for i in range(len(traj.t)):
            fh.write(",".join(_fmt(col[i]) for col in columns) + "\n")


def read_trajectory_csv(path: str | Path) -> Trajectory:
    path = Path(path)
    meta: dict = {}
    with open(path) as fh:
        line = fh.readline()
        while line.startswith("#"):
            if line.startswith("# config:"):
                try:
                    meta = json.loads(line.split(":", 1)[1])
                except json.JSONDecodeError:
                    meta = {}
            line = fh.readline()
        names = [c.strip() for c in line.strip().split(",")]
        rows = [[float(v) for v in r] for r in csv.reader(fh) if r]
    data = np.array(rows)
    if data.ndim != 2 or data.shape[1] != len(names):
        raise ConfigError(f"{path}: malformed trajectory CSV")
    cols = {name: data[:, i] for i, name in enumerate(names)}
    state_names = [n for n in names if n.startswith("x") and n[1:].isdigit()]
    x = np.column_stack([cols[n] for n in state_names])
    return Trajectory(t=cols["t"], x=x, ref=cols["ref"], e=cols["e"], edot=cols["edot"],
                      eint=cols["eint"], s=cols["s"], u=cols["u"], d=cols["d"],
                      meta=meta if isinstance(meta, dict) else {})


def emit_plot_data(traj: Trajectory, channels: list[str], path: str | Path,
                   seed=None, config: Optional[dict] = None) -> None:
    """Write the requested trajectory channels as a columnar CSV."""
    if not channels:
        raise ConfigError("channel list must be nonempty")
    known = set(traj.channel_names())
    unknown = [c for c in channels if c not in known]
    if unknown:
        raise ConfigError(f"unknown channels {unknown}; available: {sorted(known)}")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    columns = [traj.channel(c) for c in channels]
    with open(path, "w", newline="") as fh:
        for line in _header_lines(seed, config or traj.meta):
            fh.write(line + "\n")
        fh.write(",".join(channels) + "\n")
        for i in range(len(traj.t)):
            fh.write(",".join(_fmt(col[i]) for col in columns) + "\n")


_COMPARISON_COLUMNS = ("rise_time", "settling_time", "ise", "chattering_amplitude")


def write_comparison_csv(result: ExperimentResult, path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    spec = result.spec
    columns = [c for c in _COMPARISON_COLUMNS if c in spec.metric_names]
    with open(path, "w", newline="") as fh:
        for line in _header_lines(spec.seed, spec.resolved):
            fh.write(line + "\n")
        fh.write("controller,status," + ",".join(columns) + "\n")
        for run in result.runs:
            cells = [run.label, run.status]
            for col in columns:
                if run.report is None:
                    cells.append("")
                else:
                    value = getattr(run.report, col)
                    cells.append("" if value is None else _fmt(value))
            fh.write(",".join(cells) + "\n")


def persist_experiment(result: ExperimentResult, out_dir: Path) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    spec = result.spec
    for run in result.runs:
        if run.trajectory is not None:
            write_trajectory_csv(run.trajectory, out_dir / f"{run.label}_trajectory.csv",
                                 seed=spec.seed, config=spec.resolved)
        if run.report is not None:
            payload = run.report.to_json(version=__version__, seed=spec.seed,
                                         settling_band=spec.settling_band,
                                         conventions=CONVENTIONS,
                                         config=_public_config(spec.resolved))
            (out_dir / f"{run.label}_metrics.json").write_text(payload + "\n")
    write_comparison_csv(result, out_dir / "comparison.csv")


def write_trace_csv(trace: np.ndarray, path: str | Path, seed=None,
                    config: Optional[dict] = None) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        for line in _header_lines(seed, config or {}):
            fh.write(line + "\n")
        fh.write("iter,best_fitness,mean_fitness\n")
        for row in trace:
            fh.write(f"{int(row[0])},{_fmt(row[1])},{_fmt(row[2])}\n")


def persist_tuning(result: TuningResult, out_dir: Path) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    spec = result.spec
    write_trace_csv(result.trace, out_dir / "convergence.csv", seed=spec.seed,
                    config=spec.resolved)
    tuned = {
        "_meta": {"version": __version__, "seed": spec.seed,
                  "config": _public_config(spec.resolved)},
        "controller": result.tuned_cfg,
        "fitness": result.fitness,
    }
    (out_dir / "tuned.json").write_text(json.dumps(tuned, sort_keys=True, indent=2,
                                                   default=str) + "\n")
    persist_experiment(result.pre, out_dir / "pre")
    persist_experiment(result.post, out_dir / "post")
