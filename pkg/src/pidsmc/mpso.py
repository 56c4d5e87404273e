"""Particle swarm optimization with time-scheduled coefficients for offline tuning.

The modified variant follows the schedule w = 2 - (1 + 1/(2*k_max))^i,
c1 = exp(-0.05*i), c2 = exp(0.05*i)/(1 + 0.05*exp(0.05*i)): early iterations
explore (strong inertia, personal attraction), late iterations concentrate on
the group best. Because c2 eventually exceeds the order-2 stability range of
the bare velocity update, each step is confined to the sub-population's
personal-best spread (a self-scaling trust region); that is what turns the
late schedule into contraction around the best point instead of scatter, and
it can be switched off for literal-update inspection. The standard variant
uses fixed (w, c1, c2).

Fitness evaluations are pure and independent; they run here in particle-index
order, which is also the required reduction order for deterministic traces.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

log = logging.getLogger(__name__)

# limit of the c2 schedule as the iteration index grows
C2_LIMIT = 20.0


def coefficients(i: int, k_max: int) -> tuple[float, float, float]:
    """Scheduled (w, c1, c2) at integer iteration i of a k_max-iteration run."""
    if not 0 <= i <= k_max:
        raise ValueError("iteration index must lie in [0, k_max]")
    w = 2.0 - (1.0 + 1.0 / (2.0 * k_max)) ** i
    c1 = math.exp(-0.05 * i)
    g = math.exp(0.05 * i)
    c2 = g / (1.0 + 0.05 * g)
    return w, c1, c2


@dataclass(frozen=True)
class SwarmConfig:
    """Swarm shape, bounds and variant selection.

    bounds are (lo, hi) arrays per dimension; lo == hi pins a dimension.
    subpopulations independent swarms of n/subpopulations particles evolve
    with their own group bests; the final answer is the best across all.
    """

    n: int
    k_max: int
    lo: tuple[float, ...]
    hi: tuple[float, ...]
    subpopulations: int = 1
    seed: Optional[int] = None
    variant: str = "modified"
    stochastic: bool = True
    # limit each step to the sub-population's personal-best spread
    confine_velocity: bool = True
    # fixed coefficients for the standard variant (common constriction values)
    w: float = 0.729
    c1: float = 1.49445
    c2: float = 1.49445

    def __post_init__(self):
        if self.n <= 0 or self.k_max <= 0:
            raise ValueError("n and k_max must be positive")
        if len(self.lo) != len(self.hi):
            raise ValueError("lo and hi must have the same dimension")
        if any(l > h for l, h in zip(self.lo, self.hi)):
            raise ValueError("each lower bound must not exceed its upper bound")
        if self.subpopulations <= 0 or self.n % self.subpopulations:
            raise ValueError("subpopulation count must divide n")
        if self.variant not in ("modified", "standard"):
            raise ValueError(f"unknown variant {self.variant!r}")

    @property
    def dim(self) -> int:
        return len(self.lo)


@dataclass
class Swarm:
    """State of one sub-population."""

    x: np.ndarray
    v: np.ndarray
    pb: np.ndarray
    pb_fit: np.ndarray
    gb: np.ndarray
    gb_fit: float


def update_particle(x: np.ndarray, v: np.ndarray, pb: np.ndarray, gb: np.ndarray,
                    coeffs: tuple[float, float, float], lo: np.ndarray, hi: np.ndarray,
                    rng: Optional[np.random.Generator] = None,
                    stochastic: bool = True,
                    v_limit: Optional[np.ndarray] = None) -> tuple[np.ndarray, np.ndarray]:
    """One velocity/position update for a single particle.

    v <- w*v + c1*r1*(pb - x) + c2*r2*(gb - x), x <- x + v, then x is clamped
    to the bounds with the velocity zeroed on clamped dimensions. With
    stochastic=False, r1 = r2 = 1 (the literal printed update). v_limit, when
    given, caps |v| per dimension before the position update.
    """
    w, c1, c2 = coeffs
    if stochastic:
        if rng is None:
            raise ValueError("stochastic updates need an rng")
        r1 = rng.uniform(size=x.shape)
        r2 = rng.uniform(size=x.shape)
    else:
        r1 = r2 = 1.0
    v_new = w * v + c1 * r1 * (pb - x) + c2 * r2 * (gb - x)
    if v_limit is not None:
        v_new = np.minimum(np.maximum(v_new, -v_limit), v_limit)
    x_new = x + v_new
    clamped_lo = x_new < lo
    clamped_hi = x_new > hi
    x_new = np.minimum(np.maximum(x_new, lo), hi)
    v_new = np.where(clamped_lo | clamped_hi, 0.0, v_new)
    return v_new, x_new


@dataclass
class OptimizeResult:
    position: np.ndarray
    fitness: float
    trace: np.ndarray  # columns: iteration, best_fitness (so far), mean_fitness
    evaluations: int = 0
    failures: int = 0
    meta: dict = field(default_factory=dict)


def _safe_eval(objective: Callable[[np.ndarray], float], x: np.ndarray) -> tuple[float, bool]:
    try:
        value = float(objective(x))
    except Exception as ex:  # a failing candidate must not kill the run
        log.warning("objective failed at %s: %s", np.array2string(x, precision=4), ex)
        return math.inf, True
    if not math.isfinite(value):
        return math.inf, True
    return value, False


def optimize(objective: Callable[[np.ndarray], float], config: SwarmConfig) -> OptimizeResult:
    """Minimize the objective over the configured box.

    Runs config.k_max update iterations after the initial evaluation. The
    trace records, per iteration, the best fitness seen so far (non-increasing)
    and the mean of the finite fitnesses evaluated in that iteration.
    """
    rng = np.random.default_rng(config.seed)
    lo = np.asarray(config.lo, dtype=float)
    hi = np.asarray(config.hi, dtype=float)
    per = config.n // config.subpopulations

    evaluations = 0
    failures = 0

    def evaluate(x: np.ndarray) -> float:
        nonlocal evaluations, failures
        value, failed = _safe_eval(objective, x)
        evaluations += 1
        failures += failed
        return value

    x0 = rng.uniform(lo, hi, size=(config.n, config.dim))
    swarms: list[Swarm] = []
    init_fits = []
    for b in range(config.subpopulations):
        x = x0[b * per:(b + 1) * per]
        fits = np.array([evaluate(xi) for xi in x])
        best = int(np.argmin(fits))
        swarms.append(Swarm(x=x.copy(), v=np.zeros_like(x), pb=x.copy(),
                            pb_fit=fits.copy(), gb=x[best].copy(),
                            gb_fit=float(fits[best])))
        init_fits.append(fits)

    def global_best() -> tuple[np.ndarray, float]:
        idx = int(np.argmin([sw.gb_fit for sw in swarms]))
        return swarms[idx].gb.copy(), swarms[idx].gb_fit

    def finite_mean(values: np.ndarray) -> float:
        finite = values[np.isfinite(values)]
        return float(np.mean(finite)) if len(finite) else math.inf

    trace = []
    _, best_so_far = global_best()
    trace.append((0.0, best_so_far, finite_mean(np.concatenate(init_fits))))

    for i in range(config.k_max):
        if config.variant == "modified":
            coeffs = coefficients(i, config.k_max)
        else:
            coeffs = (config.w, config.c1, config.c2)
        iter_fits = []
        for sw in swarms:
            gb = sw.gb  # group best frozen for the iteration
            v_limit = None
            if config.confine_velocity:
                v_limit = sw.pb.max(axis=0) - sw.pb.min(axis=0)
            for p in range(per):
                sw.v[p], sw.x[p] = update_particle(sw.x[p], sw.v[p], sw.pb[p], gb,
                                                   coeffs, lo, hi, rng,
                                                   config.stochastic, v_limit)
                fit = evaluate(sw.x[p])
                iter_fits.append(fit)
                if fit < sw.pb_fit[p]:
                    sw.pb_fit[p] = fit
                    sw.pb[p] = sw.x[p].copy()
            best = int(np.argmin(sw.pb_fit))
            if sw.pb_fit[best] < sw.gb_fit:
                sw.gb_fit = float(sw.pb_fit[best])
                sw.gb = sw.pb[best].copy()
        _, current = global_best()
        best_so_far = min(best_so_far, current)
        trace.append((float(i + 1), best_so_far, finite_mean(np.array(iter_fits))))

    position, fitness = global_best()
    return OptimizeResult(position=position, fitness=fitness,
                          trace=np.array(trace), evaluations=evaluations,
                          failures=failures,
                          meta={"subpopulations": config.subpopulations,
                                "variant": config.variant,
                                "scheme": "independent subpopulations, best-of-all"})


def ise_objective(run: Callable[[np.ndarray], object], params: np.ndarray) -> float:
    """Integral-squared-error fitness of one candidate parameter vector.

    run(params) must simulate the scenario and return the trajectory; any
    failure (divergence, singular control) maps to +inf fitness.
    """
    from . import metrics

    try:
        traj = run(np.asarray(params, dtype=float))
    except Exception as ex:
        log.debug("candidate %s failed: %s", np.array2string(np.asarray(params), precision=4), ex)
        return math.inf
    value = metrics.ise(traj)
    return value if math.isfinite(value) else math.inf
