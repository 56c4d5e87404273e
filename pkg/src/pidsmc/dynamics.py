"""Nonlinear plant models, disturbance signals, and fixed-step closed-loop simulation.

All plants are control-affine: the highest state derivative is f(x) + g(x)*u + d.
States are plain float ndarrays; time is seconds throughout. The tank works in
centimeters and cm^3/s.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .smc import ErrorFrame

# Beyond this magnitude a state is treated as numerically diverged; squaring
# stays below float overflow so derivative code never has to guard itself.
DIVERGENCE_LIMIT = 1e150


class SimulationDiverged(RuntimeError):
    """Raised when the integrated state stops being finite."""

    def __init__(self, message: str, time: float):
        super().__init__(message)
        self.time = time


class DegenerateParameters(ValueError):
    """Raised when plant parameters make the model ill-posed."""


# ---------------------------------------------------------------------------
# references


@dataclass(frozen=True)
class ConstantReference:
    value: float = 0.0

    def eval(self, t: float) -> tuple[float, float, float]:
        return self.value, 0.0, 0.0


@dataclass(frozen=True)
class SinusoidReference:
    amplitude: float
    angular_freq: float

    def eval(self, t: float) -> tuple[float, float, float]:
        a, w = self.amplitude, self.angular_freq
        wt = w * t
        return a * math.sin(wt), a * w * math.cos(wt), -a * w * w * math.sin(wt)


# ---------------------------------------------------------------------------
# disturbances


@dataclass(frozen=True)
class Disturbance:
    """External disturbance description.

    kind is one of "none", "sinusoid", "impulse" or "leak". A leak is not an
    additive signal: it is extra outflow coefficient*sqrt(h) inside the tank
    dynamics, switched on at onset_time.
    """

    kind: str = "none"
    amplitude: float = 0.0
    angular_freq: float = 0.0
    area: float = 0.0
    onset_time: float = 0.0
    coefficient: float = 0.0

    def __post_init__(self):
        if self.kind not in ("none", "sinusoid", "impulse", "leak"):
            raise ValueError(f"unknown disturbance kind {self.kind!r}")
        if self.amplitude < 0:
            raise ValueError("disturbance amplitude must be >= 0")
        if not math.isfinite(self.area):
            raise ValueError("impulse area must be finite")
        if self.coefficient < 0:
            raise ValueError("leak coefficient must be >= 0")

    @classmethod
    def none(cls) -> "Disturbance":
        return cls()

    @classmethod
    def sinusoid(cls, amplitude: float, angular_freq: float) -> "Disturbance":
        return cls(kind="sinusoid", amplitude=amplitude, angular_freq=angular_freq)

    @classmethod
    def impulse(cls, area: float, onset_time: float = 0.0) -> "Disturbance":
        return cls(kind="impulse", area=area, onset_time=onset_time)

    @classmethod
    def leak(cls, coefficient: float, onset_time: float = 0.0) -> "Disturbance":
        return cls(kind="leak", coefficient=coefficient, onset_time=onset_time)

    def bound(self) -> Optional[float]:
        """Known magnitude bound of the additive signal, if any."""
        if self.kind == "none" or self.kind == "leak":
            return 0.0
        if self.kind == "sinusoid":
            return self.amplitude
        return None  # impulse height depends on the sampling step


def eval_disturbance(spec: Disturbance, t: float, dt: float) -> float:
    """Additive disturbance value at time t on a grid of step dt.

    An impulse of given area becomes a rectangular pulse of height area/dt
    active for exactly one sample, so the sampled sum d(t_n)*dt preserves the
    area. Leaks return 0 here; they act inside the tank dynamics.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    if spec.kind == "sinusoid":
        return spec.amplitude * math.sin(spec.angular_freq * t)
    if spec.kind == "impulse":
        if spec.onset_time <= t < spec.onset_time + dt:
            return spec.area / dt
        return 0.0
    return 0.0


# ---------------------------------------------------------------------------
# plants


@dataclass(frozen=True)
class PendulumParams:
    """Cart-mounted pendulum constants (SI units)."""

    cart_mass: float = 1.0
    bob_mass: float = 0.1
    inertia: float = 0.006
    length: float = 0.3
    gravity: float = 9.8
    friction: float = 0.0
    force_limit: Optional[float] = None
    denominator_floor: float = 1e-9

    def __post_init__(self):
        if self.cart_mass <= 0 or self.bob_mass <= 0 or self.length <= 0 or self.gravity <= 0:
            raise DegenerateParameters("masses, length and gravity must be positive")
        if self.inertia < 0 or self.friction < 0:
            raise DegenerateParameters("inertia and friction must be >= 0")
        ml2 = self.bob_mass**2 * self.length**2
        if ml2 >= self.inertia + self.bob_mass * self.length**2:
            # otherwise the input-gain denominator vanishes at some angle
            raise DegenerateParameters(
                "bob_mass^2*length^2 must stay below inertia + bob_mass*length^2"
            )


def pendulum_f_g(theta: float, thetadot: float, params: PendulumParams) -> tuple[float, float]:
    """Control-affine split of the pendulum angular acceleration.

    thetadotdot = f + g_in*u + d with u the cart force. The shared denominator
    is m^2 l^2 cos^2(theta) - (I + m l^2), negative for valid parameters.
    """
    m, i_rot, length, grav = params.bob_mass, params.inertia, params.length, params.gravity
    ct, st = math.cos(theta), math.sin(theta)
    ml = m * length
    den = ml * ml * ct * ct - (i_rot + m * length * length)
    if abs(den) < params.denominator_floor:
        raise DegenerateParameters(f"pendulum denominator {den:.3e} below floor at theta={theta}")
    f = (m * grav * length * st - ml * ml * ct * st * thetadot * thetadot) / den
    g_in = ml * ct / den
    return f, g_in


class InvertedPendulum:
    """Pendulum angle subsystem driven by the cart force."""

    order = 2
    state_dim = 2
    kind = "pendulum"

    def __init__(self, params: PendulumParams = PendulumParams()):
        self.params = params

    def f_g(self, x: np.ndarray) -> tuple[float, float]:
        return pendulum_f_g(x[0], x[1], self.params)

    def derivative(self, x: np.ndarray, t: float, u: float, d: float) -> np.ndarray:
        f, g_in = pendulum_f_g(x[0], x[1], self.params)
        return np.array([x[1], f + g_in * u + d])

    def output(self, x: np.ndarray) -> float:
        return float(x[0])

    def clamp_input(self, u: float) -> float:
        lim = self.params.force_limit
        if lim is None:
            return u
        return min(max(u, -lim), lim)

    def clamp_state(self, x: np.ndarray) -> np.ndarray:
        return x

    def logged_disturbance(self, x: np.ndarray, t: float, d: float) -> float:
        return d


@dataclass(frozen=True)
class TankParams:
    """Conical tank constants; lengths in cm, flows in cm^3/s.

    The defaults read the nameplate flow figures (outflow coefficient 55 in
    L/h per sqrt(cm), max inflow 400 L/h) converted once to cm-s units, which
    keeps a 40 cm setpoint inside the actuator authority.
    """

    top_radius: float = 17.5
    max_height: float = 70.0
    discharge_coeff: float = 55.0 * 1000.0 / 3600.0
    max_inflow: float = 400.0 * 1000.0 / 3600.0
    level_floor: float = 0.1

    def __post_init__(self):
        if min(self.top_radius, self.max_height, self.discharge_coeff, self.max_inflow) <= 0:
            raise DegenerateParameters("tank radius, height and flow constants must be positive")
        if self.level_floor <= 0:
            raise DegenerateParameters("level floor must be positive")


def tank_cross_section(h: float, params: TankParams) -> float:
    r = params.top_radius * h / params.max_height
    return math.pi * r * r


def tank_rate(h: float, f_in: float, params: TankParams, leak_coefficient: float = 0.0) -> float:
    """Level rate of the conical tank: (inflow - outflow)/A(h).

    Inflow is clamped to [0, max_inflow]. Levels at or below the configured
    floor are evaluated at the floor so A(h) stays away from zero; an optional
    leak adds coefficient*sqrt(h) to the outflow.
    """
    hf = max(h, params.level_floor)
    area = tank_cross_section(hf, params)
    f_in = min(max(f_in, 0.0), params.max_inflow)
    out = (params.discharge_coeff + leak_coefficient) * math.sqrt(hf)
    return (f_in - out) / area


class ConicalTank:
    """Gravity-drained conical tank; input is the inflow rate.

    leak_coefficient/leak_onset model an unmeasured extra drain that switches
    on at the onset time. The nominal split f_g never includes the leak: the
    controller treats it as a disturbance.
    """

    order = 1
    state_dim = 1
    kind = "tank"

    def __init__(self, params: TankParams = TankParams(), leak_coefficient: float = 0.0,
                 leak_onset: float = 0.0):
        self.params = params
        self.leak_coefficient = leak_coefficient
        self.leak_onset = leak_onset

    def with_leak(self, coefficient: float, onset: float) -> "ConicalTank":
        return ConicalTank(self.params, coefficient, onset)

    def _floored(self, x: np.ndarray) -> float:
        return max(float(x[0]), self.params.level_floor)

    def f_g(self, x: np.ndarray) -> tuple[float, float]:
        hf = self._floored(x)
        area = tank_cross_section(hf, self.params)
        return -self.params.discharge_coeff * math.sqrt(hf) / area, 1.0 / area

    def _leak_outflow(self, x: np.ndarray, t: float) -> float:
        if self.leak_coefficient > 0.0 and t >= self.leak_onset:
            return self.leak_coefficient * math.sqrt(self._floored(x))
        return 0.0

    def derivative(self, x: np.ndarray, t: float, u: float, d: float) -> np.ndarray:
        leak = self.leak_coefficient if (self.leak_coefficient > 0.0 and t >= self.leak_onset) else 0.0
        rate = tank_rate(float(x[0]), u, self.params, leak)
        area = tank_cross_section(self._floored(x), self.params)
        return np.array([rate + d / area])

    def output(self, x: np.ndarray) -> float:
        return float(x[0])

    def clamp_input(self, u: float) -> float:
        return min(max(u, 0.0), self.params.max_inflow)

    def clamp_state(self, x: np.ndarray) -> np.ndarray:
        h = min(max(float(x[0]), 0.0), self.params.max_height)
        return np.array([h])

    def logged_disturbance(self, x: np.ndarray, t: float, d: float) -> float:
        # net external flow disturbance; a leak shows up as negative inflow
        return d - self._leak_outflow(x, t)


def vdp_rate(x: np.ndarray, u: float, d: float) -> np.ndarray:
    """Van der Pol oscillator with additive input and disturbance on x2."""
    x1, x2 = float(x[0]), float(x[1])
    return np.array([x2, -2.0 * x1 + 3.0 * (1.0 - x1 * x1) * x2 + u + d])


class VanDerPol:
    """Van der Pol oscillator; output is the first coordinate."""

    order = 2
    state_dim = 2
    kind = "vdp"

    def f_g(self, x: np.ndarray) -> tuple[float, float]:
        x1, x2 = float(x[0]), float(x[1])
        return -2.0 * x1 + 3.0 * (1.0 - x1 * x1) * x2, 1.0

    def derivative(self, x: np.ndarray, t: float, u: float, d: float) -> np.ndarray:
        return vdp_rate(x, u, d)

    def output(self, x: np.ndarray) -> float:
        return float(x[0])

    def clamp_input(self, u: float) -> float:
        return u

    def clamp_state(self, x: np.ndarray) -> np.ndarray:
        return x

    def logged_disturbance(self, x: np.ndarray, t: float, d: float) -> float:
        return d


# ---------------------------------------------------------------------------
# integration


def rk4_step(derivative_fn: Callable[[np.ndarray, float, float, float], np.ndarray],
             state: np.ndarray, t: float, dt: float, u: float, d: float = 0.0) -> np.ndarray:
    """Classical fourth-order Runge-Kutta advance with u and d held constant."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    with np.errstate(all="ignore"):
        k1 = derivative_fn(state, t, u, d)
        if not np.all(np.isfinite(k1)):
            raise SimulationDiverged(f"non-finite derivative at t={t:.6g}", t)
        half = 0.5 * dt
        k2 = derivative_fn(state + half * k1, t + half, u, d)
        if not np.all(np.isfinite(k2)):
            raise SimulationDiverged(f"non-finite derivative at t={t:.6g}", t)
        k3 = derivative_fn(state + half * k2, t + half, u, d)
        if not np.all(np.isfinite(k3)):
            raise SimulationDiverged(f"non-finite derivative at t={t:.6g}", t)
        k4 = derivative_fn(state + dt * k3, t + dt, u, d)
        if not np.all(np.isfinite(k4)):
            raise SimulationDiverged(f"non-finite derivative at t={t:.6g}", t)
        return state + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


# ---------------------------------------------------------------------------
# closed-loop rollout


@dataclass(frozen=True)
class Scenario:
    """Everything a rollout needs besides the plant and the controller."""

    x0: tuple[float, ...]
    t_final: float
    dt: float = 0.01
    reference: object = ConstantReference(0.0)
    disturbance: Disturbance = Disturbance.none()

    def __post_init__(self):
        if self.t_final <= 0:
            raise ValueError("t_final must be positive")
        if self.dt <= 0:
            raise ValueError("dt must be positive")


@dataclass
class Trajectory:
    """Uniformly sampled closed-loop record.

    All channels share the time grid; eint is the running trapezoidal
    quadrature of e and s is exactly the controller's sliding value at each
    sample. u is the applied (actuator-clamped) control.
    """

    t: np.ndarray
    x: np.ndarray
    ref: np.ndarray
    e: np.ndarray
    edot: np.ndarray
    eint: np.ndarray
    s: np.ndarray
    u: np.ndarray
    d: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        n = len(self.t)
        for name in ("ref", "e", "edot", "eint", "s", "u", "d"):
            if len(getattr(self, name)) != n:
                raise ValueError(f"channel {name} length mismatch")
        if self.x.shape[0] != n:
            raise ValueError("state channel length mismatch")
        if n >= 2:
            steps = np.diff(self.t)
            if steps.min() <= 0 or not np.allclose(steps, steps[0], rtol=0, atol=1e-9):
                raise ValueError("time stamps must increase with a constant step")

    @property
    def dt(self) -> float:
        return float(self.t[1] - self.t[0]) if len(self.t) > 1 else 0.0

    @property
    def state_dim(self) -> int:
        return self.x.shape[1]

    def channel_names(self) -> list[str]:
        states = [f"x{i + 1}" for i in range(self.state_dim)]
        return ["t"] + states + ["ref", "e", "edot", "eint", "s", "u", "d"]

    def channel(self, name: str) -> np.ndarray:
        if name.startswith("x") and name[1:].isdigit():
            idx = int(name[1:]) - 1
            if 0 <= idx < self.state_dim:
                return self.x[:, idx]
            raise KeyError(name)
        if name in ("t", "ref", "e", "edot", "eint", "s", "u", "d"):
            return getattr(self, name)
        raise KeyError(name)

    def output(self) -> np.ndarray:
        return self.ref - self.e


def simulate(plant, controller, scenario: Scenario) -> Trajectory:
    """Roll out the closed loop on a fixed grid with zero-order-held control.

    Per sample: tracking error terms, sliding value, control (then actuator
    clamp), disturbance sample, then one Runge-Kutta step of the true plant.
    """
    required = getattr(controller, "required_order", None)
    if required is not None and required != plant.order:
        raise ValueError(
            f"controller {getattr(controller, 'kind', type(controller).__name__)!r} needs a "
            f"plant of order {required}, got order {plant.order}"
        )
    dist = scenario.disturbance
    if dist.kind == "leak":
        if not hasattr(plant, "with_leak"):
            raise ValueError("leak disturbances only apply to the tank plant")
        plant = plant.with_leak(dist.coefficient, dist.onset_time)

    x = np.asarray(scenario.x0, dtype=float)
    if x.shape != (plant.state_dim,):
        raise ValueError(f"initial state must have dimension {plant.state_dim}")
    dt = scenario.dt
    n_steps = int(round(scenario.t_final / dt))
    n = n_steps + 1

    t_arr = np.empty(n)
    x_arr = np.empty((n, plant.state_dim))
    channels = {name: np.empty(n) for name in ("ref", "e", "edot", "eint", "s", "u", "d")}

    second_order = plant.order == 2
    eint = 0.0
    e_prev = 0.0
    for i in range(n):
        t = i * dt
        if not np.all(np.isfinite(x)) or np.any(np.abs(x) > DIVERGENCE_LIMIT):
            raise SimulationDiverged(f"state diverged at t={t:.6g}", t)
        r, rdot, raccel = scenario.reference.eval(t)
        y = plant.output(x)
        e = r - y
        edot = rdot - float(x[1]) if second_order else 0.0
        if i:
            eint += 0.5 * dt * (e + e_prev)
        frame = ErrorFrame(e=e, edot=edot, eint=eint, ref_rate=rdot, ref_accel=raccel)
        s = controller.sliding_value(frame)
        f, g_in = plant.f_g(x)
        try:
            u = plant.clamp_input(controller.control(frame, f, g_in))
        except Exception as ex:
            if hasattr(ex, "time"):
                ex.time = t
            raise
        d = eval_disturbance(dist, t, dt)

        t_arr[i] = t
        x_arr[i] = x
        channels["ref"][i] = r
        channels["e"][i] = e
        channels["edot"][i] = edot
        channels["eint"][i] = eint
        channels["s"][i] = s
        channels["u"][i] = u
        channels["d"][i] = plant.logged_disturbance(x, t, d)

        if i < n_steps:
            x = plant.clamp_state(rk4_step(plant.derivative, x, t, dt, u, d))
        e_prev = e

    meta = {
        "plant": getattr(plant, "kind", type(plant).__name__),
        "controller": getattr(controller, "kind", type(controller).__name__),
        "dt": dt,
        "t_final": scenario.t_final,
    }
    if getattr(plant, "kind", None) == "tank":
        meta["tank_floor_activated"] = bool(np.min(x_arr[:, 0]) <= plant.params.level_floor)
    return Trajectory(t=t_arr, x=x_arr, ref=channels["ref"], e=channels["e"],
                      edot=channels["edot"], eint=channels["eint"], s=channels["s"],
                      u=channels["u"], d=channels["d"], meta=meta)
