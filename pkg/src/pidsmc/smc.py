"""Sliding surfaces, reaching laws and assembled control laws.

Everything here is pure scalar algebra on an error frame plus the plant's
control-affine split (f, g_in). The assembled laws are derived so that the
closed-loop surface derivative equals the selected reaching law exactly when
the disturbance is zero; that identity is what the tests enforce.
"""

from __future__ import annotations

from dataclasses import dataclass

# Below this input-gain magnitude the model-inverting laws are ill-posed
# (e.g. the pendulum loses control authority where cos(theta) = 0).
SINGULARITY_FLOOR = 1e-9


class ControlSingularityError(RuntimeError):
    """Raised when a control law would divide by a vanishing input gain."""

    def __init__(self, message: str, time: float | None = None):
        super().__init__(message)
        self.time = time


@dataclass(frozen=True, slots=True)
class ErrorFrame:
    """Tracking error terms and reference derivatives at one sample."""

    e: float
    edot: float = 0.0
    eint: float = 0.0
    ref_rate: float = 0.0
    ref_accel: float = 0.0


@dataclass(frozen=True)
class SurfaceGains:
    """PID sliding-surface gains; kd = 0 selects the PI surface."""

    kp: float
    ki: float
    kd: float = 0.0

    def __post_init__(self):
        if self.kp <= 0 or self.ki <= 0:
            raise ValueError("kp and ki must be positive")
        if self.kd < 0:
            raise ValueError("kd must be >= 0")


@dataclass(frozen=True)
class ReachingParams:
    """Reaching-law parameters.

    law = "proposed" gives sdot = -k*s - k_sc*|s|^alpha*sat(s, delta);
    law = "constant_exponential" gives sdot = -k*s - k_sc*sign(s).
    delta is the boundary-layer half width used by the smoothed switching term.
    """

    k: float
    k_sc: float
    alpha: float = 0.5
    delta: float = 0.05
    law: str = "proposed"

    def __post_init__(self):
        if self.k <= 0 or self.k_sc <= 0:
            raise ValueError("k and k_sc must be positive")
        if not 0.0 <= self.alpha <= 2.0:
            raise ValueError("alpha must lie in [0, 2]")
        if self.delta <= 0:
            raise ValueError("delta must be positive")
        if self.law not in ("proposed", "constant_exponential"):
            raise ValueError(f"unknown reaching law {self.law!r}")


def sign_fn(s: float) -> float:
    if s > 0:
        return 1.0
    if s < 0:
        return -1.0
    return 0.0


def sat_fn(s: float, delta: float) -> float:
    """Unit saturation: sign outside the layer, linear ramp s/delta inside."""
    if delta <= 0:
        raise ValueError("delta must be positive")
    if s > delta:
        return 1.0
    if s < -delta:
        return -1.0
    return s / delta


def surface(gains: SurfaceGains, frame: ErrorFrame) -> float:
    """PID sliding value kp*e + kd*edot + ki*eint."""
    return gains.kp * frame.e + gains.kd * frame.edot + gains.ki * frame.eint


def reaching_rate(params: ReachingParams, s: float) -> float:
    """Target surface derivative prescribed by the reaching law."""
    if params.law == "constant_exponential":
        return -params.k * s - params.k_sc * sign_fn(s)
    return -params.k * s - params.k_sc * abs(s) ** params.alpha * sat_fn(s, params.delta)


def _check_gain(denom: float, context: str) -> None:
    if abs(denom) < SINGULARITY_FLOOR:
        raise ControlSingularityError(
            f"{context}: effective input gain {denom:.3e} below singularity floor"
        )


def equivalent_control(gains: SurfaceGains, frame: ErrorFrame, f: float, g_in: float) -> float:
    """Control that holds the surface derivative at zero for the nominal plant."""
    denom = gains.kd * g_in
    _check_gain(denom, "equivalent control")
    return (gains.ki * frame.e + gains.kp * frame.edot
            + gains.kd * (frame.ref_accel - f)) / denom


def proposed_control(gains: SurfaceGains, reaching: ReachingParams, frame: ErrorFrame,
                     f: float, g_in: float) -> float:
    """Reaching-law control for a second-order plant on the PID surface.

    Solves ki*e + kp*edot + kd*(ref_accel - f - g_in*u) = reaching_rate(s)
    for u, so the nominal closed loop realizes the reaching law exactly.
    """
    denom = gains.kd * g_in
    _check_gain(denom, "reaching-law control")
    s = surface(gains, frame)
    return (gains.ki * frame.e + gains.kp * frame.edot + gains.kd * (frame.ref_accel - f)
            - reaching_rate(reaching, s)) / denom


def proposed_control_first_order(gains: SurfaceGains, reaching: ReachingParams,
                                 frame: ErrorFrame, f: float, g_in: float) -> float:
    """Reaching-law control for a first-order plant on the PI surface.

    With s = kp*e + ki*eint the solved law is
    u = (ki*e + kp*(ref_rate - f) - reaching_rate(s)) / (kp*g_in).
    """
    denom = gains.kp * g_in
    _check_gain(denom, "reaching-law control")
    s = surface(gains, frame)
    return (gains.ki * frame.e + gains.kp * (frame.ref_rate - f)
            - reaching_rate(reaching, s)) / denom


def first_order_smc_control(lam: float, k_sc: float, frame: ErrorFrame, f: float,
                            g_in: float, delta: float, smoothing: str = "sat") -> float:
    """Classical single-surface sliding controller on s = edot + lam*e."""
    _check_gain(g_in, "first-order sliding control")
    s = frame.edot + lam * frame.e
    switch = sign_fn(s) if smoothing == "sign" else sat_fn(s, delta)
    return (frame.ref_accel - f + lam * frame.edot + k_sc * switch) / g_in


def pid_control(gains: SurfaceGains, frame: ErrorFrame) -> float:
    """Parallel PID on the tracking error."""
    return gains.kp * frame.e + gains.ki * frame.eint + gains.kd * frame.edot


def switching_control(k_sc: float, g_in: float, s: float) -> float:
    """Constant-gain discontinuous term -(k_sc/g_in)*sign(s)."""
    _check_gain(g_in, "switching control")
    return -(k_sc / g_in) * sign_fn(s)


# ---------------------------------------------------------------------------
# controller objects used by the simulator


class PidSmcProposed:
    """PID-surface sliding-mode controller with the power-rate exponential law."""

    kind = "pid_smc_proposed"

    def __init__(self, gains: SurfaceGains, reaching: ReachingParams,
                 first_order: bool = False):
        if first_order and gains.kd != 0.0:
            raise ValueError("first-order plants use the PI surface; set kd = 0")
        if not first_order and gains.kd <= 0.0:
            raise ValueError("second-order plants need kd > 0")
        self.gains = gains
        self.reaching = reaching
        self.first_order = first_order
        self.required_order = 1 if first_order else 2

    @property
    def delta(self) -> float:
        return self.reaching.delta

    def sliding_value(self, frame: ErrorFrame) -> float:
        return surface(self.gains, frame)

    def control(self, frame: ErrorFrame, f: float, g_in: float) -> float:
        if self.first_order:
            return proposed_control_first_order(self.gains, self.reaching, frame, f, g_in)
        return proposed_control(self.gains, self.reaching, frame, f, g_in)


class PidSmcEquivalent:
    """Equivalent control plus constant-rate switching on the PID surface.

    The switching term solves sdot = -switch_gain*sat(s, delta) for the
    nominal plant, so reaching is rate-limited instead of exponential.
    """

    kind = "pid_smc_eq"
    required_order = 2

    def __init__(self, gains: SurfaceGains, switch_gain: float = 0.0,
                 delta: float = 0.05, smoothing: str = "sat"):
        if gains.kd <= 0.0:
            raise ValueError("equivalent control needs kd > 0")
        if switch_gain < 0:
            raise ValueError("switch_gain must be >= 0")
        self.gains = gains
        self.switch_gain = switch_gain
        self.delta = delta
        self.smoothing = smoothing

    def sliding_value(self, frame: ErrorFrame) -> float:
        return surface(self.gains, frame)

    def control(self, frame: ErrorFrame, f: float, g_in: float) -> float:
        u = equivalent_control(self.gains, frame, f, g_in)
        if self.switch_gain:
            s = surface(self.gains, frame)
            switch = sign_fn(s) if self.smoothing == "sign" else sat_fn(s, self.delta)
            u += self.switch_gain * switch / (self.gains.kd * g_in)
        return u


class FirstOrderSmc:
    """Classical sliding-mode baseline on s = edot + lam*e."""

    kind = "smc1"
    required_order = 2

    def __init__(self, lam: float = 5.0, k_sc: float = 10.0, delta: float = 0.05,
                 smoothing: str = "sat"):
        if lam <= 0:
            raise ValueError("lam must be positive")
        if smoothing not in ("sat", "sign"):
            raise ValueError(f"unknown smoothing {smoothing!r}")
        self.lam = lam
        self.k_sc = k_sc
        self.delta = delta
        self.smoothing = smoothing

    def sliding_value(self, frame: ErrorFrame) -> float:
        return frame.edot + self.lam * frame.e

    def control(self, frame: ErrorFrame, f: float, g_in: float) -> float:
        return first_order_smc_control(self.lam, self.k_sc, frame, f, g_in,
                                       self.delta, self.smoothing)


class PidController:
    """Plain PID baseline; action="reverse" flips the output sign for
    plants whose input gain is negative."""

    kind = "pid"
    required_order = None
    delta = None

    def __init__(self, gains: SurfaceGains, action: str = "direct"):
        if action not in ("direct", "reverse"):
            raise ValueError(f"unknown action {action!r}")
        self.gains = gains
        self.sign = 1.0 if action == "direct" else -1.0

    def sliding_value(self, frame: ErrorFrame) -> float:
        return surface(self.gains, frame)

    def control(self, frame: ErrorFrame, f: float, g_in: float) -> float:
        return self.sign * pid_control(self.gains, frame)


class ConstantControl:
    """Open-loop constant input; handy for steady-state and drain tests."""

    kind = "constant"
    required_order = None
    delta = None

    def __init__(self, value: float = 0.0):
        self.value = value

    def sliding_value(self, frame: ErrorFrame) -> float:
        return 0.0

    def control(self, frame: ErrorFrame, f: float, g_in: float) -> float:
        return self.value
