"""Trajectory evaluation: timing metrics, error norms, chattering, Lyapunov audit.

Conventions (declared here and in every report header):
  * rise time is the 90% -> 10% decay of the output deviation from its
    initial value toward the target;
  * settling time is the earliest time, relative to the trajectory start,
    after which the deviation stays inside max(band_fraction*|initial
    deviation|, 1e-4);
  * chattering amplitude is the mean absolute sample-to-sample control
    difference over the final 20% of the horizon;
  * the Lyapunov audit checks V = s^2/2 with a central-difference Vdot and
    counts samples outside the boundary layer where Vdot >= 0.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional

import numpy as np

SETTLING_BAND_FLOOR = 1e-4


def ise(traj) -> float:
    """Integral of squared tracking error by trapezoidal quadrature."""
    return float(np.trapezoid(traj.e**2, traj.t))


def _deviation(traj, target: float) -> np.ndarray:
    return np.abs(traj.output() - target)


def rise_time(traj, initial: float, target: float) -> Optional[float]:
    """Time for the deviation to fall from 90% to 10% of |initial - target|.

    Returns None when the 10% level is never crossed.
    """
    dev0 = abs(initial - target)
    if dev0 <= 0:
        raise ValueError("initial value must differ from the target")
    dev = _deviation(traj, target)
    below_hi = np.nonzero(dev <= 0.9 * dev0)[0]
    below_lo = np.nonzero(dev <= 0.1 * dev0)[0]
    if len(below_lo) == 0:
        return None
    return float(traj.t[below_lo[0]] - traj.t[below_hi[0]])


def settling_time(traj, target: float, band_fraction: float = 0.02) -> Optional[float]:
    """Earliest time after which the deviation stays inside the band.

    The band is max(band_fraction * |initial deviation|, 1e-4). The result is
    measured from the first sample, so it is invariant to time-axis shifts.
    Returns None when the deviation is still outside the band at the horizon.
    """
    if band_fraction <= 0:
        raise ValueError("band fraction must be positive")
    dev = _deviation(traj, target)
    band = max(band_fraction * dev[0], SETTLING_BAND_FLOOR)
    outside = np.nonzero(dev > band)[0]
    if len(outside) == 0:
        return 0.0
    last = outside[-1]
    if last == len(dev) - 1:
        return None
    return float(traj.t[last + 1] - traj.t[0])


def steady_state_error(traj, target: float, tail_fraction: float = 0.1) -> float:
    """Mean absolute deviation from the target over the final tail."""
    dev = _deviation(traj, target)
    start = _tail_start(len(dev), tail_fraction)
    return float(np.mean(dev[start:]))


def _tail_start(n: int, tail_fraction: float) -> int:
    # index-based so the window is invariant to time-axis shifts
    span = int(round(tail_fraction * (n - 1)))
    return max(0, n - 1 - span)


def chattering_amplitude(traj, tail_fraction: float = 0.2) -> float:
    """Mean |u[n+1] - u[n]| over the final tail of the horizon."""
    start = _tail_start(len(traj.u), tail_fraction)
    tail = traj.u[start:]
    if len(tail) < 2:
        return 0.0
    return float(np.mean(np.abs(np.diff(tail))))


@dataclass(frozen=True)
class LyapunovAudit:
    violations: int
    worst_margin: Optional[float]  # max Vdot outside the layer; None if never outside


def lyapunov_audit(traj, delta: float) -> LyapunovAudit:
    """Check the decrease of V = s^2/2 outside the boundary layer |s| <= delta.

    Vdot uses central differences on the sampling grid (one-sided at the
    endpoints). A sample violates when |s| > delta and Vdot >= 0.
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    s = traj.s
    if len(s) < 2:
        return LyapunovAudit(0, None)
    dt = traj.dt
    v = 0.5 * s * s
    vdot = np.empty_like(v)
    vdot[1:-1] = (v[2:] - v[:-2]) / (2.0 * dt)
    vdot[0] = (v[1] - v[0]) / dt
    vdot[-1] = (v[-1] - v[-2]) / dt
    outside = np.abs(s) > delta
    if not outside.any():
        return LyapunovAudit(0, None)
    margin = float(np.max(vdot[outside]))
    violations = int(np.count_nonzero(outside & (vdot >= 0.0)))
    return LyapunovAudit(violations, margin)


@dataclass
class MetricReport:
    """Flat per-run metric summary; None marks a level that was never reached."""

    rise_time: Optional[float]
    settling_time: Optional[float]
    ise: float
    steady_state_error: float
    chattering_amplitude: float
    lyapunov_violations: int
    lyapunov_worst_margin: Optional[float]

    def to_dict(self) -> dict:
        return {
            "rise_time": self.rise_time,
            "settling_time": self.settling_time,
            "ise": self.ise,
            "steady_state_error": self.steady_state_error,
            "chattering_amplitude": self.chattering_amplitude,
            "lyapunov_violations": self.lyapunov_violations,
            "lyapunov_worst_margin": self.lyapunov_worst_margin,
        }

    def to_json(self, **meta) -> str:
        payload = dict(self.to_dict())
        if meta:
            payload["_meta"] = meta
        return json.dumps(payload, sort_keys=True, indent=2)


def evaluate(traj, target: float, delta: float = 0.05,
             band_fraction: float = 0.02) -> MetricReport:
    """Full metric report against a constant target level."""
    initial = float(traj.output()[0])
    if abs(initial - target) > 0:
        rise = rise_time(traj, initial, target)
    else:
        rise = 0.0
    audit = lyapunov_audit(traj, delta)
    return MetricReport(
        rise_time=rise,
        settling_time=settling_time(traj, target, band_fraction),
        ise=ise(traj),
        steady_state_error=steady_state_error(traj, target),
        chattering_amplitude=chattering_amplitude(traj),
        lyapunov_violations=audit.violations,
        lyapunov_worst_margin=audit.worst_margin,
    )
