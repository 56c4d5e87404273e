"""Sliding-mode control simulation toolkit.

PID-surface sliding-mode controllers with a power-rate exponential reaching
law, swarm-based gain tuning, three nonlinear benchmark plants, and the
metrics to compare controllers on them.
"""

__version__ = "0.1.0"

from .dynamics import (  # noqa: F401
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
    rk4_step,
    simulate,
)
from .smc import (  # noqa: F401
    ConstantControl,
    ControlSingularityError,
    ErrorFrame,
    FirstOrderSmc,
    PidController,
    PidSmcEquivalent,
    PidSmcProposed,
    ReachingParams,
    SurfaceGains,
)
