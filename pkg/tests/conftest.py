import pytest

from pidsmc import harness


@pytest.fixture(scope="session")
def preset_runs():
    """Each bundled reaching-law scenario simulated once per session."""
    runs = {}
    for name in ("pendulum_stabilize", "vdp_tracking", "tank_level"):
        bundle = harness.load_scenario(name)
        runs[name] = (bundle, harness.run_scenario(bundle))
    return runs
