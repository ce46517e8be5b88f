"""Shared fixtures: the reference demo-signal runs reused across test modules."""
import dataclasses

import pytest

import freqest as fq


@pytest.fixture(scope="session")
def sec5_runs():
    """Noise-free demo-signal runs at the reference step size, one per initial
    squared-frequency estimate. Keyed by zeta0."""
    out = {}
    for zeta0 in (1.0, 1e3, 5e6):
        sc = fq.preset_scenario("fig1-proposed").replace(zeta0=zeta0)
        out[zeta0] = sc.run()
    return out


@pytest.fixture(scope="session")
def sec5_result(sec5_runs):
    """The zeta0 = 1 reference run (dt = 1e-6, horizon 10 s, stride 100)."""
    return sec5_runs[1.0]
