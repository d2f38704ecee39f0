"""Shared fixtures for the test suite.

The "benchmark protocol" is the dissipative reference run used across several
test modules: spin at 200 T with three near-resonant primary modes at 65 K,
spin excited and modes in vacuum at t = 0, propagated for 1000 ps.  It is
session-scoped because the full run takes about 90 s.
"""

import time

import numpy as np
import pytest

from spinphonon import SpinParameters, basis_state, build_model, propagate

PROTOCOL = {
    "g_diag": (1.987, 1.987, 1.987),
    "B_T": (0.0, 0.0, 200.0),
    "freqs": (183.0, 115.0, 108.0),
    "couplings": np.array(
        [[0.15, 0.35, 0.12], [0.0, 0.0, 0.0], [0.0, 0.0, 0.0]]
    ),
    "lifetimes": (43.3, 127.1, 2879.1),
    "temperature_K": 65.0,
    "n_f": 4,
    "t_max_ps": 1000.0,
    "dt_ps": 0.01,
    "stride": 100,
}

# wall-clock seconds of the session protocol run, filled by the fixture
PROTOCOL_WALL = {}

# one line per acceptance criterion, printed in the terminal summary
ACCEPTANCE_LINES = []


def protocol_model(n_f=None):
    spin = SpinParameters(PROTOCOL["g_diag"], PROTOCOL["B_T"])
    return build_model(
        spin,
        PROTOCOL["freqs"],
        PROTOCOL["couplings"],
        PROTOCOL["n_f"] if n_f is None else n_f,
        PROTOCOL["lifetimes"],
        PROTOCOL["temperature_K"],
    )


def run_protocol(n_f=None, dt=None, stride=None):
    model = protocol_model(n_f)
    rho0 = basis_state(model.layout, [0] * model.layout.n_subsystems)
    return propagate(
        model,
        rho0,
        PROTOCOL["t_max_ps"],
        PROTOCOL["dt_ps"] if dt is None else dt,
        stride=PROTOCOL["stride"] if stride is None else stride,
        mi_modes=(1, 2, 3),
    )


@pytest.fixture(scope="session")
def protocol_trajectory():
    t0 = time.perf_counter()
    traj = run_protocol()
    PROTOCOL_WALL["seconds"] = time.perf_counter() - t0
    return traj


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("-", "acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
