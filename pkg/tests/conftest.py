import math
import os

import pytest

from opentdse.core import GaussianParams, OutputSpec, PotentialSpec, SimulationConfig
from opentdse.hamiltonians import wavevector_from_energy

SIGMA0 = 25.0 / math.sqrt(2.0)

# lines printed after the run: one per acceptance criterion
ACCEPTANCE_LINES = []


def record_criterion(label, ok, detail=""):
    line = f"ACCEPTANCE {label}: {'PASS' if ok else 'FAIL'}" + (f"  ({detail})" if detail else "")
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def pytest_collection_modifyitems(config, items):
    if os.environ.get("OPENTDSE_FULL_ACCEPTANCE") == "1":
        return
    skip = pytest.mark.skip(reason="slow; set OPENTDSE_FULL_ACCEPTANCE=1")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)


def kx_of(energy):
    return wavevector_from_energy("effective_mass", energy, 0.2)


def packet(energy=0.1, x0=-70.0, sigma0=SIGMA0, **kw):
    return GaussianParams(sigma0=sigma0, x0=x0, kx=kx_of(energy), **kw)


def barrier(height):
    return PotentialSpec(kind="rectangular_barrier", barrier_center=27.5, barrier_width=5.0, barrier_height=height)


@pytest.fixture
def fig2_config():
    return SimulationConfig(packet=packet(0.1))


@pytest.fixture
def small_config():
    """Narrow domain that runs in milliseconds."""
    return SimulationConfig(
        packet=packet(0.1, x0=-60.0, sigma0=8.0), x_min=-200.0, x_max=200.0, a=0.0, b=50.0,
        potential=barrier(0.0825), outputs=OutputSpec(cadence=50),
    )
