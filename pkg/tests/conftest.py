import numpy as np
import pytest

from thzmod import ModulatorConfig, PulseSpec, ThzSpec, calibrate_kappa, gaussian_pulse, thz_single_cycle
from thzmod.grid import centered_grid
from thzmod.spectral import default_taus


@pytest.fixture(scope="session")
def grid():
    return centered_grid(4096, 2e-15)


@pytest.fixture(scope="session")
def pulse_spec():
    return PulseSpec()


@pytest.fixture(scope="session")
def env(pulse_spec, grid):
    return gaussian_pulse(pulse_spec, grid)


@pytest.fixture(scope="session")
def field(grid):
    return thz_single_cycle(ThzSpec(), grid)


@pytest.fixture(scope="session")
def taus(field):
    return default_taus(field)


@pytest.fixture(scope="session")
def kappa(field, pulse_spec, taus):
    return calibrate_kappa(1.2e-9, field, pulse_spec, ModulatorConfig(), taus=taus)


@pytest.fixture(scope="session")
def mod(kappa):
    return ModulatorConfig(kappa=kappa)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# one verdict line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE = []


def record(label: str, ok: bool, detail: str) -> bool:
    line = f"{'PASS' if ok else 'FAIL'}  {label}: {detail}"
    ACCEPTANCE.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
