import warnings

import numpy as np
import pytest

from carsrecon.eigensolver import ground_basis
from carsrecon.grid import make_grid
from carsrecon.inversion import recover_correlations, sign_oracle
from carsrecon.potentials import LI2_REDUCED_MASS, preset
from carsrecon.signs import ScoreSettings
from carsrecon.synth import PulseConfig, exact_correlations, synth_closure, uniform_axis

MASS = LI2_REDUCED_MASS


class System:
    """Desk-scale reference data for one molecule, computed once per session."""

    def __init__(self, excited: str, count: int, settings: ScoreSettings):
        self.grid = make_grid(2.0, 12.0, 256)
        self.excited = preset(excited)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            self.basis = ground_basis(self.grid, preset("X"), MASS, count)
        self.pulses = PulseConfig(omega0=self.basis.omega0)
        self.t = uniform_axis(0.0, 80.0, 0.2)
        self.tau = uniform_axis(3.0, 1500.0, 1.0)
        self.exact = exact_correlations(self.basis, self.excited, self.t)
        self.cube = synth_closure(self.basis, self.exact, self.pulses, self.t, self.tau)
        self.corr = recover_correlations(self.cube, self.basis)
        self.oracle = sign_oracle(self.corr.values, self.exact)
        self.settings = settings


@pytest.fixture(scope="session")
def grid():
    return make_grid(2.0, 12.0, 256)


@pytest.fixture(scope="session")
def x_basis(grid):
    return ground_basis(grid, preset("X"), MASS, 25)


@pytest.fixture(scope="session")
def li2():
    return System("A", 25, ScoreSettings())


@pytest.fixture(scope="session")
def dli2():
    return System("A_tilde", 40, ScoreSettings(centers_fs=(5.0, 40.0, 75.0), t_star_fs=79.0,
                                               snapshot_times_fs=(5.0, 79.0), eta=0.1))


def gaussian(x, x0, sigma, k0=0.0):
    """Normalised Gaussian with |psi|^2 of standard deviation sigma."""
    return (2 * np.pi * sigma**2) ** -0.25 * np.exp(-((x - x0) ** 2) / (4 * sigma**2) + 1j * k0 * x)


@pytest.fixture(scope="session")
def acceptance_log(request):
    """Collects one summary line per acceptance criterion."""
    if not hasattr(request.config, "_acceptance_lines"):
        request.config._acceptance_lines = {}
    return request.config._acceptance_lines


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "_acceptance_lines", {})
    if lines:
        terminalreporter.section("acceptance criteria")
        for k in sorted(lines):
            terminalreporter.write_line(lines[k])
