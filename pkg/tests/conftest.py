import numpy as np
import pytest
from scipy.linalg import block_diag

from qrev.gaussian import SqueezedThermalParams, squeezed_thermal
from qrev.symplectic import symplectic_from_hamiltonian


def random_physical(rng, n_modes, nu_max=6.0, coupling=0.5):
    """``T diag(nu) T^T`` with random symplectic ``T`` and ``nu_k`` in ``[1, nu_max]``."""
    nus = rng.uniform(1.0, nu_max, n_modes)
    T = symplectic_from_hamiltonian(coupling * rng.normal(size=(2 * n_modes, 2 * n_modes)))
    return T @ np.diag(np.repeat(nus, 2)) @ T.T, nus, T


def product_state(*pairs):
    return block_diag(*[squeezed_thermal(SqueezedThermalParams(nu, r)) for nu, r in pairs])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_configure(config):
    config._acceptance_lines = []


@pytest.fixture
def criterion_report(request):
    """Record one pass/fail line per acceptance criterion; echoed in the terminal summary."""
    def report(number, passed, detail):
        line = f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}"
        print(line)
        request.config._acceptance_lines.append(line)
        return passed
    return report


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "_acceptance_lines", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
