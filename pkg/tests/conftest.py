import sys

import numpy as np
import pytest

from qpoly.optimize import OptimizerConfig


@pytest.fixture
def cfg():
    return OptimizerConfig(restarts=16, seed=3)


def wootters_eof(rho: np.ndarray) -> float:
    """Entanglement of formation of a two-qubit state from its concurrence."""
    yy = np.kron([[0, -1j], [1j, 0]], [[0, -1j], [1j, 0]])
    r = rho @ yy @ rho.conj() @ yy
    lam = np.sqrt(np.clip(np.sort(np.linalg.eigvals(r).real)[::-1], 0, None))
    c = max(0.0, lam[0] - lam[1] - lam[2] - lam[3])
    x = (1 + np.sqrt(1 - c * c)) / 2
    if x >= 1:
        return 0.0
    return float(-x * np.log(x) - (1 - x) * np.log(1 - x))


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        terminalreporter.write_line(results[n])
