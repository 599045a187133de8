import numpy as np
import pytest

from quasiext.operator_model import PositiveMap

ACCEPTANCE_LINES = []


def unit(n, i, j):
    """Matrix unit with a one at the 1-based position ``(i, j)``."""
    m = np.zeros((n, n), dtype=complex)
    m[i - 1, j - 1] = 1.0
    return m


def random_positive(rng, n, lo=0.5, hi=2.0):
    q, _ = np.linalg.qr(rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))
    w = rng.uniform(lo, hi, n)
    return PositiveMap.from_matrix((q * w) @ q.conj().T)


def random_unitary(rng, n):
    q, r = np.linalg.qr(rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))
    return q * (np.diag(r) / np.abs(np.diag(r)))


@pytest.fixture
def A21():
    return PositiveMap.diag([2.0, 1.0])


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
