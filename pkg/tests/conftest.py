import sys

import numpy as np
import pytest
import scipy.sparse as sp


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)


class Oscillator:
    """H = (p^2 + omega^2 q^2) / 2, state (q, p)."""

    dim = 2
    invariants = staticmethod(lambda y: {})

    def __init__(self, omega=1.0):
        self.omega = omega
        self.linear_operator = sp.csr_matrix([[0.0, 1.0], [-omega**2, 0.0]])

    def rhs(self, y):
        y = np.asarray(y, dtype=float)
        return np.stack([y[..., 1], -self.omega**2 * y[..., 0]], axis=-1)

    linear_part = rhs

    def hamiltonian(self, y):
        return 0.5 * (y[1] ** 2 + self.omega**2 * y[0] ** 2)


class Cubic:
    """H = p - q^3 / 3, so q' = 1 and p' = q^2; the flow is polynomial in t."""

    dim = 2
    linear_operator = sp.csr_matrix((2, 2))
    invariants = staticmethod(lambda y: {})

    def rhs(self, y):
        y = np.asarray(y, dtype=float)
        return np.stack([np.ones_like(y[..., 0]), y[..., 0] ** 2], axis=-1)

    def linear_part(self, y):
        return np.zeros_like(np.asarray(y, dtype=float))

    def hamiltonian(self, y):
        return y[1] - y[0] ** 3 / 3.0


class Quartic:
    """H = p^2/2 + q^2/2 + q^4/4 (degree 4), linear part the oscillator."""

    dim = 2
    linear_operator = sp.csr_matrix([[0.0, 1.0], [-1.0, 0.0]])
    invariants = staticmethod(lambda y: {})

    def rhs(self, y):
        y = np.asarray(y, dtype=float)
        q, p = y[..., 0], y[..., 1]
        return np.stack([p, -q - q**3], axis=-1)

    def linear_part(self, y):
        y = np.asarray(y, dtype=float)
        return np.stack([y[..., 1], -y[..., 0]], axis=-1)

    def hamiltonian(self, y):
        return 0.5 * y[1] ** 2 + 0.5 * y[0] ** 2 + 0.25 * y[0] ** 4


class Zero:
    dim = 3
    linear_operator = sp.csr_matrix((3, 3))
    invariants = staticmethod(lambda y: {})

    def rhs(self, y):
        return np.zeros_like(np.asarray(y, dtype=float))

    linear_part = rhs

    def hamiltonian(self, y):
        return 0.0


@pytest.fixture
def oscillator():
    return Oscillator()


@pytest.fixture
def cubic():
    return Cubic()


@pytest.fixture
def quartic():
    return Quartic()


@pytest.fixture
def zero_field():
    return Zero()
