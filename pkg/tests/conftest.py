import numpy as np
import pytest
from hypothesis import settings

from slmorse.indices import random_lagrangian
from slmorse.waves import ReactionSystem, kdv_pulse_exact, nagumo_front_exact

settings.register_profile("default", max_examples=25, deadline=None)
settings.load_profile("default")


def lagrangian(seed: int, n: int) -> np.ndarray:
    return random_lagrangian(n, np.random.default_rng(seed))


@pytest.fixture(scope="session")
def nagumo():
    return ReactionSystem.nagumo(0.25), nagumo_front_exact(0.25)


@pytest.fixture(scope="session")
def pulse():
    return ReactionSystem.kdv(), kdv_pulse_exact()


def random_symplectic(n: int, rng) -> np.ndarray:
    """Product of a block-diagonal and a lower shear symplectic matrix."""
    A = rng.standard_normal((n, n)) + 2 * np.eye(n)
    S = rng.standard_normal((n, n))
    S = S + S.T
    Z = np.zeros((n, n))
    D = np.block([[A, Z], [Z, np.linalg.inv(A).T]])
    L = np.block([[np.eye(n), Z], [S, np.eye(n)]])
    return D @ L


def coordinate_lagrangian(mask, n: int) -> np.ndarray:
    """``span{e_i or f_i}``: momentum axis where ``mask[i]`` is true, position axis otherwise."""
    Z = np.zeros((2 * n, n))
    for i, m in enumerate(mask):
        Z[i if m else n + i, i] = 1.0
    return Z


def degenerate_tuple(rng, n: int, k: int) -> list:
    """``k`` Lagrangians that share coordinate axes, mapped by one symplectic matrix."""
    M = random_symplectic(n, rng)
    return [M @ coordinate_lagrangian(rng.integers(0, 2, n).astype(bool), n) for _ in range(k)]


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
