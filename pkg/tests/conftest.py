from pathlib import Path

import numpy as np
import pytest

from waveleton.moyal import hamiltonian
from waveleton.phasespace import initial_state_library, make_grid, wignerize

DATA_DIR = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def grid128():
    return make_grid(128, 128, (-8.0, 8.0), (-8.0, 8.0))


@pytest.fixture(scope="session")
def grid64():
    return make_grid(64, 64, (-8.0, 8.0), (-8.0, 8.0))


@pytest.fixture(scope="session")
def ground_state(grid128):
    """Harmonic-oscillator ground state (m = omega = hbar = 1)."""
    return wignerize(initial_state_library("coherent", grid128), grid128)


@pytest.fixture(scope="session")
def coherent_state(grid128):
    return wignerize(initial_state_library("coherent", grid128, q0=1.0), grid128)


@pytest.fixture(scope="session")
def cat_state(grid128):
    return wignerize(initial_state_library("cat", grid128, q0=3.0), grid128)


@pytest.fixture(scope="session")
def harmonic():
    return hamiltonian(1.0, (0.0, 0.0, 0.5), "harmonic")


@pytest.fixture(scope="session")
def quartic():
    return hamiltonian(1.0, (0.0, 0.0, 0.0, 0.0, 0.25), "quartic")


@pytest.fixture()
def rng():
    return np.random.default_rng(20240817)
