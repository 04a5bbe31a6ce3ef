import numpy as np
import pytest

import qperturb as q

BASELINE_C = (1.0, 0.996, 0.4, -0.4)


@pytest.fixture(scope="session")
def baseline():
    """(rho0, spec, gamma0, eta0) for the default Bell-diagonal baseline."""
    rho0, spec = q.bell_diagonal_state(BASELINE_C)
    gamma0, eta0 = q.bell_diagonal_sqrt(spec)
    return rho0, spec, gamma0, eta0


@pytest.fixture(scope="session")
def hamiltonian():
    return q.build_hamiltonian(4.963, 4.838)


def random_density(rng, floor=0.0):
    """Random full-rank density matrix; floor lifts the smallest eigenvalue."""
    G = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    rho = G @ G.conj().T + floor * np.eye(4)
    return rho / np.real(np.trace(rho))


def random_qubit_density(rng):
    G = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    rho = G @ G.conj().T
    return rho / np.real(np.trace(rho))


def random_product_density(rng):
    return np.kron(random_qubit_density(rng), random_qubit_density(rng))


def random_hermitian(rng, dim=4):
    M = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return (M + M.conj().T) / 2.0
