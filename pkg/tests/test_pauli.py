import math

import numpy as np
import pytest

import qperturb as q
from qperturb.exceptions import InvalidBellCoefficients, NotHermitianInput, ValidationError

from conftest import BASELINE_C, random_hermitian


def test_project_reconstruct_round_trip():
    rng = np.random.default_rng(10)
    for _ in range(20):
        M = random_hermitian(rng)
        eta = q.pauli_project(M)
        assert eta.shape == (4, 4) and eta.dtype == float
        assert np.max(np.abs(q.pauli_reconstruct(eta) - M)) <= 1e-12


def test_project_rejects_non_hermitian():
    M = np.zeros((4, 4), dtype=complex)
    M[0, 1] = 1.0  # no conjugate partner
    with pytest.raises(NotHermitianInput):
        q.pauli_project(M)


def test_baseline_amplitudes_and_eigenvalues(baseline):
    rho0, spec, gamma0, eta0 = baseline
    expected = (
        0.5 * math.sqrt(0.004),
        0.5 * math.sqrt(1.196),
        0.5 * math.sqrt(2.796),
        0.5 * math.sqrt(0.004),
    )
    assert np.allclose(spec.amplitudes, expected, atol=1e-15)
    assert np.allclose(np.linalg.eigvalsh(rho0), [0.001, 0.001, 0.299, 0.699], atol=1e-12)
    assert np.max(np.abs(gamma0 @ gamma0 - rho0)) <= 1e-14
    assert abs(np.real(np.trace(gamma0 @ gamma0)) - 1.0) <= 1e-14
    assert np.allclose(q.pauli_project(gamma0), eta0, atol=1e-13)


def test_bell_diagonal_rejections():
    with pytest.raises(InvalidBellCoefficients):
        q.bell_diagonal_state((0.9999999, 0.996, 0.4, -0.4))
    with pytest.raises(InvalidBellCoefficients):
        q.bell_diagonal_state((1.0, 1.0, 1.0, 1.0))  # radicand -2
    with pytest.raises(InvalidBellCoefficients):
        q.bell_diagonal_state((1.0, 0.0, 0.0))


def test_random_bell_diagonal_valid():
    rng = np.random.default_rng(11)
    for _ in range(25):
        spec = q.random_bell_diagonal(rng)
        assert abs(spec.c[0] - 1.0) <= 1e-12
        rho, _ = q.bell_diagonal_state((1.0,) + tuple(spec.c[1:]))
        assert np.min(np.linalg.eigvalsh(rho)) >= -1e-12
    r1 = q.random_bell_diagonal(np.random.default_rng(5))
    r2 = q.random_bell_diagonal(np.random.default_rng(5))
    assert r1.c == r2.c


def test_hamiltonian_structure(hamiltonian):
    w0, w1 = 2 * math.pi * 4.963, 2 * math.pi * 4.838
    expected = np.diag([-(w0 + w1) / 2, -(w0 - w1) / 2, (w0 - w1) / 2, (w0 + w1) / 2])
    assert np.max(np.abs(hamiltonian.operator - expected)) <= 1e-12
    with pytest.raises(ValidationError):
        q.build_hamiltonian(0.0, 4.8)
    with pytest.raises(ValidationError):
        q.build_hamiltonian(4.9, -1.0)


def test_pure_bell_states(hamiltonian):
    phi, _ = q.pure_bell_state("phi+")
    expected = np.zeros((4, 4), dtype=complex)
    for i in (0, 3):
        for j in (0, 3):
            expected[i, j] = 0.5
    assert np.max(np.abs(phi - expected)) <= 1e-15
    for label in ("phi+", "phi-", "psi+", "psi-"):
        rho, spec = q.pure_bell_state(label)
        assert abs(np.real(np.trace(rho @ rho)) - 1.0) <= 1e-12  # pure
        assert abs(q.energy_expectation(rho, hamiltonian)) <= 1e-12
    with pytest.raises(ValidationError):
        q.pure_bell_state("sigma+")
