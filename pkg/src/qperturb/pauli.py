"""Pauli product basis representation for two-qubit operators.

Conversions between Hermitian operators and their real coefficients in the
orthonormal basis (1/2) sigma_i (x) sigma_j, construction of Bell-diagonal
states and their square roots, and Hamiltonian assembly.

Conventions: Pauli ordering (I, X, Y, Z); computational basis |00>, |01>,
|10>, |11> with qubit A as the left (slow) index; hbar = 1 with frequencies
in GHz, so energies are in rad/ns.
"""
from dataclasses import dataclass
import math

import numpy as np

from .exceptions import InvalidBellCoefficients, NotHermitianInput, ValidationError
from .validation import ensure_hermitian, ensure_real_4x4

SIGMA_0 = np.eye(2, dtype=complex)
SIGMA_1 = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_2 = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_3 = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI = (SIGMA_0, SIGMA_1, SIGMA_2, SIGMA_3)

# PRODUCT_BASIS[4*i + j] = sigma_i (x) sigma_j; orthonormal once scaled by 1/2.
PRODUCT_BASIS = np.array([np.kron(PAULI[i], PAULI[j]) for i in range(4) for j in range(4)])

# Bell-diagonal coefficient vectors of the four pure Bell projectors.
PURE_BELL_C = {
    "phi+": (1.0, 1.0, -1.0, 1.0),
    "phi-": (1.0, -1.0, 1.0, 1.0),
    "psi+": (1.0, 1.0, 1.0, -1.0),
    "psi-": (1.0, -1.0, -1.0, -1.0),
}


def pauli_project(omega) -> np.ndarray:
    """Coefficients eta[i, j] = (1/2) Tr[omega (sigma_i (x) sigma_j)].

    Imaginary residues up to 1e-12 are discarded; beyond 1e-9 the input is
    rejected as non-Hermitian.
    """
    M = ensure_hermitian(omega, tol=1e-9, dim=4, name="omega")
    traces = 0.5 * np.einsum("kij,ji->k", PRODUCT_BASIS, M)
    residue = float(np.max(np.abs(traces.imag)))
    if residue > 1e-9:
        raise NotHermitianInput(f"projection imaginary residue {residue:.3e} > 1e-9")
    return traces.real.reshape(4, 4).copy()


def pauli_reconstruct(eta) -> np.ndarray:
    """Operator (1/2) sum_ij eta[i, j] sigma_i (x) sigma_j."""
    E = ensure_real_4x4(eta, name="eta")
    return 0.5 * np.tensordot(E.reshape(16), PRODUCT_BASIS, axes=(0, 0))


@dataclass(frozen=True)
class BellDiagonalSpec:
    """Coefficients c and eigen-amplitudes (a, b, cc, d) of a Bell-diagonal state."""

    c: tuple
    a: float
    b: float
    cc: float
    d: float

    @property
    def amplitudes(self):
        return (self.a, self.b, self.cc, self.d)


def _amplitudes_from_c(c):
    radicands = (
        c[0] - c[1] + c[2] + c[3],
        c[0] + c[1] - c[2] + c[3],
        c[0] + c[1] + c[2] - c[3],
        c[0] - c[1] - c[2] - c[3],
    )
    amps = []
    for r in radicands:
        if r < -1e-12:
            raise InvalidBellCoefficients(f"negative radicand {r!r} for c = {tuple(c)}")
        amps.append(0.5 * math.sqrt(max(r, 0.0)))
    return tuple(amps)


def _c_from_amplitudes(a, b, cc, d):
    a2, b2, c2, d2 = a * a, b * b, cc * cc, d * d
    return (
        a2 + b2 + c2 + d2,
        -a2 + b2 + c2 - d2,
        a2 - b2 + c2 - d2,
        a2 + b2 - c2 - d2,
    )


def bell_diagonal_state(c):
    """Bell-diagonal state rho0 = (1/4) sum_i c_i sigma_i (x) sigma_i.

    Returns (rho0, spec). Requires c0 = 1 exactly and non-negative
    eigen-amplitude radicands.
    """
    c = tuple(float(x) for x in c)
    if len(c) != 4:
        raise InvalidBellCoefficients(f"c must have 4 entries, got {len(c)}")
    if c[0] != 1.0:
        raise InvalidBellCoefficients(f"c0 must be 1 exactly, got {c[0]!r}")
    a, b, cc, d = _amplitudes_from_c(c)
    spec = BellDiagonalSpec(c=c, a=a, b=b, cc=cc, d=d)
    eta = np.zeros((4, 4))
    eta[np.diag_indices(4)] = np.asarray(c) / 2.0
    rho0 = pauli_reconstruct(eta)
    return rho0, spec


def bell_diagonal_sqrt(spec: BellDiagonalSpec):
    """PSD square root of a Bell-diagonal state in closed form.

    Returns (gamma0, eta0) with eta0 the diagonal coefficient matrix
    ((a+b+cc+d), (b-a+cc-d), (a-b+cc-d), (a+b-cc-d)) / 2.
    """
    a, b, cc, d = spec.amplitudes
    diag = 0.5 * np.array([a + b + cc + d, b - a + cc - d, a - b + cc - d, a + b - cc - d])
    eta0 = np.diag(diag)
    gamma0 = pauli_reconstruct(eta0)
    return gamma0, eta0


def random_bell_diagonal(rng) -> BellDiagonalSpec:
    """Random Bell-diagonal spec from four draws in [-1, 1].

    The draws' distribution is not pinned upstream; uniform is used.
    Absolute values are taken before Euclidean normalization so the
    eigen-amplitude radicands stay non-negative.
    """
    while True:
        raw = rng.uniform(-1.0, 1.0, size=4)
        norm = float(np.linalg.norm(raw))
        if norm > 0.0:
            break
    a, b, cc, d = (abs(float(x)) / norm for x in raw)
    c = _c_from_amplitudes(a, b, cc, d)
    return BellDiagonalSpec(c=c, a=a, b=b, cc=cc, d=d)


@dataclass(frozen=True)
class TwoQubitHamiltonian:
    """H = -(1/2)(w0 sigma_3 (x) sigma_0 + w1 sigma_0 (x) sigma_3), w = 2 pi f."""

    f0: float
    f1: float
    operator: np.ndarray

    @property
    def matrix(self):
        return self.operator


def build_hamiltonian(f0: float, f1: float) -> TwoQubitHamiltonian:
    """Hamiltonian for qubit frequencies f0, f1 in GHz (energies in rad/ns)."""
    if not (f0 > 0 and f1 > 0):
        raise ValidationError(f"frequencies must be positive, got f0={f0!r}, f1={f1!r}")
    w0 = 2.0 * math.pi * f0
    w1 = 2.0 * math.pi * f1
    op = -0.5 * (w0 * np.kron(SIGMA_3, SIGMA_0) + w1 * np.kron(SIGMA_0, SIGMA_3))
    return TwoQubitHamiltonian(f0=float(f0), f1=float(f1), operator=op)


def pure_bell_state(label: str):
    """Projector and spec of one of the four pure Bell states.

    Labels: "phi+", "phi-", "psi+", "psi-".
    """
    key = label.lower()
    if key not in PURE_BELL_C:
        raise ValidationError(f"unknown Bell label {label!r}; expected one of {sorted(PURE_BELL_C)}")
    return bell_diagonal_state(PURE_BELL_C[key])
