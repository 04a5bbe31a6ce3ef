"""Distance and entanglement measures for two-qubit density operators.

All logarithms are natural. Pairwise measures (fidelity, angle, chord) take
two unit-trace PSD operators; the rest take one.
"""
from dataclasses import dataclass
import math

import numpy as np

from .linalg import KERNEL_THRESHOLD, matrix_sqrt_psd, partial_trace
from .pauli import PAULI, SIGMA_1, TwoQubitHamiltonian
from .validation import ensure_density, ValidationError

# arcsin/arccos arguments may overshoot their domain by at most this much.
CLAMP_SLACK = 1e-9

_FLIP = np.kron(SIGMA_1, SIGMA_1)


def entropy(rho) -> float:
    """Von Neumann entropy S = -Tr(rho ln rho), in [0, ln 4].

    Eigenvalues at or below the kernel threshold (1e-12) contribute zero.
    """
    M = ensure_density(rho, name="rho")
    w = np.linalg.eigvalsh(M)
    w = w[w > KERNEL_THRESHOLD]
    return float(-np.sum(w * np.log(w)))


def fidelity(rho1, rho2) -> float:
    """Root-overlap fidelity Tr(gamma1 gamma2) of the PSD square roots.

    Symmetric, in [0, 1], and 1 exactly when the states are equal. For
    commuting states it coincides with the square-root fidelity
    Tr sqrt(gamma1 rho2 gamma1); in general it is its cosine-angle
    counterpart (the overlap whose arccos is the root-space angle).
    """
    M1 = ensure_density(rho1, name="rho1")
    M2 = ensure_density(rho2, name="rho2")
    g1 = matrix_sqrt_psd(M1)
    g2 = matrix_sqrt_psd(M2)
    val = float(np.real(np.trace(g1 @ g2)))
    if val > 1.0 + CLAMP_SLACK or val < -CLAMP_SLACK:
        raise ValidationError(f"fidelity overlap {val!r} outside [0, 1] beyond tolerance")
    return min(1.0, max(0.0, val))


def state_distance(rho1, rho2):
    """Central angle theta and chord c between the PSD square roots.

    c = sqrt(Tr[(gamma1 - gamma2)^2]), theta = 2 arcsin(c / 2). For
    perturbations written in the Pauli basis, c equals the Euclidean norm
    of the coefficient difference.
    """
    M1 = ensure_density(rho1, name="rho1")
    M2 = ensure_density(rho2, name="rho2")
    diff = matrix_sqrt_psd(M1) - matrix_sqrt_psd(M2)
    c2 = float(np.real(np.trace(diff @ diff)))
    chord = math.sqrt(max(c2, 0.0))
    half = chord / 2.0
    if half > 1.0 + CLAMP_SLACK:
        raise ValidationError(f"arcsin argument {half!r} above 1 beyond tolerance")
    theta = 2.0 * math.asin(min(1.0, half))
    return theta, chord


def mutual_information(rho) -> float:
    """I(rho) = S(rho_A) + S(rho_B) - S(rho); zero for product states."""
    M = ensure_density(rho, name="rho")
    if M.shape[0] != 4:
        raise ValidationError("mutual_information requires a 4x4 state")
    sa = entropy(partial_trace(M, "A"))
    sb = entropy(partial_trace(M, "B"))
    return sa + sb - entropy(M)


def concurrence(rho) -> float:
    """max(0, r1 - r2 - r3 - r4) with r_i the decreasingly ordered
    eigenvalues of sqrt(gamma rho_tilde gamma).

    rho_tilde = (sigma_1 (x) sigma_1) conj(rho) (sigma_1 (x) sigma_1), with
    complex conjugation in the computational basis.
    """
    M = ensure_density(rho, name="rho")
    if M.shape[0] != 4:
        raise ValidationError("concurrence requires a 4x4 state")
    gamma = matrix_sqrt_psd(M)
    flipped = _FLIP @ M.conj() @ _FLIP
    w = np.linalg.eigvalsh(gamma @ flipped @ gamma)
    r = np.sqrt(np.clip(w, 0.0, None))[::-1]
    val = float(r[0] - r[1] - r[2] - r[3])
    if val > 1.0 + CLAMP_SLACK:
        raise ValidationError(f"concurrence {val!r} above 1 beyond tolerance")
    return min(1.0, max(0.0, val))


def chsh_max(rho) -> float:
    """Maximum CHSH expectation 2 sqrt(e1 + e2), where e1 >= e2 are the two
    largest eigenvalues of T^T T and T[i, j] = Tr[rho (sigma_i (x) sigma_j)]
    for i, j in {1, 2, 3}."""
    M = ensure_density(rho, name="rho")
    if M.shape[0] != 4:
        raise ValidationError("chsh_max requires a 4x4 state")
    T = np.empty((3, 3))
    for i in range(1, 4):
        for j in range(1, 4):
            T[i - 1, j - 1] = float(np.real(np.trace(M @ np.kron(PAULI[i], PAULI[j]))))
    e = np.linalg.eigvalsh(T.T @ T)
    val = 2.0 * math.sqrt(max(0.0, float(e[-1] + e[-2])))
    bound = 2.0 * math.sqrt(2.0)
    if val > bound + 1e-10:
        raise ValidationError(f"chsh_max {val!r} above 2*sqrt(2) beyond tolerance")
    return min(val, bound)


def energy_expectation(rho, hamiltonian: TwoQubitHamiltonian) -> float:
    """Tr(rho H) in rad/ns units."""
    M = ensure_density(rho, name="rho")
    val = complex(np.trace(M @ hamiltonian.operator))
    if abs(val.imag) > 1e-12:
        raise ValidationError(f"energy has imaginary residue {val.imag!r} > 1e-12")
    return float(val.real)


@dataclass(frozen=True)
class MeasureReport:
    """All measures of one state, pairwise ones taken against a reference."""

    fidelity: float
    theta: float
    chord: float
    energy: float
    entropy: float
    mutual_information: float
    concurrence: float
    chsh_max: float

    FIELDS = (
        "fidelity",
        "theta",
        "chord",
        "energy",
        "entropy",
        "mutual_information",
        "concurrence",
        "chsh_max",
    )

    def as_dict(self):
        return {name: getattr(self, name) for name in self.FIELDS}


def measure_report(rho, reference, hamiltonian: TwoQubitHamiltonian) -> MeasureReport:
    """Full MeasureReport of rho; fidelity/theta/chord are against reference."""
    theta, chord = state_distance(reference, rho)
    mi = mutual_information(rho)
    return MeasureReport(
        fidelity=fidelity(reference, rho),
        theta=theta,
        chord=chord,
        energy=energy_expectation(rho, hamiltonian),
        entropy=entropy(rho),
        mutual_information=mi if mi >= 0.0 else (0.0 if mi >= -1e-10 else mi),
        concurrence=concurrence(rho),
        chsh_max=chsh_max(rho),
    )
