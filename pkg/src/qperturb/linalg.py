"""Dense complex Hermitian linear algebra for 2x2 and 4x4 operators.

Eigendecomposition, matrix functions restricted to the operator's range,
tensor products, and partial traces. All functions are pure.
"""
from typing import NamedTuple

import numpy as np

from .exceptions import NotPositiveSemidefinite, ValidationError
from .validation import as_complex_matrix, ensure_hermitian

# Eigenvalues at or below this are treated as the operator's kernel.
KERNEL_THRESHOLD = 1e-12
# Negative eigenvalues in [-PSD_CLAMP, 0) are clamped to 0 for square roots.
PSD_CLAMP = 1e-10


class EigenDecomposition(NamedTuple):
    eigenvalues: np.ndarray  # real, ascending
    eigenvectors: np.ndarray  # unitary, columns are eigenvectors


def eig_hermitian(A) -> EigenDecomposition:
    """Eigendecomposition of a Hermitian matrix, eigenvalues ascending."""
    M = ensure_hermitian(A)
    w, V = np.linalg.eigh(M)
    return EigenDecomposition(w, V)


def _apply_spectral(M, fn):
    w, V = np.linalg.eigh(M)
    return (V * fn(w)) @ V.conj().T


def matrix_sqrt_psd(A) -> np.ndarray:
    """PSD square root. Eigenvalues in [-1e-10, 0) are clamped to 0."""
    M = ensure_hermitian(A)
    w, V = np.linalg.eigh(M)
    if w[0] < -PSD_CLAMP:
        raise NotPositiveSemidefinite(
            f"eigenvalue {w[0]:.3e} below the clamp window -{PSD_CLAMP:.0e}"
        )
    return (V * np.sqrt(np.clip(w, 0.0, None))) @ V.conj().T


def matrix_log_ranged(A) -> np.ndarray:
    """Logarithm on the range of A: ln on eigenvalues above the kernel
    threshold (1e-12), 0 on the kernel. A must be PSD."""
    M = ensure_hermitian(A)
    w, V = np.linalg.eigh(M)
    if w[0] < -PSD_CLAMP:
        raise NotPositiveSemidefinite(
            f"eigenvalue {w[0]:.3e} below the clamp window -{PSD_CLAMP:.0e}"
        )
    safe = np.where(w > KERNEL_THRESHOLD, w, 1.0)
    return (V * np.where(w > KERNEL_THRESHOLD, np.log(safe), 0.0)) @ V.conj().T


def anticommutator(X, Y) -> np.ndarray:
    """{X, Y} = XY + YX."""
    Mx = as_complex_matrix(X, name="X")
    My = as_complex_matrix(Y, name="Y")
    if Mx.shape != My.shape:
        raise ValidationError(f"dimension mismatch: {Mx.shape} vs {My.shape}")
    return Mx @ My + My @ Mx


def kron(X, Y) -> np.ndarray:
    """Kronecker product of two 2x2 matrices (subsystem A left/slow)."""
    Mx = as_complex_matrix(X, dim=2, name="X")
    My = as_complex_matrix(Y, dim=2, name="Y")
    return np.kron(Mx, My)


def partial_trace(rho, keep: str) -> np.ndarray:
    """Trace out one qubit of a 4x4 unit-trace operator.

    keep="A" returns Tr_B(rho), keep="B" returns Tr_A(rho). Basis ordering
    is |00>, |01>, |10>, |11> with qubit A as the left (slow) index.
    """
    M = ensure_hermitian(rho, tol=1e-9, dim=4, name="rho")
    tr = float(np.real(np.trace(M)))
    if abs(tr - 1.0) > 1e-9:
        raise ValidationError(f"partial_trace input trace {tr!r} not 1 within 1e-9")
    r = M.reshape(2, 2, 2, 2)
    if keep == "A":
        return np.trace(r, axis1=1, axis2=3)
    if keep == "B":
        return np.trace(r, axis1=0, axis2=2)
    raise ValidationError(f"keep must be 'A' or 'B', got {keep!r}")
