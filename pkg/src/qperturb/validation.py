"""Input validation helpers shared by the library, estimators, and IO layer."""
import numpy as np

from .exceptions import NotHermitianInput, NotPositiveSemidefinite, ValidationError

HERMITIAN_TOL = 1e-12
PSD_CLAMP = 1e-10
TRACE_TOL = 1e-10


def as_complex_matrix(A, dim=None, name="matrix"):
    """Coerce to a square complex ndarray, optionally of a fixed dimension."""
    M = np.asarray(A, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValidationError(f"{name} must be square, got shape {M.shape}")
    if dim is not None and M.shape[0] != dim:
        raise ValidationError(f"{name} must be {dim}x{dim}, got {M.shape[0]}x{M.shape[0]}")
    if not np.all(np.isfinite(M.view(float))):
        raise ValidationError(f"{name} has non-finite entries")
    return M


def ensure_hermitian(A, tol=HERMITIAN_TOL, dim=None, name="matrix"):
    """Return A as complex ndarray after checking max |A - A†| <= tol."""
    M = as_complex_matrix(A, dim=dim, name=name)
    dev = np.max(np.abs(M - M.conj().T))
    if dev > tol:
        raise NotHermitianInput(f"{name} is not Hermitian (max deviation {dev:.3e} > {tol:.0e})")
    return M


def ensure_real_4x4(A, name="matrix"):
    """Coerce to a finite real 4x4 ndarray."""
    M = np.asarray(A, dtype=float)
    if M.shape != (4, 4):
        raise ValidationError(f"{name} must be a real 4x4 matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValidationError(f"{name} has non-finite entries")
    return M


def broadcast_entry_matrix(value, name="matrix"):
    """Accept a scalar or 4x4 array; scalars broadcast to a constant 4x4."""
    if np.isscalar(value):
        return np.full((4, 4), float(value))
    return ensure_real_4x4(value, name=name)


def ensure_psd(A, clamp=PSD_CLAMP, name="matrix"):
    """Check eigenvalues >= -clamp. Returns the eigenvalues (ascending)."""
    M = ensure_hermitian(A, tol=1e-9, name=name)
    w = np.linalg.eigvalsh(M)
    if w[0] < -clamp:
        raise NotPositiveSemidefinite(
            f"{name} has eigenvalue {w[0]:.3e} below the clamp window -{clamp:.0e}"
        )
    return w


def ensure_density(rho, trace_tol=TRACE_TOL, psd_clamp=PSD_CLAMP, name="state"):
    """Validate a unit-trace PSD operator; returns it as complex ndarray."""
    M = ensure_hermitian(rho, tol=1e-9, name=name)
    tr = float(np.real(np.trace(M)))
    if abs(tr - 1.0) > trace_tol:
        raise ValidationError(f"{name} trace {tr!r} deviates from 1 by more than {trace_tol:.0e}")
    ensure_psd(M, clamp=psd_clamp, name=name)
    return M


def clamp_unit_interval(x, slack=1e-9, name="value"):
    """Clip x into [-1, 1] tolerating at most `slack` of overshoot."""
    if x > 1.0 + slack or x < -1.0 - slack:
        raise ValidationError(f"{name} = {x!r} outside [-1, 1] beyond tolerance {slack:.0e}")
    return min(1.0, max(-1.0, x))
