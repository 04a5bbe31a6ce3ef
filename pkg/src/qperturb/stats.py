"""Ensemble statistics: histograms, correlation matrices, and the analytic
references they are compared against."""
from dataclasses import dataclass
import math

import numpy as np

from .exceptions import ValidationError
from .validation import broadcast_entry_matrix

DEFAULT_BINS = 30

ETA_LABELS = tuple(f"eta_{i}{j}" for i in range(4) for j in range(4))


@dataclass(frozen=True)
class Histogram:
    """Equal-width density histogram; the densities integrate to one."""

    edges: np.ndarray
    densities: np.ndarray
    degenerate: bool = False

    @property
    def area(self) -> float:
        return float(np.sum(self.densities * np.diff(self.edges)))


def histogram_density(values, bins: int = DEFAULT_BINS) -> Histogram:
    """Density histogram over [min, max] with equal-width bins; the maximum
    lands in the last bin. Zero-range input yields a single unit-width bin
    flagged degenerate. Needs at least two values."""
    x = np.asarray(values, dtype=float).ravel()
    if x.size < 2:
        raise ValidationError(f"need at least 2 values to bin, got {x.size}")
    if not np.all(np.isfinite(x)):
        raise ValidationError("histogram input contains non-finite values")
    if bins < 1:
        raise ValidationError(f"bins must be >= 1, got {bins}")
    lo, hi = float(np.min(x)), float(np.max(x))
    if lo == hi:
        return Histogram(
            edges=np.array([lo - 0.5, lo + 0.5]),
            densities=np.array([1.0]),
            degenerate=True,
        )
    densities, edges = np.histogram(x, bins=bins, range=(lo, hi), density=True)
    return Histogram(edges=edges, densities=densities, degenerate=False)


@dataclass(frozen=True)
class CorrelationMatrix:
    """Pearson matrix with one label per variable. Degenerate variables
    (zero variance, or a unit baseline coefficient in the analytic form)
    have their rows and columns zeroed and their flag set."""

    labels: tuple
    matrix: np.ndarray
    degenerate: tuple

    def entry(self, label_a: str, label_b: str) -> float:
        return float(self.matrix[self.labels.index(label_a), self.labels.index(label_b)])


def pearson_matrix(samples, labels=ETA_LABELS) -> CorrelationMatrix:
    """Sample Pearson correlation of row vectors (n, k) or stacked (n, 4, 4)
    coefficient matrices flattened row-major. Needs n >= 3; sample variances
    use ddof = 1. Zero-variance columns are flagged and zeroed."""
    X = np.asarray(samples, dtype=float)
    if X.ndim == 3:
        X = X.reshape(X.shape[0], -1)
    if X.ndim != 2:
        raise ValidationError(f"expected (n, k) or (n, 4, 4) samples, got shape {X.shape}")
    n, k = X.shape
    if n < 3:
        raise ValidationError(f"need at least 3 samples for correlations, got {n}")
    labels = tuple(labels)
    if len(labels) != k:
        raise ValidationError(f"{k} variables but {len(labels)} labels")
    centered = X - X.mean(axis=0)
    std = X.std(axis=0, ddof=1)
    degenerate = std <= 1e-12 * (1.0 + np.abs(X.mean(axis=0)))
    denom = np.where(degenerate, 1.0, std * math.sqrt(n - 1))
    normed = centered / denom
    corr = np.clip(normed.T @ normed, -1.0, 1.0)
    corr[degenerate, :] = 0.0
    corr[:, degenerate] = 0.0
    return CorrelationMatrix(labels=labels, matrix=corr, degenerate=tuple(bool(d) for d in degenerate))


def chi_reference(k: int, sigma: float):
    """Mean and density of sigma times a chi-distributed variable with k
    degrees of freedom: mean = sigma sqrt(2) Gamma((k+1)/2) / Gamma(k/2)."""
    if int(k) != k or k < 1:
        raise ValidationError(f"degrees of freedom must be a positive integer, got {k!r}")
    if sigma <= 0:
        raise ValidationError(f"sigma must be > 0, got {sigma!r}")
    k = int(k)
    mean = sigma * math.sqrt(2.0) * math.exp(math.lgamma((k + 1) / 2.0) - math.lgamma(k / 2.0))
    log_norm = (k / 2.0 - 1.0) * math.log(2.0) + math.lgamma(k / 2.0)

    def pdf(x):
        u = np.asarray(x, dtype=float) / sigma
        with np.errstate(divide="ignore", invalid="ignore"):
            logp = (k - 1) * np.log(u) - 0.5 * u * u - log_norm - math.log(sigma)
        out = np.where(u > 0.0, np.exp(logp), 0.0)
        return float(out) if np.isscalar(x) else out

    return mean, pdf


def _diag_coefficients(eta0_diag) -> np.ndarray:
    d = np.asarray(eta0_diag, dtype=float)
    if d.shape == (4, 4):
        if np.max(np.abs(d - np.diag(np.diag(d)))) > 1e-12:
            raise ValidationError("baseline coefficient matrix is not diagonal")
        d = np.diag(d)
    if d.shape != (4,):
        raise ValidationError(f"expected 4 diagonal coefficients, got shape {d.shape}")
    return d


def analytic_unit_trace_correlation(eta0_diag) -> CorrelationMatrix:
    """Linearized correlation of the trace-corrected coefficients around a
    diagonal baseline with unit mean (mu = 0) draws:

        Corr[(i, j), (k, l)] = (d_ik d_jl - d_ij eta_ii d_kl eta_kk)
                               / sqrt(1 - d_ij eta_ii^2) sqrt(1 - d_kl eta_kk^2)

    Requires sum_i eta_ii^2 = 1 within 1e-9. A diagonal coefficient at
    +/- 1 zeroes the denominator; its label is flagged degenerate."""
    d = _diag_coefficients(eta0_diag)
    total = float(np.sum(d * d))
    if abs(total - 1.0) > 1e-9:
        raise ValidationError(f"sum of squared diagonal coefficients is {total!r}, not 1")
    proj = np.zeros(16)
    for i in range(4):
        proj[4 * i + i] = d[i]
    variance = 1.0 - proj * proj
    degenerate = variance <= 1e-12
    denom = np.where(degenerate, 1.0, np.sqrt(np.clip(variance, 0.0, None)))
    corr = (np.eye(16) - np.outer(proj, proj)) / np.outer(denom, denom)
    corr[degenerate, :] = 0.0
    corr[:, degenerate] = 0.0
    return CorrelationMatrix(
        labels=ETA_LABELS,
        matrix=np.clip(corr, -1.0, 1.0),
        degenerate=tuple(bool(x) for x in degenerate),
    )


def jacobian_covariance(eta0_diag, mu, sigma) -> np.ndarray:
    """Linearized 16 x 16 covariance of the trace-corrected coefficients:
    J diag(sigma^2) J^T with

        J[(i, j), (k, l)] = d_ik d_jl / t - v_ij v_kl / t^3,
        v_ij = d_ij eta_ii + mu_ij,
        t = sqrt(1 + 2 sum_i eta_ii mu_ii + sum_ij mu_ij^2),

    the Jacobian of the unit-trace rescaling evaluated at the mean draw."""
    d = _diag_coefficients(eta0_diag)
    mu = broadcast_entry_matrix(mu, name="mu")
    sigma = broadcast_entry_matrix(sigma, name="sigma")
    v = mu.copy()
    for i in range(4):
        v[i, i] += d[i]
    v = v.ravel()
    t_sq = 1.0 + 2.0 * float(np.sum(d * np.diag(mu))) + float(np.sum(mu * mu))
    if t_sq <= 0:
        raise ValidationError("mean draw has non-positive squared norm")
    t = math.sqrt(t_sq)
    J = np.eye(16) / t - np.outer(v, v) / t**3
    return J @ np.diag(sigma.ravel() ** 2) @ J.T
