"""Constrained random perturbation engine.

Draws perturbed square roots gamma_eps = gamma0 + (1/2) sum eta_ij
sigma_i (x) sigma_j, then corrects each draw to satisfy expectation-value
constraints (trace, energy, entropy) by solving for Lagrange-style
multipliers: gamma_r = gamma_eps - sum_i lambda_i {G_i(gamma_eps^2),
gamma_eps}. The anticommutator directions are frozen at gamma_eps while the
residuals are evaluated exactly at the candidate gamma_r, and rho_r =
gamma_r^2 is positive semi-definite by construction.

Determinism: each sample index gets its own random stream derived from
(seed, index). The 16 perturbation normals are drawn first (row-major),
then any sampled targets in constraint order; entropy target redraws stay
in the same stream. Accepted-sample sets are therefore reproducible and
independent of scheduling.
"""
from dataclasses import dataclass, field
import math
from typing import Union

import numpy as np

from .exceptions import (
    NonPhysicalResult,
    SolverDiverged,
    SolverFailureRateExceeded,
    ValidationError,
)
from .linalg import KERNEL_THRESHOLD, anticommutator, matrix_log_ranged
from .pauli import TwoQubitHamiltonian, pauli_project, pauli_reconstruct
from .validation import broadcast_entry_matrix, ensure_hermitian

MAX_ENTROPY = math.log(4.0)
SOLVER_TOL = 1e-10
FD_STEP = 1e-7
MAX_ITERATIONS = 100
MAX_HALVINGS = 20

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class PerturbationConfig:
    """Per-entry normal perturbation parameters and the ensemble size."""

    mu: np.ndarray
    sigma: np.ndarray
    seed: int
    sample_count: int

    def __post_init__(self):
        object.__setattr__(self, "mu", broadcast_entry_matrix(self.mu, name="mu"))
        object.__setattr__(self, "sigma", broadcast_entry_matrix(self.sigma, name="sigma"))
        if np.any(self.sigma < 0):
            raise ValidationError("sigma entries must be >= 0")
        if self.sample_count < 1:
            raise ValidationError(f"sample_count must be >= 1, got {self.sample_count}")


@dataclass(frozen=True)
class Fixed:
    """Marker: the constraint keeps its stored target for every sample."""


@dataclass(frozen=True)
class SampledNormal:
    """Per-sample targets drawn from N(mean, stddev)."""

    mean: float
    stddev: float

    def __post_init__(self):
        if self.stddev < 0:
            raise ValidationError("target stddev must be >= 0")


TargetMode = Union[Fixed, SampledNormal]


@dataclass(frozen=True)
class UnitTrace:
    kind = "trace"
    target: float = 1.0


@dataclass(frozen=True)
class Energy:
    hamiltonian: TwoQubitHamiltonian
    target: float
    mode: TargetMode = field(default_factory=Fixed)
    kind = "energy"


@dataclass(frozen=True)
class Entropy:
    target: float
    mode: TargetMode = field(default_factory=Fixed)
    kind = "entropy"

    def __post_init__(self):
        if isinstance(self.mode, Fixed) and not (0.0 <= self.target <= MAX_ENTROPY + 1e-12):
            raise ValidationError(
                f"entropy target {self.target!r} outside [0, ln 4]"
            )


class ConstraintSet:
    """Ordered constraints; unit trace is always present and first."""

    def __init__(self, constraints):
        constraints = tuple(constraints)
        if not constraints or not isinstance(constraints[0], UnitTrace):
            raise ValidationError("the unit-trace constraint must be present and first")
        kinds = [c.kind for c in constraints]
        if len(set(kinds)) != len(kinds):
            raise ValidationError(f"duplicate constraint kinds in {kinds}")
        self.constraints = constraints

    def __iter__(self):
        return iter(self.constraints)

    def __len__(self):
        return len(self.constraints)

    @property
    def kinds(self):
        return tuple(c.kind for c in self.constraints)


def make_sample_rng(seed: int, index: int) -> np.random.Generator:
    """The dedicated random stream of one sample index."""
    return np.random.default_rng([int(seed) & _MASK64, int(index)])


def sample_gamma_epsilon(gamma0, config: PerturbationConfig, index: int, rng=None):
    """One perturbed root gamma_eps and its raw coefficients eta.

    gamma0 must satisfy Tr(gamma0^2) = 1 within 1e-10. Deterministic given
    (config.seed, index); pass `rng` to continue an existing per-sample
    stream instead.
    """
    g0 = ensure_hermitian(gamma0, tol=1e-9, dim=4, name="gamma0")
    norm = float(np.real(np.trace(g0 @ g0)))
    if abs(norm - 1.0) > 1e-10:
        raise ValidationError(f"Tr(gamma0^2) = {norm!r} deviates from 1 beyond 1e-10")
    if rng is None:
        rng = make_sample_rng(config.seed, index)
    eta = config.mu + config.sigma * rng.standard_normal((4, 4))
    return g0 + pauli_reconstruct(eta), eta


def _entropy_from_square(rho) -> float:
    w = np.linalg.eigvalsh(rho)
    w = w[w > KERNEL_THRESHOLD]
    return float(-np.sum(w * np.log(w)))


def constraint_value(rho, constraint) -> float:
    """Constrained expectation of rho: Tr(rho), Tr(rho H), or the entropy
    S = -Tr(rho ln rho) (reported positive, in [0, ln 4] for unit trace)."""
    M = ensure_hermitian(rho, tol=1e-9, dim=4, name="rho")
    w = np.linalg.eigvalsh(M)
    if w[0] < -1e-10:
        raise ValidationError(f"rho eigenvalue {w[0]:.3e} below the PSD clamp window")
    if constraint.kind == "trace":
        return float(np.real(np.trace(M)))
    if constraint.kind == "energy":
        return float(np.real(np.trace(M @ constraint.hamiltonian.operator)))
    w = w[w > KERNEL_THRESHOLD]
    return float(-np.sum(w * np.log(w)))


def constraint_gradient(constraint, gamma) -> np.ndarray:
    """Gradient operator G_i evaluated at gamma^2: identity for trace, H for
    energy, -I - ln(gamma^2) on its range for entropy."""
    g = ensure_hermitian(gamma, tol=1e-9, dim=4, name="gamma")
    if constraint.kind == "trace":
        return np.eye(4, dtype=complex)
    if constraint.kind == "energy":
        return constraint.hamiltonian.operator
    return -np.eye(4, dtype=complex) - matrix_log_ranged(g @ g)


@dataclass(frozen=True)
class SolverDiagnostics:
    iterations: int
    residuals: np.ndarray
    converged: bool

    @property
    def residual_max(self) -> float:
        return float(np.max(np.abs(self.residuals)))


def _residuals(lambdas, gamma_eps, directions, kinds, targets, hams):
    gamma_r = gamma_eps - np.tensordot(lambdas, directions, axes=(0, 0))
    rho_r = gamma_r @ gamma_r
    res = np.empty(len(kinds))
    for i, kind in enumerate(kinds):
        if kind == "trace":
            value = float(np.real(np.trace(rho_r)))
        elif kind == "energy":
            value = float(np.real(np.trace(rho_r @ hams[i])))
        else:
            value = _entropy_from_square(rho_r)
        res[i] = value - targets[i]
    return res, gamma_r


def apply_constraints(gamma_eps, constraints: ConstraintSet, targets):
    """Correct gamma_eps so each constrained expectation of gamma_r^2 hits
    its target within 1e-10.

    Damped Newton iteration on the multipliers from lambda = 0, with a
    central finite-difference Jacobian (step 1e-7) and step halving when the
    residual norm fails to decrease. Returns (gamma_r, lambdas,
    diagnostics). Raises SolverDiverged when the iteration cap or the
    halving budget is exhausted.
    """
    ge = ensure_hermitian(gamma_eps, tol=1e-9, dim=4, name="gamma_eps")
    targets = np.asarray(targets, dtype=float)
    n = len(constraints)
    if targets.shape != (n,):
        raise ValidationError(f"expected {n} targets, got shape {targets.shape}")
    kinds = constraints.kinds
    hams = [c.hamiltonian.operator if c.kind == "energy" else None for c in constraints]
    directions = np.array([anticommutator(constraint_gradient(c, ge), ge) for c in constraints])

    lambdas = np.zeros(n)
    residuals, gamma_r = _residuals(lambdas, ge, directions, kinds, targets, hams)
    iterations = 0
    while float(np.max(np.abs(residuals))) > SOLVER_TOL:
        if iterations >= MAX_ITERATIONS:
            raise SolverDiverged(
                f"no convergence after {MAX_ITERATIONS} iterations",
                SolverDiagnostics(iterations, residuals, False),
            )
        jac = np.empty((n, n))
        for j in range(n):
            dp = np.zeros(n)
            dp[j] = FD_STEP
            rp, _ = _residuals(lambdas + dp, ge, directions, kinds, targets, hams)
            rm, _ = _residuals(lambdas - dp, ge, directions, kinds, targets, hams)
            jac[:, j] = (rp - rm) / (2.0 * FD_STEP)
        try:
            step = np.linalg.solve(jac, -residuals)
        except np.linalg.LinAlgError:
            raise SolverDiverged(
                "singular Jacobian", SolverDiagnostics(iterations, residuals, False)
            ) from None
        norm0 = float(np.linalg.norm(residuals))
        scale = 1.0
        for _ in range(MAX_HALVINGS + 1):
            trial, trial_gamma = _residuals(lambdas + scale * step, ge, directions, kinds, targets, hams)
            if float(np.linalg.norm(trial)) < norm0:
                break
            scale *= 0.5
        else:
            raise SolverDiverged(
                "residual norm stalled during step halving",
                SolverDiagnostics(iterations, residuals, False),
            )
        lambdas = lambdas + scale * step
        residuals, gamma_r = trial, trial_gamma
        iterations += 1

    rho_r = gamma_r @ gamma_r
    min_eig = float(np.linalg.eigvalsh(rho_r)[0])
    if min_eig < -1e-12:
        raise NonPhysicalResult(
            f"gamma_r^2 eigenvalue {min_eig:.3e} below -1e-12; internal error"
        )
    return gamma_r, lambdas, SolverDiagnostics(iterations, residuals, True)


def recover_eta(gamma_r, gamma0) -> np.ndarray:
    """Constrained coefficients: the basis projection of gamma_r - gamma0."""
    gr = ensure_hermitian(gamma_r, tol=1e-9, dim=4, name="gamma_r")
    g0 = ensure_hermitian(gamma0, tol=1e-9, dim=4, name="gamma0")
    return pauli_project(gr - g0)


def scalar_residual_system(gamma_eps, hamiltonian: TwoQubitHamiltonian, E0: float, lambdas):
    """Scalar-coefficient residuals of the two-constraint (trace, energy)
    correction: returns (Tr(gamma_r^2) - 1, Tr(gamma_r^2 H) - E0) evaluated
    through the invariants g1 = Tr(u^2), g2 = Tr(u^2 H), g3 = Tr({H, u}^2),
    g4 = Tr({H, u}^2 H) of u = gamma_eps.

    The cross terms carry minus signs, following from Tr(u {H, u}) = 2 g2
    and Tr({H, u}^2) = g3 when expanding gamma_r = (1 - 2 l1) u - l2 {H, u}.
    """
    u = ensure_hermitian(gamma_eps, tol=1e-9, dim=4, name="gamma_eps")
    H = hamiltonian.operator
    A = anticommutator(H, u)
    g1 = float(np.real(np.trace(u @ u)))
    g2 = float(np.real(np.trace(u @ u @ H)))
    g3 = float(np.real(np.trace(A @ A)))
    g4 = float(np.real(np.trace(A @ A @ H)))
    l1, l2 = float(lambdas[0]), float(lambdas[1])
    s = 1.0 - 2.0 * l1
    lhs1 = s * s * g1 - 4.0 * s * l2 * g2 + l2 * l2 * g3
    lhs2 = s * s * g2 - s * l2 * g3 + l2 * l2 * g4
    return lhs1 - 1.0, lhs2 - E0


def sample_targets(constraints: ConstraintSet, rng, index: int = 0):
    """Per-sample target vector. Fixed constraints return their stored
    target; SampledNormal constraints draw fresh values, with entropy draws
    redrawn until they land in [0, ln 4]."""
    out = []
    for c in constraints:
        if c.kind == "trace" or isinstance(getattr(c, "mode", Fixed()), Fixed):
            out.append(float(c.target))
            continue
        value = float(rng.normal(c.mode.mean, c.mode.stddev))
        if c.kind == "entropy":
            redraws = 0
            while not (0.0 <= value <= MAX_ENTROPY):
                redraws += 1
                if redraws > 1000:
                    raise ValidationError(
                        f"entropy target distribution N({c.mode.mean}, {c.mode.stddev}) "
                        "never lands in [0, ln 4]"
                    )
                value = float(rng.normal(c.mode.mean, c.mode.stddev))
        out.append(value)
    return out


@dataclass(frozen=True)
class PerturbedSample:
    """One accepted draw with its correction and solver diagnostics."""

    index: int
    gamma_eps: np.ndarray
    gamma_r: np.ndarray
    rho_r: np.ndarray
    lambdas: np.ndarray
    eta_raw: np.ndarray
    eta_constrained: np.ndarray
    solver_iterations: int
    residuals: np.ndarray
    targets: np.ndarray

    @property
    def residual_max(self) -> float:
        return float(np.max(np.abs(self.residuals)))


# Abort when failures exceed 10 + 10% of attempts. The offset keeps an
# unlucky early cluster at a few-percent true failure rate from aborting a
# healthy run, while a fully misconfigured run still stops after ~12 draws.
_FAILURE_RATE = 0.1
_FAILURE_OFFSET = 10


def generate_samples(gamma0, config: PerturbationConfig, constraints: ConstraintSet):
    """Generate config.sample_count accepted samples.

    A diverged solve is recorded and the sample is redrawn with the next
    index, so accepted sets stay deterministic. Returns (samples, attempts,
    failures); raises SolverFailureRateExceeded past the abort boundary.
    """
    g0 = ensure_hermitian(gamma0, tol=1e-9, dim=4, name="gamma0")
    eta0 = pauli_project(g0)
    samples = []
    attempts = 0
    failures = 0
    index = 0
    while len(samples) < config.sample_count:
        rng = make_sample_rng(config.seed, index)
        gamma_eps, eta_raw = sample_gamma_epsilon(g0, config, index, rng=rng)
        targets = sample_targets(constraints, rng, index)
        attempts += 1
        index += 1
        try:
            gamma_r, lambdas, diag = apply_constraints(gamma_eps, constraints, targets)
        except SolverDiverged:
            failures += 1
            if failures > _FAILURE_OFFSET + _FAILURE_RATE * attempts:
                raise SolverFailureRateExceeded(failures, attempts) from None
            continue
        samples.append(
            PerturbedSample(
                index=index - 1,
                gamma_eps=gamma_eps,
                gamma_r=gamma_r,
                rho_r=gamma_r @ gamma_r,
                lambdas=lambdas,
                eta_raw=eta_raw,
                eta_constrained=pauli_project(gamma_r) - eta0,
                solver_iterations=diag.iterations,
                residuals=diag.residuals,
                targets=np.asarray(targets, dtype=float),
            )
        )
    if failures > _FAILURE_OFFSET + _FAILURE_RATE * attempts:
        raise SolverFailureRateExceeded(failures, attempts)
    return samples, attempts, failures
