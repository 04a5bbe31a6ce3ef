"""Estimator-style wrappers around the sampling engine and the measure
evaluator, following the fit/sample/transform conventions of scikit-learn
(get_params/set_params, trailing-underscore fitted attributes). Inputs are
4 x 4 density matrices rather than feature rows, so these compose with
pipelines that pass matrices through untouched."""
import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .exceptions import ValidationError
from .linalg import matrix_sqrt_psd
from .measures import MeasureReport, measure_report
from .pauli import build_hamiltonian
from .perturb import PerturbationConfig, generate_samples
from .pipeline import DEFAULT_F0, DEFAULT_F1, RunConfig, build_constraint_set
from .validation import ensure_density


class PerturbedStateSampler(BaseEstimator):
    """Draws constraint-preserving random perturbations of a baseline state.

    fit(X) takes the baseline density matrix; sample(n) returns perturbed
    density matrices whose constrained expectations match the baseline's
    (or the configured target distributions).

    Parameters mirror the run configuration: constraints is an ordered
    subset of ("trace", "energy", "entropy") starting with "trace"; sigma
    and mu are scalars or 4 x 4 entry matrices; random_state seeds the
    per-sample streams (None means 0).
    """

    def __init__(
        self,
        constraints=("trace",),
        sigma=0.05,
        mu=0.0,
        f0=DEFAULT_F0,
        f1=DEFAULT_F1,
        energy_dist=None,
        entropy_dist=None,
        random_state=None,
    ):
        self.constraints = constraints
        self.sigma = sigma
        self.mu = mu
        self.f0 = f0
        self.f1 = f1
        self.energy_dist = energy_dist
        self.entropy_dist = entropy_dist
        self.random_state = random_state

    def fit(self, X, y=None):
        rho0 = ensure_density(np.asarray(X, dtype=complex))
        config = RunConfig(
            constraints=tuple(self.constraints),
            sigma=self.sigma,
            mu=self.mu,
            f0=self.f0,
            f1=self.f1,
            energy_dist=self.energy_dist,
            entropy_dist=self.entropy_dist,
            seed=self._seed(),
        )
        self.hamiltonian_ = build_hamiltonian(self.f0, self.f1)
        self.baseline_ = rho0
        self.gamma0_ = matrix_sqrt_psd(rho0)
        self.constraint_set_ = build_constraint_set(config, self.hamiltonian_, rho0)
        return self

    def _seed(self) -> int:
        if self.random_state is None:
            return 0
        if not np.issubdtype(type(self.random_state), np.integer) and not isinstance(
            self.random_state, int
        ):
            raise ValidationError("random_state must be an integer seed or None")
        return int(self.random_state)

    def sample(self, n_samples: int = 100, return_samples: bool = False):
        """n_samples perturbed density matrices as an (n, 4, 4) array;
        with return_samples=True, also the full per-draw records."""
        check_is_fitted(self, "constraint_set_")
        config = PerturbationConfig(
            mu=self.mu, sigma=self.sigma, seed=self._seed(), sample_count=int(n_samples)
        )
        samples, _, _ = generate_samples(self.gamma0_, config, self.constraint_set_)
        states = np.array([s.rho_r for s in samples])
        return (states, samples) if return_samples else states


class StateMeasureTransform(TransformerMixin, BaseEstimator):
    """Maps density matrices to rows of distance and entanglement measures.

    fit(X) takes the reference state the distance measures are taken
    against; transform(X) takes an (n, 4, 4) stack (or list) of density
    matrices and returns an (n, 8) float array with the columns named by
    get_feature_names_out().
    """

    def __init__(self, f0=DEFAULT_F0, f1=DEFAULT_F1):
        self.f0 = f0
        self.f1 = f1

    def fit(self, X, y=None):
        self.reference_ = ensure_density(np.asarray(X, dtype=complex))
        self.hamiltonian_ = build_hamiltonian(self.f0, self.f1)
        return self

    def transform(self, X) -> np.ndarray:
        check_is_fitted(self, "reference_")
        states = np.asarray(X, dtype=complex)
        if states.ndim == 2:
            states = states[None, :, :]
        if states.ndim != 3 or states.shape[1:] != (4, 4):
            raise ValidationError(f"expected (n, 4, 4) states, got shape {states.shape}")
        rows = np.empty((states.shape[0], len(MeasureReport.FIELDS)))
        for i, rho in enumerate(states):
            report = measure_report(rho, self.reference_, self.hamiltonian_)
            rows[i] = [getattr(report, name) for name in MeasureReport.FIELDS]
        return rows

    def get_feature_names_out(self, input_features=None):
        return np.asarray(MeasureReport.FIELDS, dtype=object)
