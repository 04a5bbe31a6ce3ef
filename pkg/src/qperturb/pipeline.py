"""Run orchestration: baseline resolution, constrained ensemble generation,
measure evaluation, and emission of every result table.

Outputs are deterministic per (config, seed): the output directory is not
echoed into any file, so two runs of one config into different directories
are byte-identical.
"""
from dataclasses import dataclass, field, replace
import os

import numpy as np

from .exceptions import ValidationError
from .io import ExperimentEnsemble, load_ensemble, save_ensemble, write_csv, write_json
from .linalg import matrix_sqrt_psd
from .measures import MeasureReport, entropy, energy_expectation, measure_report
from .pauli import (
    TwoQubitHamiltonian,
    bell_diagonal_state,
    bell_diagonal_sqrt,
    build_hamiltonian,
    pure_bell_state,
)
from .perturb import (
    ConstraintSet,
    Energy,
    Entropy,
    Fixed,
    PerturbationConfig,
    SampledNormal,
    UnitTrace,
    generate_samples,
    recover_eta,
)
from .stats import DEFAULT_BINS, CorrelationMatrix, histogram_density, pearson_matrix

DEFAULT_C = (1.0, 0.996, 0.4, -0.4)
DEFAULT_F0 = 4.963
DEFAULT_F1 = 4.838
OUT_DIR_ENV = "QPERTURB_OUT_DIR"

CONSTRAINT_KINDS = ("trace", "energy", "entropy")

SAMPLES_COLUMNS = (
    "index",
    "energy",
    "entropy",
    "mutual_information",
    "concurrence",
    "chsh_max",
    "fidelity",
    "theta",
    "chord",
    "solver_iterations",
    "residual_max",
)
MEASURE_COLUMNS = SAMPLES_COLUMNS[1:9]


@dataclass(frozen=True)
class BellDiagBaseline:
    c: tuple = DEFAULT_C


@dataclass(frozen=True)
class PureBellBaseline:
    label: str = "phi+"


@dataclass(frozen=True)
class StateFileBaseline:
    """First state of a saved ensemble, projected onto a valid density
    operator before its square root is taken."""

    path: str


@dataclass(frozen=True)
class RunConfig:
    baseline: object = field(default_factory=BellDiagBaseline)
    constraints: tuple = ("trace",)
    sigma: object = 0.05
    mu: object = 0.0
    samples: int = 1000
    seed: int = 0
    f0: float = DEFAULT_F0
    f1: float = DEFAULT_F1
    energy_dist: tuple = None
    entropy_dist: tuple = None
    out_dir: str = None
    bins: int = DEFAULT_BINS

    def __post_init__(self):
        kinds = tuple(str(k).lower() for k in self.constraints)
        object.__setattr__(self, "constraints", kinds)
        unknown = [k for k in kinds if k not in CONSTRAINT_KINDS]
        if unknown:
            raise ValidationError(f"unknown constraint kinds {unknown}")
        if not kinds or kinds[0] != "trace":
            raise ValidationError("constraints must start with 'trace'")
        if len(set(kinds)) != len(kinds):
            raise ValidationError(f"duplicate constraint kinds in {kinds}")
        if self.samples < 1:
            raise ValidationError(f"samples must be >= 1, got {self.samples}")
        if self.bins < 1:
            raise ValidationError(f"bins must be >= 1, got {self.bins}")
        if self.energy_dist is not None and "energy" not in kinds:
            raise ValidationError("energy_dist given but the energy constraint is not active")
        if self.entropy_dist is not None and "entropy" not in kinds:
            raise ValidationError("entropy_dist given but the entropy constraint is not active")
        for attr in ("energy_dist", "entropy_dist"):
            dist = getattr(self, attr)
            if dist is None:
                continue
            dist = tuple(float(x) for x in dist)
            if len(dist) != 2 or dist[1] < 0:
                raise ValidationError(f"{attr} must be (mean, stddev >= 0), got {dist}")
            object.__setattr__(self, attr, dist)

    @property
    def resolved_out_dir(self) -> str:
        if self.out_dir:
            return self.out_dir
        return os.environ.get(OUT_DIR_ENV, "qperturb_out")


def resolve_baseline(baseline):
    """Baseline density operator and its PSD square root."""
    if isinstance(baseline, BellDiagBaseline):
        rho0, spec = bell_diagonal_state(baseline.c)
        gamma0, _ = bell_diagonal_sqrt(spec)
        return rho0, gamma0
    if isinstance(baseline, PureBellBaseline):
        rho0, spec = pure_bell_state(baseline.label)
        gamma0, _ = bell_diagonal_sqrt(spec)
        return rho0, gamma0
    if isinstance(baseline, StateFileBaseline):
        ensemble = load_ensemble(baseline.path)
        rho0 = ensemble.physical_states[0]
        return rho0, matrix_sqrt_psd(rho0)
    raise ValidationError(f"unknown baseline type {type(baseline).__name__}")


def build_constraint_set(config: RunConfig, hamiltonian: TwoQubitHamiltonian, rho0) -> ConstraintSet:
    """Constraints with targets taken from the baseline state unless a
    sampling distribution overrides them."""
    constraints = []
    for kind in config.constraints:
        if kind == "trace":
            constraints.append(UnitTrace())
        elif kind == "energy":
            if config.energy_dist is not None:
                mean, std = config.energy_dist
                constraints.append(Energy(hamiltonian, target=mean, mode=SampledNormal(mean, std)))
            else:
                constraints.append(Energy(hamiltonian, target=energy_expectation(rho0, hamiltonian)))
        else:
            if config.entropy_dist is not None:
                mean, std = config.entropy_dist
                constraints.append(Entropy(target=mean, mode=SampledNormal(mean, std)))
            else:
                constraints.append(Entropy(target=entropy(rho0)))
    return ConstraintSet(constraints)


def _echo_baseline(baseline) -> dict:
    if isinstance(baseline, BellDiagBaseline):
        return {"kind": "bell-diag", "c": [float(x) for x in baseline.c]}
    if isinstance(baseline, PureBellBaseline):
        return {"kind": "pure-bell", "label": baseline.label}
    return {"kind": "state-file", "path": baseline.path}


def _echo_config(config: RunConfig, perturbation: PerturbationConfig) -> dict:
    return {
        "baseline": _echo_baseline(config.baseline),
        "constraints": list(config.constraints),
        "sigma": perturbation.sigma.tolist(),
        "mu": perturbation.mu.tolist(),
        "samples": int(config.samples),
        "seed": int(config.seed),
        "f0": float(config.f0),
        "f1": float(config.f1),
        "energy_dist": None if config.energy_dist is None else {
            "mean": config.energy_dist[0], "stddev": config.energy_dist[1]
        },
        "entropy_dist": None if config.entropy_dist is None else {
            "mean": config.entropy_dist[0], "stddev": config.entropy_dist[1]
        },
        "bins": int(config.bins),
    }


def _write_corr_csv(path: str, corr: CorrelationMatrix) -> None:
    header = ("label",) + tuple(corr.labels)
    rows = [
        (label,) + tuple(float(x) for x in corr.matrix[i])
        for i, label in enumerate(corr.labels)
    ]
    write_csv(path, header, rows)


def _simulate(config: RunConfig):
    rho0, gamma0 = resolve_baseline(config.baseline)
    hamiltonian = build_hamiltonian(config.f0, config.f1)
    constraint_set = build_constraint_set(config, hamiltonian, rho0)
    perturbation = PerturbationConfig(
        mu=config.mu, sigma=config.sigma, seed=config.seed, sample_count=config.samples
    )
    samples, attempts, failures = generate_samples(gamma0, perturbation, constraint_set)
    reports = [measure_report(s.rho_r, rho0, hamiltonian) for s in samples]
    return rho0, gamma0, hamiltonian, perturbation, constraint_set, samples, reports, attempts, failures


def run_cases(config: RunConfig) -> dict:
    """Generate the configured ensemble and write every result file into
    config.out_dir (default: the QPERTURB_OUT_DIR environment variable,
    then ./qperturb_out).

    Files: samples.csv, etas_raw.csv, etas_constrained.csv, corr.csv,
    hist_<measure>.json per measure, states.json, summary.json. Returns the
    summary dict plus the in-memory samples and measure reports.
    """
    out_dir = config.resolved_out_dir
    os.makedirs(out_dir, exist_ok=True)
    rho0, gamma0, hamiltonian, perturbation, constraint_set, samples, reports, attempts, failures = _simulate(config)

    rows = []
    for s, r in zip(samples, reports):
        rows.append(
            (
                s.index,
                r.energy,
                r.entropy,
                r.mutual_information,
                r.concurrence,
                r.chsh_max,
                r.fidelity,
                r.theta,
                r.chord,
                s.solver_iterations,
                s.residual_max,
            )
        )
    write_csv(os.path.join(out_dir, "samples.csv"), SAMPLES_COLUMNS, rows)

    eta_header = tuple(f"eta_{i}{j}" for i in range(4) for j in range(4))
    write_csv(
        os.path.join(out_dir, "etas_raw.csv"),
        eta_header,
        [tuple(s.eta_raw.ravel()) for s in samples],
    )
    write_csv(
        os.path.join(out_dir, "etas_constrained.csv"),
        eta_header,
        [tuple(s.eta_constrained.ravel()) for s in samples],
    )

    corr = pearson_matrix(np.array([s.eta_constrained for s in samples]))
    _write_corr_csv(os.path.join(out_dir, "corr.csv"), corr)

    measure_values = {
        name: np.array([getattr(r, name) for r in reports]) for name in MeasureReport.FIELDS
    }
    for name, values in measure_values.items():
        hist = histogram_density(values, bins=config.bins)
        write_json(
            os.path.join(out_dir, f"hist_{name}.json"),
            {
                "measure": name,
                "edges": hist.edges.tolist(),
                "densities": hist.densities.tolist(),
                "degenerate": hist.degenerate,
            },
        )

    save_ensemble(
        os.path.join(out_dir, "states.json"),
        ExperimentEnsemble(states=np.array([s.rho_r for s in samples])),
    )

    summary = {
        "seed": int(config.seed),
        "sample_count": len(samples),
        "attempts": attempts,
        "failures": failures,
        "measures": {
            name: {
                "mean": float(np.mean(vals)),
                "stddev": float(np.std(vals, ddof=1)) if len(vals) > 1 else 0.0,
            }
            for name, vals in measure_values.items()
        },
        "config": _echo_config(config, perturbation),
    }
    write_json(os.path.join(out_dir, "summary.json"), summary)
    return {"summary": summary, "samples": samples, "reports": reports, "out_dir": out_dir}


def fit_targets(ensemble: ExperimentEnsemble, hamiltonian: TwoQubitHamiltonian) -> dict:
    """Energy/entropy means and standard deviations of an ensemble, plus
    entrywise mean and standard deviation of the coefficients recovered
    against the ideal maximally entangled baseline. Standard deviations use
    ddof = 1 (zero for a single state)."""
    if len(ensemble) == 0:
        raise ValidationError("cannot fit targets from an empty ensemble")
    rho0, spec = pure_bell_state("phi+")
    gamma0, _ = bell_diagonal_sqrt(spec)
    states = ensemble.physical_states
    energies = np.array([energy_expectation(rho, hamiltonian) for rho in states])
    entropies = np.array([entropy(rho) for rho in states])
    etas = np.array([recover_eta(matrix_sqrt_psd(rho), gamma0) for rho in states])
    n = len(ensemble)

    def _std(arr, axis=None):
        if n < 2:
            return np.zeros_like(np.mean(arr, axis=axis))
        return np.std(arr, axis=axis, ddof=1)

    return {
        "E_mean": float(np.mean(energies)),
        "E_std": float(_std(energies)),
        "S_mean": float(np.mean(entropies)),
        "S_std": float(_std(entropies)),
        "mu_eta": np.mean(etas, axis=0),
        "sigma_eta": np.asarray(_std(etas, axis=0)),
    }


def compare_to_experiment(config: RunConfig, ensemble: ExperimentEnsemble) -> dict:
    """Simulate alongside a loaded ensemble and emit paired result tables.

    Requires the ideal maximally entangled baseline. Missing target
    distributions for active energy/entropy constraints are fitted from the
    ensemble first. Emits everything run_cases does for the simulated side,
    plus experiment_measures.csv, corr_experiment.csv, and
    overlap_summary.json with per-measure mean differences (simulated minus
    experimental) and stddev ratios (null when the experimental spread is
    zero).
    """
    if not isinstance(config.baseline, PureBellBaseline) or config.baseline.label != "phi+":
        raise ValidationError('comparison requires the pure-bell "phi+" baseline')
    hamiltonian = build_hamiltonian(config.f0, config.f1)

    fitted = None
    updates = {}
    if "energy" in config.constraints and config.energy_dist is None:
        fitted = fit_targets(ensemble, hamiltonian)
        updates["energy_dist"] = (fitted["E_mean"], fitted["E_std"])
    if "entropy" in config.constraints and config.entropy_dist is None:
        fitted = fitted or fit_targets(ensemble, hamiltonian)
        updates["entropy_dist"] = (fitted["S_mean"], fitted["S_std"])
    if updates:
        config = replace(config, **updates)

    result = run_cases(config)
    out_dir = result["out_dir"]
    rho0, gamma0 = resolve_baseline(config.baseline)

    states = ensemble.physical_states
    exp_reports = [measure_report(rho, rho0, hamiltonian) for rho in states]
    write_csv(
        os.path.join(out_dir, "experiment_measures.csv"),
        ("index",) + MEASURE_COLUMNS,
        [
            (i,) + tuple(getattr(r, name) for name in MEASURE_COLUMNS)
            for i, r in enumerate(exp_reports)
        ],
    )

    exp_etas = np.array([recover_eta(matrix_sqrt_psd(rho), gamma0) for rho in states])
    _write_corr_csv(os.path.join(out_dir, "corr_experiment.csv"), pearson_matrix(exp_etas))

    overlap = {}
    for name in MeasureReport.FIELDS:
        sim = np.array([getattr(r, name) for r in result["reports"]])
        exp = np.array([getattr(r, name) for r in exp_reports])
        sim_std = float(np.std(sim, ddof=1)) if sim.size > 1 else 0.0
        exp_std = float(np.std(exp, ddof=1)) if exp.size > 1 else 0.0
        overlap[name] = {
            "mean_difference": float(np.mean(sim) - np.mean(exp)),
            "stddev_ratio": None if exp_std == 0.0 else sim_std / exp_std,
        }
    summary = {
        "simulated_count": len(result["samples"]),
        "experiment_count": len(ensemble),
        "measures": overlap,
        "fitted_targets": None
        if fitted is None
        else {
            "E_mean": fitted["E_mean"],
            "E_std": fitted["E_std"],
            "S_mean": fitted["S_mean"],
            "S_std": fitted["S_std"],
            "mu_eta": fitted["mu_eta"].tolist(),
            "sigma_eta": fitted["sigma_eta"].tolist(),
        },
    }
    write_json(os.path.join(out_dir, "overlap_summary.json"), summary)
    return {"overlap": summary, "run": result, "experiment_reports": exp_reports}
