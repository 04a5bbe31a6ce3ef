import csv
import dataclasses
import json
import math
import os

import numpy as np
import pytest

import qperturb as q
from qperturb.exceptions import ValidationError
from qperturb.perturb import Fixed, SampledNormal
from qperturb.pipeline import (
    MEASURE_COLUMNS,
    OUT_DIR_ENV,
    SAMPLES_COLUMNS,
    build_constraint_set,
    resolve_baseline,
)
from qperturb.validation import ensure_density

from conftest import BASELINE_C


def test_run_config_validation():
    assert q.RunConfig(constraints=("TRACE", "Energy")).constraints == ("trace", "energy")
    with pytest.raises(ValidationError):
        q.RunConfig(constraints=("trace", "purity"))
    with pytest.raises(ValidationError):
        q.RunConfig(constraints=("energy", "trace"))
    with pytest.raises(ValidationError):
        q.RunConfig(constraints=("trace", "energy", "energy"))
    with pytest.raises(ValidationError):
        q.RunConfig(samples=0)
    with pytest.raises(ValidationError):
        q.RunConfig(bins=0)
    with pytest.raises(ValidationError):
        q.RunConfig(energy_dist=(0.0, 1.0))  # energy constraint not active
    with pytest.raises(ValidationError):
        q.RunConfig(entropy_dist=(0.5, 0.1))
    with pytest.raises(ValidationError):
        q.RunConfig(constraints=("trace", "energy"), energy_dist=(0.0, -1.0))
    with pytest.raises(ValidationError):
        q.RunConfig(constraints=("trace", "energy"), energy_dist=(0.0,))


def test_resolved_out_dir(monkeypatch):
    assert q.RunConfig(out_dir="chosen").resolved_out_dir == "chosen"
    monkeypatch.setenv(OUT_DIR_ENV, "from_env")
    assert q.RunConfig().resolved_out_dir == "from_env"
    assert q.RunConfig(out_dir="chosen").resolved_out_dir == "chosen"
    monkeypatch.delenv(OUT_DIR_ENV)
    assert q.RunConfig().resolved_out_dir == "qperturb_out"


def test_resolve_baseline_kinds(tmp_path, baseline):
    rho_ref, _, gamma_ref, _ = baseline
    rho0, gamma0 = resolve_baseline(q.BellDiagBaseline(BASELINE_C))
    assert np.max(np.abs(rho0 - rho_ref)) <= 1e-14
    assert np.max(np.abs(gamma0 @ gamma0 - rho0)) <= 1e-12

    rho0, gamma0 = resolve_baseline(q.PureBellBaseline("psi-"))
    expected, _ = q.pure_bell_state("psi-")
    assert np.max(np.abs(rho0 - expected)) <= 1e-14
    assert np.max(np.abs(gamma0 @ gamma0 - rho0)) <= 1e-12

    rng = np.random.default_rng(12)
    G = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    rho = G @ G.conj().T + 0.05 * np.eye(4)
    rho = rho / np.trace(rho).real
    path = str(tmp_path / "b.json")
    q.save_ensemble(path, q.ExperimentEnsemble(states=np.array([rho])))
    rho0, gamma0 = resolve_baseline(q.StateFileBaseline(path))
    assert np.max(np.abs(rho0 - rho)) <= 1e-12
    assert np.max(np.abs(gamma0 @ gamma0 - rho0)) <= 1e-12

    with pytest.raises(ValidationError):
        resolve_baseline(object())


def test_build_constraint_set_targets(baseline, hamiltonian):
    rho0, _, _, _ = baseline
    cfg = q.RunConfig(constraints=("trace", "energy", "entropy"))
    cs = build_constraint_set(cfg, hamiltonian, rho0)
    assert cs.kinds == ("trace", "energy", "entropy")
    trace_c, energy_c, entropy_c = tuple(cs)
    assert trace_c.target == 1.0
    assert abs(energy_c.target - q.energy_expectation(rho0, hamiltonian)) <= 1e-12
    assert abs(entropy_c.target - q.entropy(rho0)) <= 1e-12
    assert isinstance(energy_c.mode, Fixed) and isinstance(entropy_c.mode, Fixed)

    cfg = q.RunConfig(
        constraints=("trace", "energy", "entropy"),
        energy_dist=(0.5, 0.1),
        entropy_dist=(1.0, 0.2),
    )
    cs = build_constraint_set(cfg, hamiltonian, rho0)
    _, energy_c, entropy_c = tuple(cs)
    assert energy_c.mode == SampledNormal(0.5, 0.1) and energy_c.target == 0.5
    assert entropy_c.mode == SampledNormal(1.0, 0.2) and entropy_c.target == 1.0


def _read_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def test_run_cases_outputs(tmp_path, baseline, hamiltonian):
    rho0, _, _, _ = baseline
    out = str(tmp_path / "run")
    cfg = q.RunConfig(
        constraints=("trace", "energy", "entropy"),
        samples=25,
        seed=3,
        bins=10,
        out_dir=out,
    )
    result = q.run_cases(cfg)
    summary = result["summary"]
    assert result["out_dir"] == out
    assert summary["sample_count"] == 25 and len(result["samples"]) == 25
    assert summary["attempts"] == 25 + summary["failures"]

    expected = {
        "samples.csv",
        "etas_raw.csv",
        "etas_constrained.csv",
        "corr.csv",
        "states.json",
        "summary.json",
    } | {f"hist_{name}.json" for name in q.MeasureReport.FIELDS}
    assert expected <= set(os.listdir(out))

    header, rows = _read_csv(os.path.join(out, "samples.csv"))
    assert tuple(header) == SAMPLES_COLUMNS and len(rows) == 25
    indices = [int(r[0]) for r in rows]
    assert indices == sorted(indices)
    E0 = q.energy_expectation(rho0, hamiltonian)
    S0 = q.entropy(rho0)
    for row in rows:
        record = dict(zip(header, row))
        assert abs(float(record["energy"]) - E0) <= 1e-8
        assert abs(float(record["entropy"]) - S0) <= 1e-8
        assert float(record["residual_max"]) <= 1e-10

    for name in ("etas_raw.csv", "etas_constrained.csv"):
        header, rows = _read_csv(os.path.join(out, name))
        assert len(header) == 16 and header[0] == "eta_00" and header[-1] == "eta_33"
        assert len(rows) == 25

    header, rows = _read_csv(os.path.join(out, "corr.csv"))
    assert len(header) == 17 and len(rows) == 16
    diag = {r[0]: float(r[1 + i]) for i, r in enumerate(rows)}
    assert abs(diag["eta_01"] - 1.0) <= 1e-12

    for name in q.MeasureReport.FIELDS:
        doc = json.load(open(os.path.join(out, f"hist_{name}.json")))
        assert doc["measure"] == name
        area = float(
            np.sum(np.array(doc["densities"]) * np.diff(np.array(doc["edges"])))
        )
        assert abs(area - 1.0) <= 1e-9

    ensemble = q.load_ensemble(os.path.join(out, "states.json"))
    assert len(ensemble) == 25
    for state in ensemble.states:
        ensure_density(state)

    doc = json.load(open(os.path.join(out, "summary.json")))
    assert doc["seed"] == 3 and doc["sample_count"] == 25
    assert set(doc["measures"]) == set(q.MeasureReport.FIELDS)
    assert "out_dir" not in json.dumps(doc)
    assert doc["config"]["constraints"] == ["trace", "energy", "entropy"]


def test_compare_requires_maximally_entangled_baseline(tmp_path):
    ens = q.ExperimentEnsemble(states=np.array([np.eye(4, dtype=complex) / 4.0]))
    cfg = q.RunConfig(out_dir=str(tmp_path / "x"))
    with pytest.raises(ValidationError):
        q.compare_to_experiment(cfg, ens)
    cfg = q.RunConfig(baseline=q.PureBellBaseline("psi+"), out_dir=str(tmp_path / "x"))
    with pytest.raises(ValidationError):
        q.compare_to_experiment(cfg, ens)


def test_compare_self_consistency(tmp_path):
    sim = str(tmp_path / "sim")
    cfg = q.RunConfig(
        baseline=q.PureBellBaseline("phi+"),
        constraints=("trace",),
        sigma=0.05,
        samples=40,
        seed=5,
        out_dir=sim,
    )
    q.run_cases(cfg)
    ensemble = q.load_ensemble(os.path.join(sim, "states.json"))

    out = str(tmp_path / "cmp")
    result = q.compare_to_experiment(dataclasses.replace(cfg, out_dir=out), ensemble)
    overlap = result["overlap"]
    assert overlap["simulated_count"] == overlap["experiment_count"] == 40
    assert overlap["fitted_targets"] is None
    for name, entry in overlap["measures"].items():
        assert abs(entry["mean_difference"]) <= 1e-9, name
        if entry["stddev_ratio"] is not None:
            assert abs(entry["stddev_ratio"] - 1.0) <= 1e-9, name

    assert os.path.exists(os.path.join(out, "experiment_measures.csv"))
    assert os.path.exists(os.path.join(out, "corr_experiment.csv"))
    assert os.path.exists(os.path.join(out, "overlap_summary.json"))
    header, rows = _read_csv(os.path.join(out, "experiment_measures.csv"))
    assert tuple(header) == ("index",) + MEASURE_COLUMNS and len(rows) == 40


def test_compare_fits_missing_targets(tmp_path, hamiltonian):
    src = str(tmp_path / "src")
    seed_cfg = q.RunConfig(
        baseline=q.PureBellBaseline("phi+"),
        constraints=("trace",),
        sigma=0.05,
        samples=25,
        seed=6,
        out_dir=src,
    )
    q.run_cases(seed_cfg)
    ensemble = q.load_ensemble(os.path.join(src, "states.json"))
    reference_fit = q.fit_targets(ensemble, hamiltonian)

    cfg = q.RunConfig(
        baseline=q.PureBellBaseline("phi+"),
        constraints=("trace", "energy", "entropy"),
        sigma=0.05,
        samples=25,
        seed=7,
        out_dir=str(tmp_path / "cmp"),
    )
    result = q.compare_to_experiment(cfg, ensemble)
    fitted = result["overlap"]["fitted_targets"]
    assert fitted is not None
    assert abs(fitted["E_mean"] - reference_fit["E_mean"]) <= 1e-12
    assert abs(fitted["S_mean"] - reference_fit["S_mean"]) <= 1e-12
    echo = result["run"]["summary"]["config"]
    assert abs(echo["energy_dist"]["mean"] - reference_fit["E_mean"]) <= 1e-12
    assert abs(echo["entropy_dist"]["stddev"] - reference_fit["S_std"]) <= 1e-12
    assert len(result["run"]["samples"]) == 25
    for sample in result["run"]["samples"]:
        assert sample.residual_max <= 1e-10


def test_fit_targets_identical_copies(hamiltonian):
    rho, _ = q.pure_bell_state("phi+")
    fit = q.fit_targets(q.ExperimentEnsemble(states=np.array([rho, rho, rho])), hamiltonian)
    assert abs(fit["E_mean"]) <= 1e-9 and fit["E_std"] == 0.0
    assert abs(fit["S_mean"]) <= 1e-9 and fit["S_std"] == 0.0
    assert np.max(np.abs(fit["mu_eta"])) <= 1e-7
    assert np.max(np.abs(fit["sigma_eta"])) <= 1e-12


def test_fit_targets_two_point(hamiltonian):
    mixed = np.eye(4, dtype=complex) / 4.0
    ground = np.zeros((4, 4), dtype=complex)
    ground[0, 0] = 1.0
    fit = q.fit_targets(q.ExperimentEnsemble(states=np.array([mixed, ground])), hamiltonian)
    ln4 = math.log(4.0)
    assert abs(fit["S_mean"] - ln4 / 2.0) <= 1e-12
    assert abs(fit["S_std"] - ln4 / math.sqrt(2.0)) <= 1e-12
    e_ground = float(np.real(hamiltonian.operator[0, 0]))
    assert abs(fit["E_mean"] - e_ground / 2.0) <= 1e-12
    assert abs(fit["E_std"] - abs(e_ground) / math.sqrt(2.0)) <= 1e-12


def test_fit_targets_recovers_perturbation_scale(hamiltonian):
    # full-rank generator: equal Bell weights give gamma0 = I/2, whose
    # eigenvalues stay positive under sigma = 0.05 draws
    _, spec = q.bell_diagonal_state((1.0, 0.0, 0.0, 0.0))
    gamma0, _ = q.bell_diagonal_sqrt(spec)
    assert np.max(np.abs(gamma0 - np.eye(4) / 2.0)) <= 1e-15
    sigma = 0.05
    cfg = q.PerturbationConfig(mu=0.0, sigma=sigma, seed=9, sample_count=400)
    samples, _, _ = q.generate_samples(gamma0, cfg, q.ConstraintSet([q.UnitTrace()]))
    ensemble = q.ExperimentEnsemble(states=np.array([s.rho_r for s in samples]))
    fit = q.fit_targets(ensemble, hamiltonian)
    sig = np.asarray(fit["sigma_eta"])
    mask = np.ones((4, 4), dtype=bool)
    mask[0, 0] = False  # unit-trace projection collapses this entry's spread
    assert np.max(np.abs(sig[mask] / sigma - 1.0)) <= 0.15
    assert sig[0, 0] <= 0.02
