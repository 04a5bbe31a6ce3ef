"""Command-line interface.

Subcommands: `generate` runs a constrained ensemble and writes result
tables, `compare` pairs a simulated ensemble with a loaded one, `fit`
extracts target statistics from an ensemble, `measures` reports the
measures of a single stored state.

Exit codes: 0 success, 2 validation or parse failure, 3 solver-failure
abort.
"""
import argparse
import sys

import numpy as np

from .exceptions import QPerturbError, SolverFailureRateExceeded, ValidationError
from .io import dumps_json, load_ensemble, write_json
from .measures import measure_report
from .pauli import build_hamiltonian, bell_diagonal_sqrt, pure_bell_state
from .pipeline import (
    DEFAULT_C,
    DEFAULT_F0,
    DEFAULT_F1,
    BellDiagBaseline,
    PureBellBaseline,
    RunConfig,
    StateFileBaseline,
    compare_to_experiment,
    fit_targets,
    run_cases,
)
from .stats import DEFAULT_BINS

BELL_LABELS = ("phi+", "phi-", "psi+", "psi-")


def _floats(text: str, count: int, what: str):
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != count:
        raise argparse.ArgumentTypeError(f"{what} needs {count} comma-separated values")
    try:
        return tuple(float(p) for p in parts)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"{what}: {exc}") from None


def _entry_matrix(text: str, what: str):
    parts = [p.strip() for p in text.split(",")]
    try:
        values = [float(p) for p in parts]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"{what}: {exc}") from None
    if len(values) == 1:
        return values[0]
    if len(values) == 16:
        return np.array(values).reshape(4, 4)
    raise argparse.ArgumentTypeError(f"{what} takes 1 scalar or 16 row-major values")


def _add_run_flags(parser: argparse.ArgumentParser, with_baseline: bool):
    if with_baseline:
        parser.add_argument(
            "--baseline",
            choices=("bell-diag", "pure-bell", "state-file"),
            default="bell-diag",
            help="baseline state family (default: bell-diag)",
        )
        parser.add_argument(
            "--bell-c",
            type=lambda s: _floats(s, 4, "--bell-c"),
            default=DEFAULT_C,
            metavar="C0,C1,C2,C3",
            help="Bell-diagonal coefficients (default: 1,0.996,0.4,-0.4)",
        )
        parser.add_argument("--bell-label", choices=BELL_LABELS, default="phi+")
        parser.add_argument("--state-file", help="ensemble file for the state-file baseline")
    parser.add_argument(
        "--constraints",
        default="trace",
        metavar="KINDS",
        help="comma list drawn from trace,energy,entropy; trace first (default: trace)",
    )
    parser.add_argument(
        "--sigma",
        type=lambda s: _entry_matrix(s, "--sigma"),
        default=0.05,
        metavar="S|S00,...,S33",
        help="perturbation stddev, scalar or 16 entries (default: 0.05)",
    )
    parser.add_argument(
        "--mu",
        type=lambda s: _entry_matrix(s, "--mu"),
        default=0.0,
        metavar="M|M00,...,M33",
        help="perturbation mean, scalar or 16 entries (default: 0)",
    )
    parser.add_argument("--samples", type=int, default=1000)
    parser.add_argument("--seed", type=int, required=True, help="ensemble seed (required)")
    parser.add_argument("--f0", type=float, default=DEFAULT_F0, help="qubit 0 frequency in GHz")
    parser.add_argument("--f1", type=float, default=DEFAULT_F1, help="qubit 1 frequency in GHz")
    parser.add_argument(
        "--energy-dist",
        type=lambda s: _floats(s, 2, "--energy-dist"),
        metavar="MEAN,STD",
        help="sample per-draw energy targets from N(mean, std)",
    )
    parser.add_argument(
        "--entropy-dist",
        type=lambda s: _floats(s, 2, "--entropy-dist"),
        metavar="MEAN,STD",
        help="sample per-draw entropy targets from N(mean, std)",
    )
    parser.add_argument(
        "--out-dir",
        default=None,
        help="output directory (default: $QPERTURB_OUT_DIR, then ./qperturb_out)",
    )
    parser.add_argument("--bins", type=int, default=DEFAULT_BINS)


def _baseline_from_args(args):
    if args.baseline == "bell-diag":
        return BellDiagBaseline(tuple(args.bell_c))
    if args.baseline == "pure-bell":
        return PureBellBaseline(args.bell_label)
    if not args.state_file:
        raise ValidationError("--state-file is required with --baseline state-file")
    return StateFileBaseline(args.state_file)


def _config_from_args(args, baseline) -> RunConfig:
    return RunConfig(
        baseline=baseline,
        constraints=tuple(k.strip() for k in args.constraints.split(",") if k.strip()),
        sigma=args.sigma,
        mu=args.mu,
        samples=args.samples,
        seed=args.seed,
        f0=args.f0,
        f1=args.f1,
        energy_dist=args.energy_dist,
        entropy_dist=args.entropy_dist,
        out_dir=args.out_dir,
        bins=args.bins,
    )


def _cmd_generate(args) -> int:
    config = _config_from_args(args, _baseline_from_args(args))
    result = run_cases(config)
    summary = result["summary"]
    print(
        f"wrote {summary['sample_count']} samples to {result['out_dir']} "
        f"(attempts {summary['attempts']}, failures {summary['failures']})"
    )
    return 0


def _cmd_compare(args) -> int:
    ensemble = load_ensemble(args.experiment)
    config = _config_from_args(args, PureBellBaseline("phi+"))
    result = compare_to_experiment(config, ensemble)
    out_dir = result["run"]["out_dir"]
    print(
        f"compared {result['overlap']['simulated_count']} simulated against "
        f"{result['overlap']['experiment_count']} loaded states in {out_dir}"
    )
    return 0


def _cmd_fit(args) -> int:
    ensemble = load_ensemble(args.experiment)
    fitted = fit_targets(ensemble, build_hamiltonian(args.f0, args.f1))
    doc = {
        "E_mean": fitted["E_mean"],
        "E_std": fitted["E_std"],
        "S_mean": fitted["S_mean"],
        "S_std": fitted["S_std"],
        "mu_eta": fitted["mu_eta"].tolist(),
        "sigma_eta": fitted["sigma_eta"].tolist(),
    }
    if args.out:
        write_json(args.out, doc)
    sys.stdout.write(dumps_json(doc))
    return 0


def _cmd_measures(args) -> int:
    ensemble = load_ensemble(args.state_file)
    rho = ensemble.physical_states[int(args.index)]
    rho0, _ = pure_bell_state(args.against)
    report = measure_report(rho, rho0, build_hamiltonian(args.f0, args.f1))
    sys.stdout.write(dumps_json(report.as_dict()))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qperturb",
        description="Constrained random perturbation ensembles of two-qubit states.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="run a constrained ensemble and write result tables")
    _add_run_flags(gen, with_baseline=True)
    gen.set_defaults(func=_cmd_generate)

    cmp_parser = sub.add_parser("compare", help="pair a simulated ensemble with a stored one")
    cmp_parser.add_argument("--experiment", required=True, help="ensemble file (.json or .csv)")
    _add_run_flags(cmp_parser, with_baseline=False)
    cmp_parser.set_defaults(func=_cmd_compare)

    fit = sub.add_parser("fit", help="fit target statistics from a stored ensemble")
    fit.add_argument("--experiment", required=True, help="ensemble file (.json or .csv)")
    fit.add_argument("--f0", type=float, default=DEFAULT_F0)
    fit.add_argument("--f1", type=float, default=DEFAULT_F1)
    fit.add_argument("--out", default=None, help="also write the fit to this JSON file")
    fit.set_defaults(func=_cmd_fit)

    meas = sub.add_parser("measures", help="report the measures of one stored state")
    meas.add_argument("--state-file", required=True, help="ensemble file (.json or .csv)")
    meas.add_argument("--index", type=int, default=0, help="state index in the file")
    meas.add_argument("--against", choices=BELL_LABELS, default="phi+")
    meas.add_argument("--f0", type=float, default=DEFAULT_F0)
    meas.add_argument("--f1", type=float, default=DEFAULT_F1)
    meas.set_defaults(func=_cmd_measures)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except SolverFailureRateExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (QPerturbError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
