"""Command line interface: ``qedqec {run,sweep,validate,channel-estimate,syndrome-table}``.

Exit codes: 0 success, 1 validation failure, 2 bad config/arguments, 3 I/O error.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .errors import ConfigError, InvalidArgumentError
from .harness import ExperimentConfig, run_experiment, run_sweep
from .noise_channels import (
    awgn_channel_output,
    awgn_equivalent_p,
    estimate_channel_mc,
    fit_depolarizing_p,
    trace_distance,
)
from .perfect_code import SYNDROME_TABLE, Syndrome, syndrome_table_mismatches
from .qubit_core import haar_random_state
from .signal_rep import SignalConfig, awgn_samples, project_samples, synthesize_amplitudes
from .validation import validate

EXIT_OK, EXIT_INVALID, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _load_config(args) -> ExperimentConfig:
    cfg = ExperimentConfig.from_file(args.config)
    overrides = {}
    if getattr(args, "seed", None) is not None:
        overrides["seed"] = args.seed
    if getattr(args, "out", None) is not None:
        overrides["out_dir"] = str(args.out)
    return replace(cfg, **overrides) if overrides else cfg


def cmd_run(args) -> int:
    cfg = _load_config(args)
    _, report = run_experiment(cfg, workers=args.workers)
    for mode, s in report.summaries.items():
        print(
            f"{mode:8s} median F = {s.median_F:.7f} [{s.ci_F[0]:.7f}, {s.ci_F[1]:.7f}]  "
            f"median f = {s.median_f:.3f} [{s.ci_f[0]:.3f}, {s.ci_f[1]:.3f}]  "
            f"tail(f<1) = {report.tail_fraction[mode]:.4f}"
        )
    print(f"outputs written to {cfg.out_dir}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = _load_config(args)
    try:
        values = [float(v) for v in args.values.split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad --values: {exc}") from exc
    result = run_sweep(cfg, args.param, values, workers=args.workers)
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "sweep.json").write_text(json.dumps(result, indent=2) + "\n", encoding="utf-8")
    for pt in result["points"]:
        cols = "  ".join(
            f"{m}: p={pt[m]['equivalent_p']:.3g} 1-F={pt[m]['mean_infidelity']:.3g} f={pt[m]['median_f']:.3f}"
            for m in cfg.modes
        )
        print(f"{args.param}={pt['value']:.4g}  {cols}")
    for mode, slope in result["slopes"].items():
        print(f"slope[{mode}] = {'undefined' if slope is None else f'{slope:.3f}'}")
    return EXIT_OK


def cmd_validate(args) -> int:
    report = validate()
    if args.json:
        print(json.dumps(report, indent=2))
    else:
        for name, res in report["checks"].items():
            print(f"{'PASS' if res['passed'] else 'FAIL'}  {name}")
        for label, g in report["checks"]["transversality"]["gates"].items():
            L = np.array([[complex(*z) for z in row] for row in g["logical_action"]])
            print(f"      L[{label}] = {np.array2string(np.round(L, 6), separator=', ')}")
    return EXIT_OK if report["passed"] else EXIT_INVALID


def channel_estimate(n_qubits: int, sigma2: float, runs: int, seed: int) -> dict:
    if n_qubits < 1 or runs < 1 or sigma2 < 0:
        raise InvalidArgumentError("need n_qubits >= 1, runs >= 1, sigma2 >= 0")
    sc = SignalConfig.default(n_qubits)
    rng = np.random.default_rng(seed)
    psi = haar_random_state(n_qubits, rng)
    clean = synthesize_amplitudes(psi.amplitudes, sc)

    def source(g):
        return project_samples(clean + awgn_samples(clean.shape, sigma2, sc.sample_rate, g), sc)

    est = estimate_channel_mc(source, runs, rng)
    rho = np.outer(psi.amplitudes, psi.amplitudes.conj())
    return {
        "n_qubits": n_qubits,
        "sigma2": sigma2,
        "T": sc.duration_T,
        "p_predicted": awgn_equivalent_p(sigma2, sc.duration_T, n_qubits),
        "p_estimated": fit_depolarizing_p(est, rho),
        "trace_distance": trace_distance(est, awgn_channel_output(rho, sigma2, sc.duration_T)),
        "runs": runs,
        "seed": seed,
    }


def cmd_channel_estimate(args) -> int:
    result = channel_estimate(args.n_qubits, args.sigma2, args.runs, args.seed)
    if args.json:
        print(json.dumps(result))
    else:
        for k, v in result.items():
            print(f"{k:15s} {v}")
    return EXIT_OK


def cmd_syndrome_table(args) -> int:
    for s, err in sorted(SYNDROME_TABLE.items(), key=lambda kv: str(kv[0])):
        status = "ok" if Syndrome.of_error(err) == s else "MISMATCH"
        print(f"{s}  {err.sparse_label() if err.weight else 'No Error':8s} {status}")
    problems = syndrome_table_mismatches()
    for p in problems:
        print(p, file=sys.stderr)
    return EXIT_INVALID if problems else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qedqec", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("run", help="run one experiment")
    p.add_argument("--config", required=True, type=Path)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", type=Path)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="sweep a noise parameter")
    p.add_argument("--config", required=True, type=Path)
    p.add_argument("--param", required=True, choices=("sigma2", "coeff_sigma"))
    p.add_argument("--values", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", type=Path)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("validate", help="run the invariant checks")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("channel-estimate", help="Monte Carlo AWGN channel estimate")
    p.add_argument("--n-qubits", type=int, required=True)
    p.add_argument("--sigma2", type=float, required=True)
    p.add_argument("--runs", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_channel_estimate)

    p = sub.add_parser("syndrome-table", help="print and verify the syndrome table")
    p.set_defaults(func=cmd_syndrome_table)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except (ConfigError, InvalidArgumentError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
