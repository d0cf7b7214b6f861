"""Command-line entry point: ``chanpred {trial,sweep,arch-sweep,acf-check}``."""

from __future__ import annotations

import argparse
import csv
import io
import logging
import sys
from dataclasses import replace

import numpy as np

from chanpred.channel import draw_sos_parameters, generate_trace, jakes_acf
from chanpred.config import ConfigError, Experiment, SweepSettings, load_config
from chanpred.harness import (
    PREDICTORS,
    SWEEP_AXES,
    TrialConfig,
    architecture_sweep,
    derive_seed,
    mse_to_db,
    results_csv,
    run_sweep,
    run_trial,
    write_results,
)
from chanpred.numerics import DomainError, SingularMatrixError
from chanpred.wiener import sample_acf

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4

log = logging.getLogger("chanpred")


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    with open(out, "w", newline="") as fh:
        fh.write(text)


def _experiment(args) -> Experiment:
    exp = load_config(args.config) if args.config else Experiment(TrialConfig(), SweepSettings())
    trial = exp.trial
    if args.seed is not None:
        trial = replace(trial, seed=args.seed)
    if args.predictors:
        names = [p.strip() for p in args.predictors.split(",") if p.strip()]
        bad = [p for p in names if p not in PREDICTORS]
        if bad:
            raise ConfigError(f"unknown predictors {bad}; choose from {PREDICTORS}")
        trial = replace(trial, predictors=tuple(names))
    if args.trials is not None:
        exp.sweep.trials = args.trials
    exp.trial = trial
    return exp


def cmd_trial(args, exp: Experiment) -> None:
    result = run_trial(exp.trial)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["predictor", "mse", "mse_db", "predictions", "epochs"])
    for name in exp.trial.predictors:
        mse = result.mse[name]
        writer.writerow([name, f"{mse:.16e}", f"{mse_to_db(mse):.16e}", result.predictions, result.epochs[name]])
    _emit(buf.getvalue(), args.out)
    log.info("trial finished in %.2f s", result.wall_time)


def _write_sweep(sweep, out: str | None) -> None:
    if out is None:
        sys.stdout.write(results_csv(sweep))
    else:
        write_results(sweep, out)


def cmd_sweep(args, exp: Experiment) -> None:
    axis = args.axis or exp.sweep.axis
    if axis not in SWEEP_AXES:
        raise ConfigError(f"sweep axis must be one of {SWEEP_AXES}, got {axis!r}")
    values = [float(v) for v in args.values.split(",")] if args.values else exp.sweep.values
    sweep = run_sweep(exp.trial, axis, values, exp.sweep.trials, workers=args.workers or exp.sweep.workers)
    _write_sweep(sweep, args.out)


def cmd_arch_sweep(args, exp: Experiment) -> None:
    # Architecture comparison protocol: 500 samples unless the config says otherwise.
    base = exp.trial
    if "total_samples" not in exp.explicit:
        base = replace(base, total_samples=500)
    sweep = architecture_sweep(base, exp.sweep.grid, exp.sweep.doppler_values, exp.sweep.trials,
                               workers=args.workers or exp.sweep.workers)
    _write_sweep(sweep, args.out)


def cmd_acf_check(args, exp: Experiment) -> None:
    cfg = exp.trial
    length = args.length
    seeds = exp.sweep.trials if args.trials is not None else 20
    acc = np.zeros(args.max_lag + 1)
    for t in range(seeds):
        params = draw_sos_parameters(cfg.num_sinusoids, derive_seed(cfg.seed, t))
        trace = generate_trace(params, cfg.fd_max, cfg.ts, length)
        acc += sample_acf(trace.samples, args.max_lag).values.real
    acc /= seeds
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["lag", "sample_acf", "jakes_acf", "abs_dev"])
    worst = 0.0
    for k, value in enumerate(acc):
        ref = jakes_acf(k, cfg.fd_max, cfg.ts)
        worst = max(worst, abs(value - ref))
        writer.writerow([k, f"{value:.16e}", f"{ref:.16e}", f"{abs(value - ref):.16e}"])
    _emit(buf.getvalue(), args.out)
    log.info("max |sample ACF - J0| over lags 0..%d: %.4f", args.max_lag, worst)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="experiment config file")
    common.add_argument("--seed", type=int, help="base seed (u64)")
    common.add_argument("--out", help="output CSV path (default: stdout)")
    common.add_argument("--trials", type=int, help="Monte Carlo trials per point")
    common.add_argument("--predictors", help="comma list from wiener,rnn,lstm")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="chanpred", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("trial", parents=[common], help="run one Monte Carlo trial")
    p = sub.add_parser("sweep", parents=[common], help="sweep one parameter")
    p.add_argument("--axis", choices=SWEEP_AXES)
    p.add_argument("--values", help="comma-separated axis values")
    p.add_argument("--workers", type=int)
    p = sub.add_parser("arch-sweep", parents=[common], help="RNN depth/width grid over Doppler")
    p.add_argument("--workers", type=int)
    p = sub.add_parser("acf-check", parents=[common], help="SOS sample ACF vs Jakes J0")
    p.add_argument("--length", type=int, default=10_000)
    p.add_argument("--max-lag", type=int, default=20)
    return parser


COMMANDS = {"trial": cmd_trial, "sweep": cmd_sweep, "arch-sweep": cmd_arch_sweep, "acf-check": cmd_acf_check}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        exp = _experiment(args)
        COMMANDS[args.command](args, exp)
    except (ConfigError, DomainError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SingularMatrixError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
