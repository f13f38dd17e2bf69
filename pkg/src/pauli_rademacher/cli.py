"""Command-line entry point: ``pauli-rademacher <subcommand> [options]``.

Settings resolve as built-in preset < ``--config`` JSON file < flags. The
seed and thread count may also come from ``PAULI_RADEMACHER_SEED`` and
``PAULI_RADEMACHER_THREADS``; the resolved seed is written into every output.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__, _io, _rng
from .analysis import loglog_fit, ols_fit
from .bounds import bound_report
from .exceptions import BudgetExceededError, InsufficientDataError, OracleSizeError
from .experiments import PRESETS, ExperimentSpec, run
from .rademacher import DEFAULT_EVAL_BUDGET, EstimatorConfig, default_model, enumerate_sigma, estimate
from .simulator import CircuitModel

log = logging.getLogger("pauli_rademacher")

SEED_ENV = "PAULI_RADEMACHER_SEED"
THREADS_ENV = "PAULI_RADEMACHER_THREADS"

EXPERIMENT_HELP = {
    "scaling-m": "CSV scaling_m.csv: M, g_ave, g_err, n_trials, n_theta, scale. "
                 "Manifest holds the log-log fit of g_ave on M.",
    "scaling-l": "CSV scaling_l.csv: L, domain (full|restricted), scale, theta_max, n_theta, "
                 "g_ave, g_err. Manifest holds one log-log fit per domain.",
    "convergence": "CSV convergence.csv: L, n_trials (prefix length), trial_max, prefix_mean, "
                   "prefix_stderr.",
    "gap": "CSV gap.csv: L, M, repeat, train_loss, test_loss, gap, epochs_used; "
           "gap_summary.csv: L, M, n, median, q1, q3, whisker_low, whisker_high.",
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        # one-line diagnostic; argparse names the offending flag in ``message``
        self.exit(2, f"{self.prog}: error: {message}\n")


def _threads(value: str) -> int:
    if value == "auto":
        return -1
    n = int(value)
    if n < 1:
        raise argparse.ArgumentTypeError("must be a positive integer or 'auto'")
    return n


def _nonneg_int(value: str) -> int:
    n = int(value)
    if n < 0:
        raise argparse.ArgumentTypeError("must be non-negative")
    return n


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--seed", type=_nonneg_int, default=None,
                   help=f"random seed (default: ${SEED_ENV} or 0)")
    p.add_argument("--threads", type=_threads, default=None,
                   help=f"worker processes or 'auto' (default: ${THREADS_ENV} or 1)")
    p.add_argument("--eval-budget", type=float, default=DEFAULT_EVAL_BUDGET,
                   help="maximum circuit evaluations per estimator run (default: 1e10)")
    p.add_argument("--no-budget", action="store_true", help="disable the evaluation budget")
    p.add_argument("--config", type=Path, help="JSON file with parameter overrides")
    p.add_argument("-v", "--verbose", action="count", default=0)
    return p


def _resolve_seed(args) -> int:
    if args.seed is not None:
        return args.seed
    return int(os.environ.get(SEED_ENV, 0))


def _resolve_threads(args) -> int:
    if args.threads is not None:
        return args.threads
    env = os.environ.get(THREADS_ENV)
    return _threads(env) if env else 1


def _budget(args):
    return None if args.no_budget else int(args.eval_budget)


def _file_overrides(args) -> dict:
    if args.config is None:
        return {}
    data = json.loads(args.config.read_text())
    if not isinstance(data, dict):
        raise ValueError(f"--config {args.config}: expected a JSON object")
    return data


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pauli-rademacher",
                     description="Rademacher complexity of Pauli-generated circuits.")
    parser.add_argument("--version", action="version", version=f"pauli-rademacher {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="SUBCOMMAND", parser_class=_Parser)
    common = _common()

    b = sub.add_parser("bound", parents=[common], help="closed-form bound table")
    b.add_argument("--L", type=int, nargs="+", required=True)
    b.add_argument("--M", type=int, nargs="+", required=True)
    b.add_argument("--delta", type=float, default=0.05)
    b.add_argument("--format", choices=("text", "csv"), default="text")
    b.add_argument("--out", type=Path, help="also write the table as CSV")

    e = sub.add_parser("estimate", parents=[common], help="random-search complexity estimate")
    e.add_argument("--n-qubits", type=int, default=5)
    e.add_argument("--L", type=int, default=5)
    e.add_argument("--n-data", type=int, default=100)
    e.add_argument("--n-theta", type=int, default=1000)
    e.add_argument("--n-trials", type=int, default=100)
    e.add_argument("--scale", type=float, default=1.0)
    e.add_argument("--model-file", type=Path, help="JSON circuit model to hold fixed")
    e.add_argument("--resample-model", action="store_true",
                   help="draw fresh generators every trial")
    e.add_argument("--exact-sigma", action="store_true",
                   help="fix inputs and candidates and compare with exact sign enumeration "
                        "(n-data <= 20)")
    e.add_argument("--out", type=Path, help="CSV: trial_index, trial_max, g_ave, g_err")

    f = sub.add_parser("fit", parents=[common], help="log-log regression of a two-column CSV")
    f.add_argument("csv", type=Path)
    f.add_argument("--linear", action="store_true", help="fit y on x without logarithms")
    f.add_argument("--json", type=Path, help="also write the result as JSON")

    for kind, flags in (
        ("scaling-m", [("--L", int, None), ("--M-list", int, "+"), ("--n-trials", int, None),
                       ("--n-theta", int, None), ("--scale", float, None),
                       ("--n-qubits", int, None)]),
        ("scaling-l", [("--L-list", int, "+"), ("--n-data", int, None), ("--n-trials", int, None),
                       ("--n-theta-per-L", int, None), ("--n-qubits", int, None)]),
        ("convergence", [("--L-list", int, "+"), ("--n-data", int, None),
                         ("--n-trials", int, None), ("--n-theta-per-L", int, None),
                         ("--scale", float, None), ("--n-qubits", int, None)]),
        ("gap", [("--L-list", int, "+"), ("--M-list", int, "+"), ("--repeats", int, None),
                 ("--epochs", int, None), ("--lr", float, None), ("--momentum", float, None),
                 ("--c", float, None), ("--rmse-stop", float, None), ("--n-test", int, None),
                 ("--n-qubits", int, None)]),
    ):
        sp = sub.add_parser(kind, parents=[common], help=f"{kind} experiment",
                            description=EXPERIMENT_HELP[kind])
        sp.add_argument("--preset", choices=tuple(PRESETS[kind]), default="desk")
        sp.add_argument("--out", type=Path, default=Path("results"), help="output directory")
        for flag, typ, nargs in flags:
            sp.add_argument(flag, type=typ, nargs=nargs, default=None)
        if kind == "gap":
            sp.add_argument("--loss", choices=("rmse", "mse"), default=None)
        if kind == "scaling-l":
            sp.add_argument("--restricted-mode", choices=("unit", "period"), default=None)

    sub.add_parser("selftest", parents=[common], help="run the oracle checks")
    return parser


_FLAG_TO_PARAM = {
    "M_list": "sweep", "L_list": "sweep", "n_theta_per_L": "n_theta_per_L",
    "epochs": "epochs", "lr": "lr", "momentum": "momentum", "c": "c", "rmse_stop": "rmse_stop",
    "n_test": "n_test", "repeats": "repeats", "loss": "loss", "L": "L", "n_trials": "n_trials",
    "n_theta": "n_theta", "scale": "scale", "n_qubits": "n_qubits", "n_data": "n_data",
    "restricted_mode": "restricted_mode",
}


def _experiment_overrides(args) -> dict:
    overrides = _file_overrides(args)
    for flag, param in _FLAG_TO_PARAM.items():
        value = getattr(args, flag, None)
        if value is None:
            continue
        if args.command == "gap" and flag == "L_list":
            param = "L_values"
        elif args.command == "gap" and flag == "M_list":
            param = "M_values"
        overrides[param] = value
    return overrides


def _cmd_bound(args) -> int:
    cols = ["L", "M", "K", "R", "raw_bound", "clamped_bound", "restricted_bound", "delta",
            "gap_bound"]
    reports = [bound_report(L, M, args.delta) for L in args.L for M in args.M]
    rows = [[getattr(r, c) for c in cols] for r in reports]
    if args.format == "csv":
        print(",".join(cols))
        for row in rows:
            print(",".join(_io.fmt(v) for v in row))
    else:
        print("".join(f"{c:>17}" for c in cols))
        for row in rows:
            print("".join(f"{v:>17d}" if isinstance(v, int) else f"{v:>17.6g}" for v in row))
        for r in reports:
            if r.raw_bound > 1:
                print(f"L={r.L}, M={r.M}: raw bound {r.raw_bound:.4g} exceeds 1 and is clamped")
    if args.out:
        _io.write_csv(args.out, cols, rows, seed=_resolve_seed(args),
                      config={"command": "bound", "L": args.L, "M": args.M, "delta": args.delta})
    return 0


def _cmd_estimate(args) -> int:
    seed = _resolve_seed(args)
    params = {"n_trials": args.n_trials, "n_data": args.n_data, "n_theta": args.n_theta,
              "L": args.L, "scale": args.scale, "n_qubits": args.n_qubits}
    params.update(_file_overrides(args))
    model = CircuitModel.load(args.model_file) if args.model_file else None
    if model is not None:
        params["L"], params["n_qubits"] = model.L, model.n_qubits
    cfg = EstimatorConfig(seed=seed, eval_budget=_budget(args),
                          model_source="resampled" if args.resample_model else "fixed", **params)
    if model is None and cfg.model_source == "fixed":
        model = default_model(cfg)
    extra = {}
    if args.exact_sigma:
        if model is None:
            raise ValueError("--exact-sigma needs a fixed model")
        rng = _rng.substream(seed, _rng.TEST)
        xs = rng.uniform(0, 2 * math.pi, cfg.n_data)
        thetas = rng.uniform(0, cfg.theta_high, (cfg.n_theta, cfg.L))
        exact = enumerate_sigma(cfg, model, thetas, xs)
        est = estimate(cfg, model, n_jobs=_resolve_threads(args), x_set=xs, theta_set=thetas)
        extra["exact_value"] = exact
    else:
        est = estimate(cfg, model, n_jobs=_resolve_threads(args))
    print(f"g_ave = {est.g_ave:.10g}")
    print(f"g_err = {est.g_err:.10g}")
    if "exact_value" in extra:
        z = (est.g_ave - extra["exact_value"]) / est.g_err if est.g_err else 0.0
        print(f"exact = {extra['exact_value']:.10g}  (monte carlo off by {z:+.2f} standard errors)")
    if args.out:
        rows = [(t, v, None, None) for t, v in enumerate(est.per_trial_values)]
        rows.append(("summary", None, est.g_ave, est.g_err))
        config = {"command": "estimate", **cfg.to_dict(),
                  "model": model.to_dict() if model else None, **extra}
        _io.write_csv(args.out, ["trial_index", "trial_max", "g_ave", "g_err"], rows,
                      seed=seed, config=config)
    return 0


def _read_xy(path: Path):
    header, rows = _io.read_csv(path)
    data = [header] + rows
    xs, ys = [], []
    for row in data:
        if len(row) < 2:
            continue
        try:
            xs.append(float(row[0]))
            ys.append(float(row[1]))
        except ValueError:
            if row is header:
                continue
            raise ValueError(f"{path}: non-numeric row {row}")
    return xs, ys


def _cmd_fit(args) -> int:
    xs, ys = _read_xy(args.csv)
    result = ols_fit(xs, ys) if args.linear else loglog_fit(xs, ys)
    print(result)
    payload = {**result.to_dict(), "seed": _resolve_seed(args),
               "config": {"command": "fit", "csv": str(args.csv), "log_log": not args.linear}}
    text = _io.dumps(payload)
    print(text)
    if args.json:
        args.json.write_text(text + "\n")
    return 0


def _cmd_experiment(args) -> int:
    spec = ExperimentSpec(args.command, args.preset, _experiment_overrides(args),
                          seed=_resolve_seed(args), eval_budget=_budget(args))
    result = run(spec, n_jobs=_resolve_threads(args))
    paths = result.write(args.out)
    for name, fit in result.fits.items():
        print(f"{name}: {fit}")
    for p in paths.values():
        print(f"wrote {p}")
    return 0


def _cmd_selftest(args) -> int:
    from .selftest import run_all

    failed = 0
    for name, ok, detail in run_all():
        print(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
        failed += not ok
    return 1 if failed else 0


_COMMANDS = {
    "bound": _cmd_bound,
    "estimate": _cmd_estimate,
    "fit": _cmd_fit,
    "selftest": _cmd_selftest,
    "scaling-m": _cmd_experiment,
    "scaling-l": _cmd_experiment,
    "convergence": _cmd_experiment,
    "gap": _cmd_experiment,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 2
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2))
    try:
        return _COMMANDS[args.command](args)
    except (ValueError, BudgetExceededError, InsufficientDataError, OracleSizeError,
            OSError, AssertionError) as exc:
        print(f"pauli-rademacher {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
