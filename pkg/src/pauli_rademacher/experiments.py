"""The four numerical studies: M-scaling, L-scaling, convergence and gap.

Each study has a ``paper`` preset (large, hours-long settings) and a
``desk`` preset small enough for a workstation. Results are written as one
CSV per study plus a JSON manifest holding the resolved parameters, seed,
fitted regressions, package version and wall time.
"""
from __future__ import annotations

import copy
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import _io
from .analysis import RegressionResult, box_stats, loglog_fit, summarize
from .exceptions import InsufficientDataError
from .rademacher import (
    DEFAULT_EVAL_BUDGET,
    EstimatorConfig,
    default_model,
    estimate,
    restricted_scale,
)
from .training import SpsaConfig, gap_experiment

log = logging.getLogger(__name__)

__all__ = [
    "KINDS",
    "PRESETS",
    "ExperimentSpec",
    "ExperimentResult",
    "run",
    "run_scaling_m",
    "run_scaling_l",
    "run_convergence",
    "run_gap",
]

KINDS = ("scaling-m", "scaling-l", "convergence", "gap")

PRESETS: dict[str, dict[str, dict]] = {
    "scaling-m": {
        "paper": dict(n_qubits=5, L=5, sweep=[10, 100, 200, 400, 800],
                      n_trials=500, n_theta=100_000, scale=1.0),
        "desk": dict(n_qubits=5, L=5, sweep=[10, 100, 200, 400, 800],
                     n_trials=100, n_theta=2000, scale=1.0),
    },
    "scaling-l": {
        "paper": dict(n_qubits=5, sweep=[4, 8, 12, 16, 20], n_data=200,
                      n_trials=500, n_theta_per_L=50_000, restricted_mode="unit"),
        "desk": dict(n_qubits=5, sweep=[4, 8, 12, 16], n_data=200,
                     n_trials=100, n_theta_per_L=1000, restricted_mode="unit"),
    },
    "convergence": {
        "paper": dict(n_qubits=5, sweep=[4, 8, 12, 16, 20], n_data=200,
                      n_trials=500, n_theta_per_L=50_000, scale=1.0),
        "desk": dict(n_qubits=5, sweep=[4, 8, 12, 16, 20], n_data=200,
                     n_trials=256, n_theta_per_L=100, scale=1.0),
    },
    "gap": {
        "paper": dict(n_qubits=5, L_values=[4, 5, 8], M_values=[25, 100], repeats=20,
                      epochs=5000, lr=0.01, momentum=0.5, c=0.01, rmse_stop=1e-4,
                      n_test=1000, loss="rmse"),
        "desk": dict(n_qubits=5, L_values=[5], M_values=[25, 100], repeats=10,
                     epochs=1500, lr=0.01, momentum=0.5, c=0.01, rmse_stop=1e-4,
                     n_test=1000, loss="rmse"),
    },
}


@dataclass
class ExperimentSpec:
    kind: str
    preset: str = "desk"
    overrides: dict = field(default_factory=dict)
    seed: int = 0
    eval_budget: int | None = DEFAULT_EVAL_BUDGET

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown experiment kind {self.kind!r}; expected one of {KINDS}")
        if self.preset not in PRESETS[self.kind]:
            raise ValueError(f"unknown preset {self.preset!r} for {self.kind}")

    @property
    def params(self) -> dict:
        params = copy.deepcopy(PRESETS[self.kind][self.preset])
        unknown = set(self.overrides) - set(params)
        if unknown:
            raise ValueError(f"unknown parameter(s) for {self.kind}: {sorted(unknown)}")
        params.update({k: v for k, v in self.overrides.items() if v is not None})
        sweep_key = "L_values" if self.kind == "gap" else "sweep"
        if not params[sweep_key]:
            raise ValueError("sweep must not be empty")
        return params

    def echo(self) -> dict:
        return {"kind": self.kind, "preset": self.preset, "seed": self.seed,
                "eval_budget": self.eval_budget, "params": self.params}


@dataclass
class ExperimentResult:
    spec: ExperimentSpec
    columns: list[str]
    rows: list[tuple]
    fits: dict[str, RegressionResult] = field(default_factory=dict)
    summary_columns: list[str] = field(default_factory=list)
    summary_rows: list[tuple] = field(default_factory=list)
    wall_time: float = 0.0
    n_jobs: int = 1

    @property
    def name(self) -> str:
        return self.spec.kind.replace("-", "_")

    def write(self, out_dir) -> dict[str, Path]:
        out_dir = Path(out_dir)
        config = self.spec.echo()
        paths = {"csv": _io.write_csv(out_dir / f"{self.name}.csv", self.columns, self.rows,
                                      seed=self.spec.seed, config=config)}
        if self.summary_rows:
            paths["summary"] = _io.write_csv(out_dir / f"{self.name}_summary.csv",
                                             self.summary_columns, self.summary_rows,
                                             seed=self.spec.seed, config=config)
        paths["manifest"] = _io.write_manifest(out_dir / f"{self.name}_manifest.json", {
            **config,
            "fits": {k: v.to_dict() for k, v in self.fits.items()},
            "files": {k: p.name for k, p in paths.items()},
            "n_jobs": self.n_jobs,
            "wall_time_s": self.wall_time,
        })
        return paths


def run_scaling_m(spec: ExperimentSpec, n_jobs: int = 1) -> ExperimentResult:
    """Estimate versus ``M`` at fixed ``L``, then fit ``ln g_ave`` on ``ln M``."""
    p = spec.params
    start = time.perf_counter()
    base = EstimatorConfig(n_trials=p["n_trials"], n_data=p["sweep"][0], n_theta=p["n_theta"],
                           L=p["L"], scale=p["scale"], n_qubits=p["n_qubits"], seed=spec.seed,
                           eval_budget=spec.eval_budget)
    model = default_model(base)
    rows = []
    for M in p["sweep"]:
        est = estimate(base.replace(n_data=int(M)), model, n_jobs=n_jobs)
        rows.append((int(M), est.g_ave, est.g_err, p["n_trials"], p["n_theta"], p["scale"]))
    fits = {}
    try:
        fits["M"] = loglog_fit([r[0] for r in rows], [r[1] for r in rows])
    except InsufficientDataError as exc:
        raise InsufficientDataError(f"M-scaling fit over sweep {p['sweep']}: {exc}") from exc
    except ValueError as exc:
        log.warning("no M fit for sweep %s: %s", p["sweep"], exc)
    return ExperimentResult(spec, ["M", "g_ave", "g_err", "n_trials", "n_theta", "scale"], rows,
                            fits, wall_time=time.perf_counter() - start, n_jobs=n_jobs)


def run_scaling_l(spec: ExperimentSpec, n_jobs: int = 1) -> ExperimentResult:
    """Full and restricted parameter boxes versus ``L``.

    Both domains share the model, inputs and signs for each ``L``; only the
    candidate box differs.
    """
    p = spec.params
    start = time.perf_counter()
    rows = []
    g = {"full": [], "restricted": []}
    for L in p["sweep"]:
        L = int(L)
        cfg = EstimatorConfig(n_trials=p["n_trials"], n_data=p["n_data"],
                              n_theta=p["n_theta_per_L"] * L, L=L, scale=1.0,
                              n_qubits=p["n_qubits"], seed=spec.seed, eval_budget=spec.eval_budget)
        model = default_model(cfg)
        for domain, scale in (("full", 1.0), ("restricted", restricted_scale(L, p["restricted_mode"]))):
            est = estimate(cfg.replace(scale=scale), model, n_jobs=n_jobs)
            g[domain].append(est.g_ave)
            rows.append((L, domain, scale, 2 * np.pi * scale, cfg.n_theta, est.g_ave, est.g_err))
    Ls = [int(L) for L in p["sweep"]]
    fits = {}
    for d in g:
        try:
            fits[d] = loglog_fit(Ls, g[d])
        except ValueError as exc:
            # keep the estimates; a non-positive mean only rules out the log-log fit
            log.warning("no %s fit for L sweep %s: %s", d, Ls, exc)
    return ExperimentResult(
        spec, ["L", "domain", "scale", "theta_max", "n_theta", "g_ave", "g_err"], rows, fits,
        wall_time=time.perf_counter() - start, n_jobs=n_jobs)


def run_convergence(spec: ExperimentSpec, n_jobs: int = 1) -> ExperimentResult:
    """Running mean of the per-trial maxima, one estimator run per ``L``."""
    p = spec.params
    start = time.perf_counter()
    rows = []
    for L in p["sweep"]:
        L = int(L)
        cfg = EstimatorConfig(n_trials=p["n_trials"], n_data=p["n_data"],
                              n_theta=p["n_theta_per_L"] * L, L=L, scale=p["scale"],
                              n_qubits=p["n_qubits"], seed=spec.seed, eval_budget=spec.eval_budget)
        est = estimate(cfg, None, n_jobs=n_jobs)
        values = np.asarray(est.per_trial_values)
        means = est.prefix_means()
        for n in range(1, values.size + 1):
            se = summarize(values[:n])[1] if n >= 2 else float("nan")
            rows.append((L, n, values[n - 1], means[n - 1], se))
    return ExperimentResult(spec, ["L", "n_trials", "trial_max", "prefix_mean", "prefix_stderr"],
                            rows, wall_time=time.perf_counter() - start, n_jobs=n_jobs)


def run_gap(spec: ExperimentSpec, n_jobs: int = 1) -> ExperimentResult:
    """Generalization gaps per ``(L, M, repeat)`` with box-plot summaries per cell."""
    p = spec.params
    start = time.perf_counter()
    spsa = SpsaConfig(learning_rate=p["lr"], momentum=p["momentum"], max_epochs=p["epochs"],
                      rmse_stop=p["rmse_stop"], perturbation_size=p["c"])
    gap_rows = gap_experiment(p["L_values"], p["M_values"], p["repeats"], n_qubits=p["n_qubits"],
                              spsa=spsa, n_test=p["n_test"], loss=p["loss"], seed=spec.seed,
                              n_jobs=n_jobs)
    rows = [(r.L, r.M, r.repeat, r.train_loss, r.test_loss, r.gap, r.epochs_used) for r in gap_rows]
    summary = []
    for L in p["L_values"]:
        for M in p["M_values"]:
            b = box_stats([r.gap for r in gap_rows if r.L == L and r.M == M])
            summary.append((L, M, b.n, b.median, b.q1, b.q3, b.whisker_low, b.whisker_high))
    return ExperimentResult(
        spec, ["L", "M", "repeat", "train_loss", "test_loss", "gap", "epochs_used"], rows,
        summary_columns=["L", "M", "n", "median", "q1", "q3", "whisker_low", "whisker_high"],
        summary_rows=summary, wall_time=time.perf_counter() - start, n_jobs=n_jobs)


_RUNNERS = {
    "scaling-m": run_scaling_m,
    "scaling-l": run_scaling_l,
    "convergence": run_convergence,
    "gap": run_gap,
}


def run(spec: ExperimentSpec, n_jobs: int = 1) -> ExperimentResult:
    return _RUNNERS[spec.kind](spec, n_jobs=n_jobs)
