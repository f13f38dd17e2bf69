"""Random-search lower approximation of the empirical Rademacher complexity.

Each trial draws ``N_data`` inputs ``x_j ~ U(0, 2 pi)`` and signs
``sigma_j = +-1``, then takes the maximum of
``(1/N_data) sum_j sigma_j f(x_j; theta)`` over ``N_theta`` random
``theta ~ U(0, 2 pi * scale)^L``. The estimate is the mean of the per-trial
maxima with its standard error.

Reproducibility: trial ``t`` reads its inputs and signs from
``substream(seed, t)`` and its parameter candidates, in order, from
``substream(seed, t, THETA)``. The first ``N_theta`` candidates of a run are
therefore a prefix of those of any run with more candidates, and results do
not depend on ``n_jobs`` or on the chunk size.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, replace
from typing import Sequence

import numpy as np
from joblib import Parallel, delayed
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from . import _rng
from .analysis import summarize
from .exceptions import BudgetExceededError, OracleSizeError
from .simulator import CircuitModel, evaluate_batch
from .validation import check_inputs, check_theta_set

__all__ = [
    "EstimatorConfig",
    "RademacherEstimate",
    "RademacherEstimator",
    "default_model",
    "estimate",
    "enumerate_sigma",
    "estimate_scaling_sweep",
    "restricted_scale",
    "DEFAULT_EVAL_BUDGET",
    "MAX_ENUMERATION",
]

DEFAULT_EVAL_BUDGET = 10**10
MAX_ENUMERATION = 20
TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class EstimatorConfig:
    n_trials: int
    n_data: int
    n_theta: int
    L: int
    scale: float = 1.0
    n_qubits: int = 5
    seed: int = 0
    model_source: str = "fixed"
    eval_budget: int | None = DEFAULT_EVAL_BUDGET

    def __post_init__(self):
        for name in ("n_trials", "n_data", "n_theta", "n_qubits"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1, got {getattr(self, name)}")
        if self.L < 0:
            raise ValueError(f"L must be >= 0, got {self.L}")
        if not self.scale > 0:
            raise ValueError(f"scale must be > 0, got {self.scale}")
        if self.model_source not in ("fixed", "resampled"):
            raise ValueError(f"model_source must be 'fixed' or 'resampled', got {self.model_source!r}")
        if self.seed < 0:
            raise ValueError(f"seed must be non-negative, got {self.seed}")

    @property
    def n_evaluations(self) -> int:
        return self.n_trials * self.n_theta * self.n_data

    @property
    def theta_high(self) -> float:
        return TWO_PI * self.scale

    def replace(self, **changes) -> EstimatorConfig:
        return replace(self, **changes)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True, eq=False)
class RademacherEstimate:
    g_ave: float
    g_err: float
    per_trial_values: np.ndarray = field(repr=False)
    config: EstimatorConfig

    def __post_init__(self):
        if len(self.per_trial_values) != self.config.n_trials:
            raise ValueError("per-trial values do not match n_trials")

    def prefix_means(self) -> np.ndarray:
        """Running mean of the per-trial maxima (entry ``i`` uses trials ``0..i``)."""
        v = np.asarray(self.per_trial_values)
        return np.cumsum(v) / np.arange(1, v.size + 1)


def restricted_scale(L: int, mode: str = "unit") -> float:
    """Scale for the shrunken parameter box.

    ``"unit"`` gives ``1/(2 pi sqrt(L))``, the experimental setting, so that
    ``theta_j ~ U(0, 1/sqrt(L))``. ``"period"`` gives ``1/sqrt(L)``, the box
    ``[0, 2 pi / sqrt(L)]^L`` of diameter ``2 pi`` used by the restricted bound.
    """
    if L < 1:
        raise ValueError(f"L must be >= 1, got {L}")
    if mode == "unit":
        return 1.0 / (TWO_PI * math.sqrt(L))
    if mode == "period":
        return 1.0 / math.sqrt(L)
    raise ValueError(f"unknown restricted-scale mode {mode!r}")


def default_model(cfg: EstimatorConfig, trial: int | None = None) -> CircuitModel:
    """Random model with ``Z(0)`` observable drawn from the seed (or the trial).

    Generators are drawn one after another from a stream that does not depend
    on ``L``, so the model for ``L`` is a prefix of the model for any larger
    ``L`` under the same seed.
    """
    if trial is None:
        rng = _rng.substream(cfg.seed, _rng.MODEL)
    else:
        rng = _rng.substream(cfg.seed, trial, _rng.MODEL)
    return CircuitModel.random(cfg.n_qubits, cfg.L, rng)


def _check_budget(cfg: EstimatorConfig):
    if cfg.eval_budget is not None and cfg.n_evaluations > cfg.eval_budget:
        raise BudgetExceededError(cfg.n_evaluations, cfg.eval_budget)


def _draw_signs(rng: np.random.Generator, n: int) -> np.ndarray:
    return 2.0 * rng.integers(0, 2, size=n) - 1.0


def _trial_max(cfg, model, t, x_set, theta_set, chunk) -> float:
    if cfg.model_source == "resampled":
        model = default_model(cfg, trial=t)
    prop = model.propagator
    rng = _rng.substream(cfg.seed, t)
    xs = rng.uniform(0.0, TWO_PI, size=cfg.n_data)
    sigma = _draw_signs(rng, cfg.n_data)
    if x_set is not None:
        xs = x_set
    # (1/N) sum_j sigma_j f(x_j; theta) = coeffs(theta) . weights
    weights = prop.features(xs).T @ sigma / cfg.n_data
    if theta_set is not None:
        return float(np.max(weights @ prop.coefficients(theta_set)))
    trng = _rng.substream(cfg.seed, t, _rng.THETA)
    best = -math.inf
    done = 0
    while done < cfg.n_theta:
        b = min(chunk, cfg.n_theta - done)
        thetas = trng.uniform(0.0, cfg.theta_high, size=(b, cfg.L))
        best = max(best, float(np.max(weights @ prop.coefficients(thetas))))
        done += b
    return best


def _trial_block(cfg, model, trials, x_set, theta_set, chunk):
    return [_trial_max(cfg, model, t, x_set, theta_set, chunk) for t in trials]


def estimate(cfg: EstimatorConfig, model: CircuitModel | None = None, *,
             n_jobs: int = 1, x_set=None, theta_set=None,
             chunk: int = 4096) -> RademacherEstimate:
    """Run the random-search estimator.

    Parameters
    ----------
    cfg : EstimatorConfig
    model : CircuitModel, optional
        Required shape ``n_qubits``/``L`` as in ``cfg``. Defaults to
        :func:`default_model`. Ignored when ``cfg.model_source == "resampled"``.
    n_jobs : int
        Worker processes; results are identical for every value.
    x_set, theta_set : array-like, optional
        Hold the inputs (length ``n_data``) or the candidate set
        (``(n_theta, L)``) fixed across trials, so that only the signs vary.
    """
    _check_budget(cfg)
    if model is None:
        model = default_model(cfg)
    if model.L != cfg.L or model.n_qubits != cfg.n_qubits:
        raise ValueError(
            f"model has n_qubits={model.n_qubits}, L={model.L}; "
            f"config expects n_qubits={cfg.n_qubits}, L={cfg.L}"
        )
    if x_set is not None:
        x_set = check_inputs(x_set)
        if x_set.size != cfg.n_data:
            raise ValueError(f"x_set has {x_set.size} points, n_data is {cfg.n_data}")
    if theta_set is not None:
        theta_set = check_theta_set(theta_set, cfg.L)
        if theta_set.shape[0] != cfg.n_theta:
            raise ValueError(f"theta_set has {theta_set.shape[0]} rows, n_theta is {cfg.n_theta}")

    trials = np.arange(cfg.n_trials)
    if n_jobs == 1:
        values = _trial_block(cfg, model, trials, x_set, theta_set, chunk)
    else:
        n_workers = max(1, n_jobs if n_jobs > 0 else 1)
        blocks = np.array_split(trials, min(cfg.n_trials, 4 * n_workers))
        parts = Parallel(n_jobs=n_jobs)(
            delayed(_trial_block)(cfg, model, block, x_set, theta_set, chunk) for block in blocks
        )
        values = [v for part in parts for v in part]
    per_trial = np.asarray(values, dtype=float)
    if cfg.n_trials >= 2:
        g_ave, g_err = summarize(per_trial)
    else:
        g_ave, g_err = float(per_trial[0]), 0.0
    return RademacherEstimate(g_ave, g_err, per_trial, cfg)


def enumerate_sigma(cfg: EstimatorConfig, model: CircuitModel, theta_set, x_set,
                    f_values=None) -> float:
    """Exact sign average of the maximum over a fixed candidate set.

    Averages ``max_{theta in theta_set} (1/N) sum_j sigma_j f(x_j; theta)``
    over all ``2**N`` sign patterns. ``f_values`` (shape ``(n_theta, N)``)
    may be supplied directly instead of simulating the model.
    """
    x_set = check_inputs(x_set)
    n = x_set.size
    if n > MAX_ENUMERATION:
        raise OracleSizeError(f"sign enumeration limited to {MAX_ENUMERATION} points, got {n}")
    if n != cfg.n_data:
        raise ValueError(f"x_set has {n} points, n_data is {cfg.n_data}")
    if f_values is None:
        theta_set = check_theta_set(theta_set, model.L)
        f_values = evaluate_batch(model, x_set[None, :], theta_set[:, None, :])
    f_values = np.atleast_2d(np.asarray(f_values, dtype=float))
    bits = np.arange(n)
    total = 0.0
    n_patterns = 1 << n
    step = 1 << 14
    for start in range(0, n_patterns, step):
        codes = np.arange(start, min(start + step, n_patterns))
        signs = 1.0 - 2.0 * ((codes[:, None] >> bits) & 1)
        total += float(np.sum(np.max(signs @ f_values.T, axis=1)))
    return total / n_patterns / n


def estimate_scaling_sweep(base_cfg: EstimatorConfig, sweep: Sequence[int], *,
                           parameter: str = "M", restricted: bool = False,
                           restricted_mode: str = "unit", theta_per_L: bool = True,
                           model: CircuitModel | None = None,
                           n_jobs: int = 1) -> list[RademacherEstimate]:
    """Run :func:`estimate` at each sweep point.

    ``parameter="M"`` varies ``n_data`` with everything else fixed. With
    ``parameter="L"`` the model is redrawn for each ``L`` and, when
    ``theta_per_L``, ``n_theta`` becomes ``base_cfg.n_theta * L``; with
    ``restricted`` the scale becomes :func:`restricted_scale`.
    """
    if len(sweep) == 0:
        raise ValueError("sweep must not be empty")
    out = []
    for value in sweep:
        if parameter == "M":
            cfg = base_cfg.replace(n_data=int(value))
            if restricted:
                cfg = cfg.replace(scale=restricted_scale(cfg.L, restricted_mode))
            out.append(estimate(cfg, model, n_jobs=n_jobs))
        elif parameter == "L":
            L = int(value)
            cfg = base_cfg.replace(L=L)
            if theta_per_L:
                cfg = cfg.replace(n_theta=base_cfg.n_theta * L)
            if restricted:
                cfg = cfg.replace(scale=restricted_scale(L, restricted_mode))
            out.append(estimate(cfg, None, n_jobs=n_jobs))
        else:
            raise ValueError(f"parameter must be 'M' or 'L', got {parameter!r}")
    return out


class RademacherEstimator(BaseEstimator):
    """Estimator-style wrapper around :func:`estimate`.

    ``fit(X)`` with ``X`` of shape ``(n_data,)`` or ``(n_data, 1)`` holds the
    inputs fixed; ``fit()`` resamples inputs every trial using ``n_data``.

    Attributes
    ----------
    g_ave_, g_err_ : float
    per_trial_values_ : ndarray of shape (n_trials,)
    model_ : CircuitModel
    estimate_ : RademacherEstimate
    """

    def __init__(self, n_trials=100, n_data=100, n_theta=1000, L=5, scale=1.0,
                 n_qubits=5, generators=None, model_source="fixed",
                 eval_budget=DEFAULT_EVAL_BUDGET, random_state=0, n_jobs=1):
        self.n_trials = n_trials
        self.n_data = n_data
        self.n_theta = n_theta
        self.L = L
        self.scale = scale
        self.n_qubits = n_qubits
        self.generators = generators
        self.model_source = model_source
        self.eval_budget = eval_budget
        self.random_state = random_state
        self.n_jobs = n_jobs

    def fit(self, X=None, y=None):
        x_set = None if X is None else check_inputs(X)
        n_data = self.n_data if x_set is None else x_set.size
        L = self.L if self.generators is None else len(self.generators)
        cfg = EstimatorConfig(
            n_trials=self.n_trials, n_data=n_data, n_theta=self.n_theta, L=L,
            scale=self.scale, n_qubits=self.n_qubits, seed=int(self.random_state),
            model_source=self.model_source, eval_budget=self.eval_budget,
        )
        if self.generators is None:
            model = default_model(cfg)
        else:
            obs = "Z" + "I" * (self.n_qubits - 1)
            model = CircuitModel.from_labels(self.generators, obs)
        self.estimate_ = estimate(cfg, model, n_jobs=self.n_jobs, x_set=x_set)
        self.model_ = model
        self.g_ave_ = self.estimate_.g_ave
        self.g_err_ = self.estimate_.g_err
        self.per_trial_values_ = self.estimate_.per_trial_values
        return self

    def score(self, X=None, y=None) -> float:
        check_is_fitted(self, "g_ave_")
        return self.g_ave_
