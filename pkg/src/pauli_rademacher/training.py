"""Teacher-student regression with SPSA, and the generalization-gap study."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from joblib import Parallel, delayed
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted

from . import _rng
from .simulator import CircuitModel
from .validation import check_inputs

__all__ = [
    "Dataset",
    "SpsaConfig",
    "TrainingRun",
    "GapRow",
    "PauliCircuitRegressor",
    "generate_dataset",
    "label_inputs",
    "spsa_fit",
    "gap_experiment",
]

TWO_PI = 2.0 * math.pi
TARGET_THETA_RANGE = 0.01
INIT_THETA_RANGE = 1.0
LOSS_KINDS = ("rmse", "mse")


@dataclass(frozen=True, eq=False)
class Dataset:
    inputs: np.ndarray
    targets: np.ndarray
    target_model: CircuitModel
    target_theta: np.ndarray

    def __post_init__(self):
        if len(self.inputs) != len(self.targets):
            raise ValueError("inputs and targets differ in length")

    def __len__(self) -> int:
        return len(self.inputs)

    def relabel(self, xs) -> Dataset:
        """Same teacher on new inputs."""
        xs = np.asarray(xs, dtype=float)
        return Dataset(xs, label_inputs(self.target_model, self.target_theta, xs),
                       self.target_model, self.target_theta)


def label_inputs(model: CircuitModel, theta, xs) -> np.ndarray:
    return model.propagator.values(xs, np.asarray(theta, dtype=float)[None, :])[0]


def generate_dataset(n_qubits: int, L: int, M: int, rng: np.random.Generator,
                     target_theta=None) -> Dataset:
    """Random teacher circuit and ``M`` labelled inputs.

    Generators are uniform non-identity strings, the observable is ``Z(0)``,
    ``theta* ~ U(-0.01, 0.01)^L`` unless given, and ``x ~ U(0, 2 pi)``.
    """
    if n_qubits < 1 or L < 1 or M < 1:
        raise ValueError(f"need n_qubits, L, M >= 1, got {n_qubits}, {L}, {M}")
    model = CircuitModel.random(n_qubits, L, rng)
    if target_theta is None:
        target_theta = rng.uniform(-TARGET_THETA_RANGE, TARGET_THETA_RANGE, size=L)
    else:
        target_theta = np.asarray(target_theta, dtype=float)
        if target_theta.shape != (L,):
            raise ValueError(f"target_theta must have shape ({L},), got {target_theta.shape}")
    xs = rng.uniform(0.0, TWO_PI, size=M)
    return Dataset(xs, label_inputs(model, target_theta, xs), model, target_theta)


@dataclass(frozen=True)
class SpsaConfig:
    learning_rate: float = 0.01
    momentum: float = 0.5
    max_epochs: int = 5000
    rmse_stop: float = 1e-4
    perturbation_size: float = 0.01
    seed: int = 0

    def __post_init__(self):
        if self.learning_rate <= 0 or self.perturbation_size <= 0 or self.rmse_stop <= 0:
            raise ValueError("learning_rate, perturbation_size and rmse_stop must be positive")
        if self.max_epochs < 1:
            raise ValueError(f"max_epochs must be >= 1, got {self.max_epochs}")
        if not 0.0 <= self.momentum < 1.0:
            raise ValueError(f"momentum must lie in [0, 1), got {self.momentum}")


@dataclass(frozen=True, eq=False)
class TrainingRun:
    final_theta: np.ndarray
    initial_theta: np.ndarray
    train_rmse: float
    test_rmse: float
    epochs_used: int
    loss_trace: np.ndarray = field(repr=False)
    loss: str = "rmse"

    @property
    def train_loss(self) -> float:
        return self.train_rmse if self.loss == "rmse" else self.train_rmse**2

    @property
    def test_loss(self) -> float:
        return self.test_rmse if self.loss == "rmse" else self.test_rmse**2

    @property
    def gap(self) -> float:
        return self.test_loss - self.train_loss


class _Objective:
    """Mean squared error of ``f(x; theta)`` on fixed inputs."""

    def __init__(self, model: CircuitModel, xs, ys):
        self.prop = model.propagator
        self.features = self.prop.features(xs)
        self.ys = np.asarray(ys, dtype=float)

    def predict(self, theta) -> np.ndarray:
        return self.features @ self.prop.coefficients(np.asarray(theta)[None, :])[:, 0]

    def __call__(self, theta) -> float:
        r = self.predict(theta) - self.ys
        return float(r @ r) / r.size


def spsa_fit(model: CircuitModel, data: Dataset, cfg: SpsaConfig, *,
             test: Dataset | None = None, theta0=None, perturbations=None,
             loss: str = "rmse") -> TrainingRun:
    """First-order SPSA with velocity momentum on the training MSE.

    Each epoch checks the stop rule (training RMSE below ``cfg.rmse_stop``),
    then draws ``delta in {-1, +1}^L`` and steps::

        g = (loss(theta + c delta) - loss(theta - c delta)) / (2 c) * delta
        v = momentum * v + g
        theta = theta - lr * v

    ``theta0`` defaults to ``U(-1, 1)^L`` from ``substream(cfg.seed, INIT)``;
    perturbations come from ``substream(cfg.seed, PERTURB)`` unless an
    ``(epochs, L)`` array is passed.
    """
    if loss not in LOSS_KINDS:
        raise ValueError(f"loss must be one of {LOSS_KINDS}, got {loss!r}")
    L = model.L
    if theta0 is None:
        theta = _rng.substream(cfg.seed, _rng.INIT).uniform(-INIT_THETA_RANGE, INIT_THETA_RANGE, size=L)
    else:
        theta = np.array(theta0, dtype=float)
        if theta.shape != (L,):
            raise ValueError(f"theta0 must have shape ({L},), got {theta.shape}")
    initial = theta.copy()
    if perturbations is not None:
        perturbations = np.asarray(perturbations, dtype=float)
        if perturbations.ndim != 2 or perturbations.shape[1] != L:
            raise ValueError(f"perturbations must have shape (epochs, {L})")
    prng = _rng.substream(cfg.seed, _rng.PERTURB)

    objective = _Objective(model, data.inputs, data.targets)
    c = cfg.perturbation_size
    velocity = np.zeros(L)
    trace = []
    epochs = 0
    for epoch in range(cfg.max_epochs):
        rmse = math.sqrt(objective(theta))
        trace.append(rmse)
        epochs = epoch + 1
        if rmse < cfg.rmse_stop:
            break
        if perturbations is not None:
            if epoch >= len(perturbations):
                break
            delta = perturbations[epoch]
        else:
            delta = 2.0 * prng.integers(0, 2, size=L) - 1.0
        diff = objective(theta + c * delta) - objective(theta - c * delta)
        grad = diff / (2.0 * c) * delta
        velocity = cfg.momentum * velocity + grad
        theta = theta - cfg.learning_rate * velocity
    train_rmse = math.sqrt(objective(theta))
    if test is not None:
        test_rmse = math.sqrt(_Objective(model, test.inputs, test.targets)(theta))
    else:
        test_rmse = math.nan
    return TrainingRun(theta, initial, train_rmse, test_rmse, epochs, np.asarray(trace), loss)


class PauliCircuitRegressor(RegressorMixin, BaseEstimator):
    """Regressor ``x -> f(x; theta)`` trained with SPSA.

    Parameters
    ----------
    n_qubits, n_layers : int
        Circuit size; ``n_layers`` is the number of Pauli rotations ``L``.
    generators : sequence of str, optional
        Fixed generator labels. Drawn from ``random_state`` when omitted.
    learning_rate, momentum, max_epochs, rmse_stop, perturbation_size
        See :class:`SpsaConfig`.
    random_state : int
        Seeds the generators, the initial parameters and the perturbations.
    """

    def __init__(self, n_qubits=5, n_layers=5, generators=None, learning_rate=0.01,
                 momentum=0.5, max_epochs=5000, rmse_stop=1e-4, perturbation_size=0.01,
                 random_state=0):
        self.n_qubits = n_qubits
        self.n_layers = n_layers
        self.generators = generators
        self.learning_rate = learning_rate
        self.momentum = momentum
        self.max_epochs = max_epochs
        self.rmse_stop = rmse_stop
        self.perturbation_size = perturbation_size
        self.random_state = random_state

    def _build_model(self) -> CircuitModel:
        if self.generators is not None:
            obs = "Z" + "I" * (self.n_qubits - 1)
            return CircuitModel.from_labels(self.generators, obs)
        rng = _rng.substream(int(self.random_state), _rng.MODEL)
        return CircuitModel.random(self.n_qubits, self.n_layers, rng)

    def fit(self, X, y):
        xs = check_inputs(X)
        ys = np.asarray(y, dtype=float).ravel()
        if ys.size != xs.size:
            raise ValueError(f"X has {xs.size} samples, y has {ys.size}")
        model = self._build_model()
        cfg = SpsaConfig(self.learning_rate, self.momentum, self.max_epochs, self.rmse_stop,
                         self.perturbation_size, int(self.random_state))
        data = Dataset(xs, ys, model, np.zeros(model.L))
        run = spsa_fit(model, data, cfg)
        self.model_ = model
        self.theta_ = run.final_theta
        self.loss_curve_ = run.loss_trace
        self.n_iter_ = run.epochs_used
        self.n_features_in_ = 1
        return self

    def predict(self, X) -> np.ndarray:
        check_is_fitted(self, "theta_")
        xs = check_inputs(X)
        return self.model_.propagator.values(xs, self.theta_[None, :])[0]


@dataclass(frozen=True)
class GapRow:
    L: int
    M: int
    repeat: int
    train_loss: float
    test_loss: float
    gap: float
    epochs_used: int


def _gap_cell(n_qubits, L, M, repeat, cfg: SpsaConfig, n_test, loss, seed) -> GapRow:
    # teacher, student and initial point depend on (L, repeat) only, so the
    # M values of one repeat share them and differ only in the training data
    teacher_rng = _rng.substream(seed, L, repeat, _rng.MODEL)
    teacher = CircuitModel.random(n_qubits, L, teacher_rng)
    target_theta = teacher_rng.uniform(-TARGET_THETA_RANGE, TARGET_THETA_RANGE, size=L)
    student = CircuitModel.random(n_qubits, L, _rng.substream(seed, L, repeat, _rng.INIT))
    xs = _rng.substream(seed, L, repeat, M, _rng.DATA).uniform(0.0, TWO_PI, size=M)
    xt = _rng.substream(seed, L, repeat, _rng.TEST).uniform(0.0, TWO_PI, size=n_test)
    train = Dataset(xs, label_inputs(teacher, target_theta, xs), teacher, target_theta)
    test = train.relabel(xt)
    run_cfg = SpsaConfig(cfg.learning_rate, cfg.momentum, cfg.max_epochs, cfg.rmse_stop,
                         cfg.perturbation_size, seed=_cell_seed(seed, L, M, repeat))
    theta0 = _rng.substream(seed, L, repeat, _rng.INIT, 1).uniform(
        -INIT_THETA_RANGE, INIT_THETA_RANGE, size=L)
    run = spsa_fit(student, train, run_cfg, test=test, theta0=theta0, loss=loss)
    return GapRow(L, M, repeat, run.train_loss, run.test_loss, run.gap, run.epochs_used)


def _cell_seed(seed, L, M, repeat) -> int:
    return int(np.random.SeedSequence(seed, spawn_key=(L, M, repeat)).generate_state(1, np.uint64)[0] >> 1)


def gap_experiment(L_values: Sequence[int], M_values: Sequence[int], n_repeats: int, *,
                   n_qubits: int = 5, spsa: SpsaConfig | None = None, n_test: int = 1000,
                   loss: str = "rmse", seed: int = 0, n_jobs: int = 1) -> list[GapRow]:
    """Train a fresh student for every ``(L, M, repeat)`` and record its gap.

    Rows come back ordered by ``L``, then ``M``, then repeat.
    """
    if not L_values or not M_values or n_repeats < 1:
        raise ValueError("L_values and M_values must be non-empty and n_repeats >= 1")
    if loss not in LOSS_KINDS:
        raise ValueError(f"loss must be one of {LOSS_KINDS}, got {loss!r}")
    spsa = spsa or SpsaConfig()
    cells = [(L, M, r) for L in L_values for M in M_values for r in range(n_repeats)]
    return Parallel(n_jobs=n_jobs)(
        delayed(_gap_cell)(n_qubits, int(L), int(M), r, spsa, n_test, loss, seed)
        for L, M, r in cells
    )
