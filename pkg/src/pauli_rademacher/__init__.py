"""Rademacher complexity of Pauli-generated parameterized circuits.

State-vector and Pauli-propagation simulators, the random-search complexity
estimator, closed-form bounds, SPSA teacher-student training and the
scaling experiments built on them.
"""
__version__ = "0.1.0"

from .analysis import RegressionResult, loglog_fit, summarize
from .bounds import BoundInputs, Domain, LinearModelInputs, gap_bound, lipschitz_bound, rademacher_bound
from .exceptions import BudgetExceededError, InsufficientDataError, OracleSizeError
from .pauli import PauliString, apply_exp_pauli, apply_pauli, dense_matrix, sample_pauli_string
from .rademacher import (
    EstimatorConfig,
    RademacherEstimate,
    RademacherEstimator,
    enumerate_sigma,
    estimate,
    estimate_scaling_sweep,
)
from .simulator import CircuitModel, encode_input, evaluate, gradient, lipschitz_certificate
from .training import Dataset, PauliCircuitRegressor, SpsaConfig, TrainingRun, generate_dataset, spsa_fit

__all__ = [
    "BoundInputs",
    "BudgetExceededError",
    "CircuitModel",
    "Dataset",
    "Domain",
    "EstimatorConfig",
    "InsufficientDataError",
    "LinearModelInputs",
    "OracleSizeError",
    "PauliCircuitRegressor",
    "PauliString",
    "RademacherEstimate",
    "RademacherEstimator",
    "RegressionResult",
    "SpsaConfig",
    "TrainingRun",
    "apply_exp_pauli",
    "apply_pauli",
    "dense_matrix",
    "encode_input",
    "enumerate_sigma",
    "estimate",
    "estimate_scaling_sweep",
    "evaluate",
    "gap_bound",
    "generate_dataset",
    "gradient",
    "lipschitz_bound",
    "lipschitz_certificate",
    "loglog_fit",
    "rademacher_bound",
    "sample_pauli_string",
    "spsa_fit",
    "summarize",
]
