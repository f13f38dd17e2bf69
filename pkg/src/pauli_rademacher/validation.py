"""Input validation shared by the estimators."""
import numpy as np
from sklearn.utils.validation import check_array


def check_inputs(X) -> np.ndarray:
    """Scalar-feature inputs as a 1-D float array.

    Accepts shape ``(n,)`` or ``(n, 1)``; the circuit encodes one real angle.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    X = check_array(X, dtype=float, ensure_2d=True)
    if X.shape[1] != 1:
        raise ValueError(f"expected a single input feature, got {X.shape[1]}")
    return X[:, 0]


def check_theta_set(thetas, L: int) -> np.ndarray:
    """Parameter vectors as a ``(k, L)`` float array."""
    thetas = np.asarray(thetas, dtype=float)
    if thetas.ndim == 1 and L > 0 and thetas.size == L:
        thetas = thetas[None, :]
    if thetas.ndim != 2 or thetas.shape[1] != L:
        raise ValueError(f"theta set must have shape (k, {L}), got {thetas.shape}")
    if not np.all(np.isfinite(thetas)):
        raise ValueError("theta set contains non-finite values")
    return thetas
