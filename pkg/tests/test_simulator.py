import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from pauli_rademacher.pauli import PauliString, dense_matrix
from pauli_rademacher.simulator import (
    CircuitModel,
    encode_input,
    evaluate,
    evaluate_batch,
    gradient,
    gradient_batch,
    lipschitz_certificate,
)

RY = lambda x: np.array([[math.cos(x / 2), -math.sin(x / 2)], [math.sin(x / 2), math.cos(x / 2)]])


def dense_f(m: CircuitModel, x, theta):
    """Independent oracle: dense unitaries from scipy.linalg.expm."""
    psi = np.array([1.0])
    for _ in range(m.n_qubits):
        psi = np.kron(psi, RY(x) @ np.array([1.0, 0.0]))
    U = np.eye(1 << m.n_qubits, dtype=complex)
    for g, t in zip(m.generators, theta):
        U = expm(-1j * t * dense_matrix(g)) @ U
    return float(np.real(psi.conj() @ U.conj().T @ dense_matrix(m.observable) @ U @ psi))


def finite_diff(m, x, theta, h=1e-5):
    out = np.zeros(m.L)
    for j in range(m.L):
        e = np.zeros(m.L)
        e[j] = h
        out[j] = (evaluate(m, x, theta + e) - evaluate(m, x, theta - e)) / (2 * h)
    return out


def random_model(rng, n, L):
    return CircuitModel.random(n, L, rng, observable=PauliString.single(n, int(rng.integers(n)), "XYZ"[int(rng.integers(3))]))


def test_encode_input_examples():
    m = CircuitModel.from_labels([], "ZII")
    np.testing.assert_allclose(encode_input(m, 0.0), np.eye(8)[0], atol=1e-15)
    np.testing.assert_allclose(encode_input(m, math.pi), np.eye(8)[7], atol=1e-15)
    m1 = CircuitModel.from_labels([], "Z")
    np.testing.assert_allclose(encode_input(m1, math.pi / 2), [2**-0.5, 2**-0.5])


def test_encode_input_unit_norm_batch():
    m = CircuitModel.from_labels([], "ZIIII")
    states = encode_input(m, np.linspace(0, 2 * math.pi, 11))
    np.testing.assert_allclose(np.linalg.norm(states, axis=-1), 1.0)


def test_evaluate_empty_circuit():
    m = CircuitModel.from_labels([], "ZII")
    assert evaluate(m, 0.0, []) == pytest.approx(1.0)


def test_zero_theta_gives_cos():
    rng = np.random.default_rng(1)
    m = CircuitModel.random(4, 6, rng)
    for x in rng.uniform(0, 2 * math.pi, 10):
        assert evaluate(m, x, np.zeros(6)) == pytest.approx(math.cos(x), abs=1e-10)


def test_theta_length_mismatch():
    m = CircuitModel.from_labels(["XY", "ZZ"], "ZI")
    with pytest.raises(ValueError):
        evaluate(m, 0.1, [0.1])
    with pytest.raises(ValueError):
        gradient(m, 0.1, [0.1, 0.2, 0.3])


def test_model_validation():
    with pytest.raises(ValueError):
        CircuitModel.from_labels(["II"], "ZI")
    with pytest.raises(ValueError):
        CircuitModel.from_labels(["XYZ"], "ZI")
    with pytest.raises(ValueError):
        CircuitModel.from_labels(["X"], "Z", encoding="amplitude")


def test_model_serialization_roundtrip(tmp_path):
    m = CircuitModel.from_labels(["XYZII", "IIZZX"], "ZIIII")
    path = tmp_path / "model.json"
    m.save(path)
    assert CircuitModel.load(path) == m
    assert m.to_dict() == {"n_qubits": 5, "observable": "ZIIII",
                           "generators": ["XYZII", "IIZZX"], "encoding": "RY-product"}


def test_evaluate_matches_dense_oracle():
    rng = np.random.default_rng(7)
    for _ in range(100):
        n, L = int(rng.integers(1, 4)), int(rng.integers(0, 7))
        m = random_model(rng, n, L)
        x = rng.uniform(0, 2 * math.pi)
        theta = rng.uniform(0, 2 * math.pi, L)
        assert evaluate(m, x, theta) == pytest.approx(dense_f(m, x, theta), abs=1e-10)


def test_propagator_matches_state_vector():
    rng = np.random.default_rng(8)
    for _ in range(50):
        n, L = int(rng.integers(1, 6)), int(rng.integers(0, 12))
        m = random_model(rng, n, L)
        xs = rng.uniform(0, 2 * math.pi, 9)
        thetas = rng.uniform(0, 2 * math.pi, (4, L))
        sv = evaluate_batch(m, xs[None, :], thetas[:, None, :])
        np.testing.assert_allclose(m.propagator.values(xs, thetas), sv, atol=1e-12)


def test_gradient_matches_finite_differences():
    rng = np.random.default_rng(9)
    for _ in range(50):
        n, L = int(rng.integers(1, 5)), int(rng.integers(1, 7))
        m = random_model(rng, n, L)
        x = rng.uniform(0, 2 * math.pi)
        theta = rng.uniform(0, 2 * math.pi, L)
        np.testing.assert_allclose(gradient(m, x, theta), finite_diff(m, x, theta), atol=1e-6)


def test_gradient_empty_and_commuting():
    assert gradient(CircuitModel.from_labels([], "ZI"), 0.3, []).shape == (0,)
    m = CircuitModel.from_labels(["ZII"], "ZII")
    np.testing.assert_allclose(gradient(m, 0.7, [1.1]), [0.0], atol=1e-10)


def test_gradient_batch_matches_single():
    rng = np.random.default_rng(10)
    m = CircuitModel.random(3, 4, rng)
    xs = rng.uniform(0, 6, 5)
    th = rng.uniform(0, 6, (5, 4))
    batch = gradient_batch(m, xs, th)
    for k in range(5):
        np.testing.assert_allclose(batch[k], gradient(m, xs[k], th[k]), atol=1e-14)


def test_lipschitz_certificate_examples():
    rng = np.random.default_rng(11)
    m1 = CircuitModel.random(3, 1, rng)
    assert lipschitz_certificate(m1, 500, np.random.default_rng(0)) <= 2 + 1e-8
    m0 = CircuitModel.random(3, 0, rng)
    assert lipschitz_certificate(m0, 10, np.random.default_rng(0)) == 0.0
    with pytest.raises(ValueError):
        lipschitz_certificate(m1, 0, rng)


def test_lipschitz_certificate_replay_against_finite_differences():
    m = CircuitModel.random(2, 3, np.random.default_rng(12))
    cert = lipschitz_certificate(m, 1000, np.random.default_rng(99), chunk=1000)
    replay = np.random.default_rng(99)
    xs = replay.uniform(0, 2 * math.pi, 1000)
    thetas = replay.uniform(0, 2 * math.pi, (1000, 3))
    fd = max(np.linalg.norm(finite_diff(m, x, t)) for x, t in zip(xs, thetas))
    assert cert == pytest.approx(fd, abs=1e-6)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 4), st.integers(0, 6), st.integers(0, 2**32 - 1))
def test_bounded_and_pi_periodic(n, L, seed):
    rng = np.random.default_rng(seed)
    m = random_model(rng, n, L)
    x = rng.uniform(0, 2 * math.pi)
    theta = rng.uniform(0, 2 * math.pi, L)
    f = evaluate(m, x, theta)
    assert abs(f) <= 1 + 1e-10
    for j in range(L):
        shifted = theta.copy()
        shifted[j] += math.pi
        assert evaluate(m, x, shifted) == pytest.approx(f, abs=1e-10)
    if L:
        assert np.linalg.norm(gradient(m, x, theta)) <= 2 * math.sqrt(L) + 1e-8
