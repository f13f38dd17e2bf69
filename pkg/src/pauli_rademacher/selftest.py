"""Quick oracle checks run by ``pauli-rademacher selftest``.

Each check compares a production path with an independent brute-force
computation on small random instances and returns ``(name, passed, detail)``.
"""
from __future__ import annotations

import itertools
import math
from fractions import Fraction

import numpy as np

from .analysis import ols_fit
from .pauli import apply_exp_pauli, apply_pauli, dense_matrix, sample_pauli_string
from .rademacher import EstimatorConfig, enumerate_sigma, estimate
from .simulator import CircuitModel, evaluate, gradient


def _random_state(rng, n):
    s = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    return s / np.linalg.norm(s)


def _dense_exp(p, theta):
    d = dense_matrix(p)
    return math.cos(theta) * np.eye(len(d)) - 1j * math.sin(theta) * d


def check_dense(seed: int = 0, cases: int = 100):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(cases):
        n = int(rng.integers(1, 4))
        p = sample_pauli_string(n, rng)
        s = _random_state(rng, n)
        theta = rng.uniform(-4, 4)
        worst = max(worst,
                    np.max(np.abs(apply_pauli(p, s) - dense_matrix(p) @ s)),
                    np.max(np.abs(apply_exp_pauli(p, theta, s) - _dense_exp(p, theta) @ s)))
    return "dense-matrix", worst <= 1e-10, f"max deviation {worst:.2e}"


def check_expectation(seed: int = 1, cases: int = 50):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(cases):
        n, L = int(rng.integers(1, 4)), int(rng.integers(0, 6))
        m = CircuitModel.random(n, L, rng)
        x = rng.uniform(0, 2 * math.pi)
        theta = rng.uniform(0, 2 * math.pi, L)
        c, s = math.cos(x / 2), math.sin(x / 2)
        psi = np.array([1.0])
        for _ in range(n):
            psi = np.kron(psi, [c, s])
        U = np.eye(1 << n)
        for g, t in zip(m.generators, theta):
            U = _dense_exp(g, t) @ U
        ref = np.real(psi @ U.conj().T @ dense_matrix(m.observable) @ U @ psi)
        worst = max(worst, abs(evaluate(m, x, theta) - ref),
                    abs(m.propagator.values([x], theta[None, :])[0, 0] - ref))
    return "expectation", worst <= 1e-10, f"max deviation {worst:.2e}"


def check_gradient(seed: int = 2, cases: int = 50, h: float = 1e-5):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(cases):
        n, L = int(rng.integers(1, 5)), int(rng.integers(1, 7))
        m = CircuitModel.random(n, L, rng)
        x = rng.uniform(0, 2 * math.pi)
        theta = rng.uniform(0, 2 * math.pi, L)
        g = gradient(m, x, theta)
        for j in range(L):
            e = np.zeros(L)
            e[j] = h
            fd = (evaluate(m, x, theta + e) - evaluate(m, x, theta - e)) / (2 * h)
            worst = max(worst, abs(g[j] - fd))
    return "gradient", worst <= 1e-6, f"max deviation {worst:.2e}"


def check_exact_sigma(seed: int = 3, n_trials: int = 20000):
    rng = np.random.default_rng(seed)
    m = CircuitModel.random(3, 3, rng)
    xs = rng.uniform(0, 2 * math.pi, 4)
    thetas = rng.uniform(0, 2 * math.pi, (6, 3))
    cfg = EstimatorConfig(n_trials=n_trials, n_data=4, n_theta=6, L=3, n_qubits=3, seed=seed)
    exact = enumerate_sigma(cfg, m, thetas, xs)
    # independent enumeration over sign tuples
    f = m.propagator.values(xs, thetas)
    brute = np.mean([np.max(f @ np.array(s)) / 4 for s in itertools.product((1, -1), repeat=4)])
    mc = estimate(cfg, m, x_set=xs, theta_set=thetas)
    ok = abs(exact - brute) <= 1e-12 and abs(mc.g_ave - exact) <= 3 * mc.g_err
    return "exact-sigma", ok, f"exact {exact:.6f}, monte carlo {mc.g_ave:.6f} +- {mc.g_err:.6f}"


def check_regression(seed: int = 4, cases: int = 10):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(cases):
        xs = [int(v) for v in rng.permutation(40)[:5]]
        ys = [int(v) for v in rng.integers(-30, 30, size=5)]
        fx = [Fraction(v) for v in xs]
        fy = [Fraction(v) for v in ys]
        mx, my = sum(fx) / 5, sum(fy) / 5
        slope = sum((a - mx) * (b - my) for a, b in zip(fx, fy)) / sum((a - mx) ** 2 for a in fx)
        r = ols_fit(xs, ys)
        worst = max(worst, abs(r.slope - float(slope)))
    return "regression", worst <= 1e-9, f"max slope deviation {worst:.2e}"


CHECKS = (check_dense, check_expectation, check_gradient, check_exact_sigma, check_regression)


def run_all():
    results = []
    for check in CHECKS:
        try:
            results.append(check())
        except Exception as exc:  # a broken kernel may trip an internal assertion
            name = check.__name__.removeprefix("check_").replace("_", "-")
            results.append((name, False, f"{type(exc).__name__}: {exc}"))
    return results
