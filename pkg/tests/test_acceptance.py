"""Acceptance suite: one test per criterion, each also recorded as a PASS/FAIL line.

The desk-scale experiments run once per session at one worker; criterion 10
reruns them at eight workers and compares the CSV bytes.
"""
import math
import time
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from pauli_rademacher import pauli
from pauli_rademacher.analysis import loglog_fit, ols_fit, t_two_sided_p
from pauli_rademacher.bounds import (
    BoundInputs,
    Domain,
    LinearModelInputs,
    gap_bound,
    linear_model_bound,
    lipschitz_bound,
    raw_rademacher_bound,
    rademacher_bound,
)
from pauli_rademacher.experiments import ExperimentSpec, run
from pauli_rademacher.rademacher import EstimatorConfig, enumerate_sigma, estimate
from pauli_rademacher.simulator import CircuitModel, evaluate, gradient, lipschitz_certificate

SEED = 0
DESK_KINDS = ("scaling-m", "scaling-l", "convergence", "gap")


@pytest.fixture(scope="module")
def desk(tmp_path_factory):
    """Desk-preset results at one worker, with the CSV bytes of every output file."""
    out = {}
    for kind in DESK_KINDS:
        start = time.perf_counter()
        result = run(ExperimentSpec(kind, "desk", seed=SEED), n_jobs=1)
        paths = result.write(tmp_path_factory.mktemp(kind.replace("-", "_")))
        files = {k: p.read_bytes() for k, p in paths.items() if k != "manifest"}
        out[kind] = (result, files, time.perf_counter() - start)
    return out


# 1 -------------------------------------------------------------------------

def _dense_f(m, x, theta):
    c, s = math.cos(x / 2), math.sin(x / 2)
    psi = np.array([1.0 + 0j])
    for _ in range(m.n_qubits):
        psi = np.kron(psi, [c, s])
    U = np.eye(1 << m.n_qubits, dtype=complex)
    for g, t in zip(m.generators, theta):
        U = expm(-1j * t * pauli.dense_matrix(g)) @ U
    return float(np.real(psi.conj() @ U.conj().T @ pauli.dense_matrix(m.observable) @ U @ psi))


_worst = {"evaluate": 0.0, "exp": 0.0, "cases": 0}


@settings(max_examples=100, deadline=None, derandomize=True,
          suppress_health_check=[HealthCheck.function_scoped_fixture])
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 3), L=st.integers(0, 6),
       x=st.floats(0, 2 * math.pi), t=st.floats(-2 * math.pi, 2 * math.pi))
def _oracle_instance(seed, n, L, x, t):
    rng = np.random.default_rng(seed)
    m = CircuitModel.random(n, L, rng)
    theta = rng.uniform(0, 2 * math.pi, L)
    dev = abs(evaluate(m, x, theta) - _dense_f(m, x, theta))
    p = pauli.sample_pauli_string(n, rng)
    s = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    s /= np.linalg.norm(s)
    dev_exp = np.max(np.abs(pauli.apply_exp_pauli(p, t, s) - expm(-1j * t * pauli.dense_matrix(p)) @ s))
    _worst["evaluate"] = max(_worst["evaluate"], dev)
    _worst["exp"] = max(_worst["exp"], float(dev_exp))
    _worst["cases"] += 1
    assert dev <= 1e-10 and dev_exp <= 1e-10


def test_criterion_01_oracle_equivalence(acceptance):
    start = time.perf_counter()
    try:
        _oracle_instance()
        ok = True
    except AssertionError:
        ok = False
    elapsed = time.perf_counter() - start
    ok = ok and elapsed < 10
    assert acceptance(1, "oracle equivalence", ok,
                      f"{_worst['cases']} instances, evaluate dev {_worst['evaluate']:.1e}, "
                      f"exp dev {_worst['exp']:.1e}, {elapsed:.1f} s")


# 2 -------------------------------------------------------------------------

def test_criterion_02_lipschitz_certification(acceptance):
    start = time.perf_counter()
    details, ok = [], True
    for L in (1, 4, 9, 16):
        rng = np.random.default_rng(1000 + L)
        worst = 0.0
        for _ in range(100):  # 100 models x 100 (x, theta) draws = 1e4 samples per L
            m = CircuitModel.random(5, L, rng)
            try:
                worst = max(worst, lipschitz_certificate(m, 100, rng, chunk=100))
            except AssertionError as exc:
                ok = False
                details.append(f"L={L}: {exc}")
                break
        details.append(f"L={L} max |grad| {worst:.4f} <= {2 * math.sqrt(L):.4f}")
    elapsed = time.perf_counter() - start
    ok = ok and elapsed < 120
    assert acceptance(2, "Lipschitz certification", ok, "; ".join(details) + f"; {elapsed:.1f} s")


# 3 -------------------------------------------------------------------------

def test_criterion_03_gradient_vs_finite_differences(acceptance):
    start = time.perf_counter()
    rng = np.random.default_rng(3)
    h, worst = 1e-5, 0.0
    for _ in range(50):
        n, L = int(rng.integers(1, 6)), int(rng.integers(1, 9))
        m = CircuitModel.random(n, L, rng)
        x = rng.uniform(0, 2 * math.pi)
        theta = rng.uniform(0, 2 * math.pi, L)
        g = gradient(m, x, theta)
        for j in range(L):
            e = np.zeros(L)
            e[j] = h
            fd = (evaluate(m, x, theta + e) - evaluate(m, x, theta - e)) / (2 * h)
            worst = max(worst, abs(g[j] - fd))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-6 and elapsed < 30
    assert acceptance(3, "gradient correctness", ok, f"max dev {worst:.1e}, {elapsed:.1f} s")


# 4 -------------------------------------------------------------------------

def test_criterion_04_exact_sigma_agreement(acceptance):
    start = time.perf_counter()
    rng = np.random.default_rng(4)
    zs = []
    for i in range(10):
        n, L = int(rng.integers(1, 5)), int(rng.integers(1, 6))
        N, K = int(rng.integers(2, 11)), int(rng.integers(2, 17))
        m = CircuitModel.random(n, L, rng)
        xs = rng.uniform(0, 2 * math.pi, N)
        thetas = rng.uniform(0, 2 * math.pi, (K, L))
        cfg = EstimatorConfig(n_trials=20000, n_data=N, n_theta=K, L=L, n_qubits=n, seed=40 + i)
        exact = enumerate_sigma(cfg, m, thetas, xs)
        mc = estimate(cfg, m, x_set=xs, theta_set=thetas)
        zs.append(abs(mc.g_ave - exact) / mc.g_err)
    elapsed = time.perf_counter() - start
    ok = max(zs) <= 3 and elapsed < 300
    assert acceptance(4, "exact-sigma agreement", ok,
                      f"max |z| {max(zs):.2f} over 10 configs, {elapsed:.1f} s")


# 5 -------------------------------------------------------------------------

def test_criterion_05_null_cases(acceptance):
    start = time.perf_counter()
    single = estimate(EstimatorConfig(n_trials=4000, n_data=50, n_theta=1, L=5, n_qubits=5, seed=5))
    shallow = estimate(EstimatorConfig(n_trials=4000, n_data=50, n_theta=100, L=0, n_qubits=5, seed=6))
    elapsed = time.perf_counter() - start
    ok = (abs(single.g_ave) <= 3 * single.g_err and abs(shallow.g_ave) <= 3 * shallow.g_err
          and elapsed < 60)
    assert acceptance(5, "null cases", ok,
                      f"N_theta=1: {single.g_ave:+.5f} +- {single.g_err:.5f}; "
                      f"L=0: {shallow.g_ave:+.5f} +- {shallow.g_err:.5f}; {elapsed:.1f} s")


# 6 -------------------------------------------------------------------------

def test_criterion_06_m_scaling(acceptance, desk):
    result, _, elapsed = desk["scaling-m"]
    fit = result.fits.get("M")
    ok = fit is not None and -0.65 <= fit.slope <= -0.35 and fit.p_value < 0.05 and elapsed < 1800
    detail = f"slope {fit.slope:.4f}, p {fit.p_value:.2e}" if fit else "no fit"
    assert acceptance(6, "M-scaling", ok, f"{detail}, {elapsed:.1f} s")


# 7 -------------------------------------------------------------------------

def test_criterion_07_l_scaling_ordering(acceptance, desk):
    result, _, elapsed = desk["scaling-l"]
    g = {(r[0], r[1]): r[5] for r in result.rows}
    Ls = sorted({r[0] for r in result.rows})
    a = all(g[(L, "restricted")] < g[(L, "full")] for L in Ls)
    full, restricted = result.fits.get("full"), result.fits.get("restricted")
    b = bool(full and restricted and full.slope > restricted.slope)
    c = bool(full and restricted and full.slope > 0 and restricted.slope > 0)
    slopes = (f"full slope {full.slope:.4f}, restricted slope {restricted.slope:.4f}"
              if full and restricted else "missing fit")
    ok = a and b and c and elapsed < 2700
    assert acceptance(7, "L-scaling ordering", ok,
                      f"(a) {a} (b) {b} (c) {c}; {slopes}; {elapsed:.1f} s")


# 8 -------------------------------------------------------------------------

C = 72 * math.pi**1.5  # 18 sqrt(pi) * 2 sqrt(L) * 2 pi sqrt(L) * sqrt(L) = C L^{3/2}


def test_criterion_08_bound_calculators(acceptance):
    start = time.perf_counter()
    cases = []
    for L, M in [(1, 10), (1, 10**6), (2, 50), (4, 10**7), (5, 10), (9, 10**9),
                 (16, 10**4), (20, 200), (3, 10**8), (7, 10**10)]:
        full = min(1.0, C * L**1.5 / math.sqrt(M))
        restricted = min(1.0, C * L / math.sqrt(M))
        cases.append((rademacher_bound(BoundInputs(L, M)), full))
        cases.append((rademacher_bound(BoundInputs(L, M, Domain.RESTRICTED)), restricted))
    for L in (1, 4, 9, 16, 25):
        cases.append((lipschitz_bound(L), 2 * math.sqrt(L)))
    for D, B, M, p, ref in [(1, 1, 4, 1, 0.5), (3, 2, 9, 3, 2.0), (5, 5, 25, 5, 5.0)]:
        cases.append((linear_model_bound(LinearModelInputs(D, B, M, p))[0], ref))
    for R, M, delta in [(0.1, 100, 0.05), (0.0, 1, 0.5)]:
        cases.append((gap_bound(R, M, delta), 2 * R + math.sqrt(math.log(1 / delta) / (2 * M))))
    worst = max(abs(a - b) for a, b in cases)
    regimes = [linear_model_bound(LinearModelInputs(D, B, 100, p))[1]
               for D, B, p in [(1, 1, 4), (4, 1, 4), (4, 4, 4)]]
    clamp = rademacher_bound(BoundInputs(16, 10)) == 1.0 and raw_rademacher_bound(BoundInputs(16, 10)) > 1
    ratios = []
    for L in (2, 4, 9, 16):
        ratios.append(raw_rademacher_bound(BoundInputs(L, 100)) / raw_rademacher_bound(BoundInputs(1, 100)) - L**1.5)
        ratios.append(raw_rademacher_bound(BoundInputs(L, 100, Domain.RESTRICTED))
                      / raw_rademacher_bound(BoundInputs(1, 100, Domain.RESTRICTED)) - L)
    ratio_dev = max(abs(r) for r in ratios)
    elapsed = time.perf_counter() - start
    ok = (len(cases) >= 20 and worst <= 1e-9 and clamp and ratio_dev <= 1e-9
          and regimes == ["1/sqrt(M)", "p/sqrt(M)", "p^2/sqrt(M)"] and elapsed < 1)
    assert acceptance(8, "bound calculators", ok,
                      f"{len(cases)} references max dev {worst:.1e}, clamp {clamp}, "
                      f"ratio dev {ratio_dev:.1e}, {elapsed * 1000:.1f} ms")


# 9 -------------------------------------------------------------------------

def test_criterion_09_gap_trend(acceptance, desk):
    result, _, elapsed = desk["gap"]
    medians = {(r[0], r[1]): r[3] for r in result.summary_rows}
    ok = medians[(5, 100)] < medians[(5, 25)] and elapsed < 1800
    assert acceptance(9, "generalization-gap trend", ok,
                      f"median gap M=25 {medians[(5, 25)]:.3e}, M=100 {medians[(5, 100)]:.3e}, "
                      f"{elapsed:.1f} s")


# 10 ------------------------------------------------------------------------

def test_criterion_10_determinism(acceptance, desk, tmp_path):
    mismatched = []
    for kind in DESK_KINDS:
        for n_jobs in (1, 8):
            result = run(ExperimentSpec(kind, "desk", seed=SEED), n_jobs=n_jobs)
            paths = result.write(tmp_path / f"{kind}_{n_jobs}")
            files = {k: p.read_bytes() for k, p in paths.items() if k != "manifest"}
            if files != desk[kind][1]:
                mismatched.append(f"{kind}@{n_jobs}")
    ok = not mismatched
    assert acceptance(10, "determinism", ok,
                      "all CSVs bit-identical at 1 and 8 workers" if ok else f"differ: {mismatched}")


# 11 ------------------------------------------------------------------------

def test_criterion_11_regression(acceptance):
    start = time.perf_counter()
    rng = np.random.default_rng(11)
    worst = 0.0
    for _ in range(20):
        n = int(rng.integers(3, 9))
        xs = [int(v) for v in rng.permutation(60)[:n] - 30]
        ys = [int(v) for v in rng.integers(-100, 100, n)]
        fx, fy = [Fraction(v) for v in xs], [Fraction(v) for v in ys]
        mx, my = sum(fx) / n, sum(fy) / n
        sxx = sum((a - mx) ** 2 for a in fx)
        slope = sum((a - mx) * (b - my) for a, b in zip(fx, fy)) / sxx
        intercept = my - slope * mx
        r = ols_fit(xs, ys)
        worst = max(worst, abs(r.slope - float(slope)), abs(r.intercept - float(intercept)))
    power = max(abs(loglog_fit(xs_, 2.5 * np.asarray(xs_, float) ** k).slope - k)
                for xs_, k in [([10, 100, 200, 400, 800], -0.5), ([4, 8, 12, 16, 20], 1.5),
                               ([1, 2, 3], 1.0)])
    tail = 0.0
    for t, df in [(0.7, 3), (2.0, 8), (3.1, 2)]:
        draws = rng.standard_t(df, size=10**6)
        tail = max(tail, abs(t_two_sided_p(t, df) - np.mean(np.abs(draws) >= t)))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-9 and power <= 1e-12 and tail <= 2e-3 and elapsed < 60
    assert acceptance(11, "regression module", ok,
                      f"OLS dev {worst:.1e}, power-law dev {power:.1e}, t-tail dev {tail:.1e}, "
                      f"{elapsed:.1f} s")
