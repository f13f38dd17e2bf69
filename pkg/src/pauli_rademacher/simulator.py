"""Expectation values ``f(x; theta) = <psi(x)| U^dag O U |psi(x)>``.

``U = exp(-i theta_L G_L) ... exp(-i theta_1 G_1)``: the gate with generator
``G_1`` acts on the input state first. The input state is the product state
``RY(x)^{(x)n} |0...0>``.

Two evaluation routes are provided. :func:`evaluate` and :func:`gradient`
run a dense state-vector simulation. :class:`HeisenbergPropagator` pushes the
observable back through the circuit in the Pauli basis, which makes the
expectation a short sum of ``sin(x)^a cos(x)^b`` terms; the Rademacher
estimator and the SPSA trainer use it in their inner loops.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Sequence

import numpy as np

from .pauli import PauliString, apply_exp_pauli, apply_pauli, sample_pauli_string

__all__ = [
    "CircuitModel",
    "HeisenbergPropagator",
    "encode_input",
    "evaluate",
    "evaluate_batch",
    "gradient",
    "gradient_batch",
    "lipschitz_certificate",
    "ENCODINGS",
]

ENCODINGS = ("RY-product",)
IMAG_TOL = 1e-10
SHIFT = math.pi / 4


@dataclass(frozen=True)
class CircuitModel:
    """Generators, observable and input encoding of ``f(x; theta)``."""

    n_qubits: int
    generators: tuple[PauliString, ...]
    observable: PauliString
    encoding: str = "RY-product"

    def __post_init__(self):
        object.__setattr__(self, "generators", tuple(self.generators))
        if self.n_qubits < 1:
            raise ValueError(f"n_qubits must be >= 1, got {self.n_qubits}")
        if self.encoding not in ENCODINGS:
            raise ValueError(f"unknown encoding {self.encoding!r}; expected one of {ENCODINGS}")
        for p in (*self.generators, self.observable):
            if p.n_qubits != self.n_qubits:
                raise ValueError(
                    f"Pauli string {p.label} has {p.n_qubits} qubits, model has {self.n_qubits}"
                )
        for j, g in enumerate(self.generators):
            if g.is_identity:
                raise ValueError(f"generator {j} is the all-identity string")

    @property
    def L(self) -> int:
        return len(self.generators)

    @classmethod
    def from_labels(cls, generators: Sequence[str], observable: str,
                    encoding: str = "RY-product") -> CircuitModel:
        obs = PauliString.from_label(observable)
        gens = tuple(PauliString.from_label(g) for g in generators)
        return cls(obs.n_qubits, gens, obs, encoding)

    @classmethod
    def random(cls, n_qubits: int, L: int, rng: np.random.Generator,
               observable: PauliString | None = None) -> CircuitModel:
        """``L`` generators drawn uniformly from non-identity strings.

        The observable defaults to ``Z`` on qubit 0.
        """
        if L < 0:
            raise ValueError(f"L must be >= 0, got {L}")
        if observable is None:
            observable = PauliString.single(n_qubits, 0, "Z")
        gens = tuple(sample_pauli_string(n_qubits, rng) for _ in range(L))
        return cls(n_qubits, gens, observable)

    def to_dict(self) -> dict:
        return {
            "n_qubits": self.n_qubits,
            "observable": self.observable.label,
            "generators": [g.label for g in self.generators],
            "encoding": self.encoding,
        }

    @classmethod
    def from_dict(cls, d: dict) -> CircuitModel:
        model = cls.from_labels(d["generators"], d["observable"], d.get("encoding", "RY-product"))
        if "n_qubits" in d and int(d["n_qubits"]) != model.n_qubits:
            raise ValueError(
                f"n_qubits={d['n_qubits']} disagrees with observable length {model.n_qubits}"
            )
        return model

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")

    @classmethod
    def load(cls, path) -> CircuitModel:
        return cls.from_dict(json.loads(Path(path).read_text()))

    @cached_property
    def propagator(self) -> HeisenbergPropagator:
        return HeisenbergPropagator(self)


def encode_input(m: CircuitModel, x) -> np.ndarray:
    """``RY(x)^{(x)n}|0...0>``; vectorised over an array of inputs.

    Amplitude of basis index ``b`` is ``cos(x/2)^(n-w) sin(x/2)^w`` with
    ``w`` the Hamming weight of ``b``.
    """
    x = np.asarray(x, dtype=float)
    n = m.n_qubits
    weights = np.array([bin(b).count("1") for b in range(1 << n)])
    c = np.cos(x / 2)[..., None]
    s = np.sin(x / 2)[..., None]
    return (c ** (n - weights) * s ** weights).astype(complex)


def _check_theta(m: CircuitModel, theta) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    if theta.ndim == 0 or theta.shape[-1] != m.L:
        got = theta.shape[-1] if theta.ndim else "scalar"
        raise ValueError(f"theta has length {got}, model has L={m.L}")
    return theta


def _expectations(m: CircuitModel, states: np.ndarray, thetas: np.ndarray) -> np.ndarray:
    for j, g in enumerate(m.generators):
        states = apply_exp_pauli(g, thetas[..., j], states)
    values = np.sum(states.conj() * apply_pauli(m.observable, states), axis=-1)
    worst = float(np.max(np.abs(values.imag), initial=0.0))
    if worst > IMAG_TOL:
        raise AssertionError(f"expectation has imaginary part {worst:.3e}")
    return values.real


def evaluate(m: CircuitModel, x: float, theta) -> float:
    """``f(x; theta)`` by state-vector simulation."""
    theta = _check_theta(m, theta)
    if theta.ndim != 1:
        raise ValueError("evaluate takes a single parameter vector; use evaluate_batch")
    return float(_expectations(m, encode_input(m, x), theta))


def evaluate_batch(m: CircuitModel, xs, thetas) -> np.ndarray:
    """State-vector ``f`` with ``xs`` and ``thetas[..., :]`` broadcast together."""
    thetas = _check_theta(m, thetas)
    states = encode_input(m, xs)
    shape = np.broadcast_shapes(states.shape[:-1], thetas.shape[:-1])
    states = np.broadcast_to(states, shape + states.shape[-1:])
    thetas = np.broadcast_to(thetas, shape + (m.L,))
    return _expectations(m, states, thetas)


def gradient_batch(m: CircuitModel, xs, thetas) -> np.ndarray:
    """Exact gradients ``d f / d theta`` for broadcast ``xs`` and ``thetas``.

    Each ``f`` is ``a + b cos(2 theta_j) + c sin(2 theta_j)`` in every
    coordinate, so ``f(theta + pi/4 e_j) - f(theta - pi/4 e_j)`` is the
    derivative exactly.
    """
    thetas = _check_theta(m, thetas)
    L = m.L
    xs = np.asarray(xs, dtype=float)
    shape = np.broadcast_shapes(xs.shape, thetas.shape[:-1])
    if L == 0:
        return np.zeros(shape + (0,))
    shifts = np.concatenate([SHIFT * np.eye(L), -SHIFT * np.eye(L)])  # (2L, L)
    shifted = np.broadcast_to(thetas, shape + (L,))[..., None, :] + shifts
    values = evaluate_batch(m, np.broadcast_to(xs, shape)[..., None], shifted)
    return values[..., :L] - values[..., L:]


def gradient(m: CircuitModel, x: float, theta) -> np.ndarray:
    theta = _check_theta(m, theta)
    if theta.ndim != 1:
        raise ValueError("gradient takes a single parameter vector; use gradient_batch")
    return gradient_batch(m, x, theta)


def lipschitz_certificate(m: CircuitModel, n_samples: int, rng: np.random.Generator,
                          chunk: int = 512) -> float:
    """Largest sampled ``||grad_theta f||_2`` over random ``(x, theta)``.

    Draw order, per chunk of up to ``chunk`` samples: the ``x`` values from
    ``Uniform(0, 2 pi)``, then the ``theta`` block from ``Uniform(0, 2 pi)``.
    Raises ``AssertionError`` if any partial derivative exceeds 2 or the norm
    exceeds ``2 sqrt(L)``.
    """
    if n_samples < 1:
        raise ValueError(f"n_samples must be >= 1, got {n_samples}")
    if m.L == 0:
        return 0.0
    best = 0.0
    done = 0
    while done < n_samples:
        b = min(chunk, n_samples - done)
        xs = rng.uniform(0.0, 2 * math.pi, size=b)
        thetas = rng.uniform(0.0, 2 * math.pi, size=(b, m.L))
        grads = gradient_batch(m, xs, thetas)
        worst = float(np.max(np.abs(grads)))
        if worst > 2 + 1e-8:
            raise AssertionError(f"partial derivative {worst} exceeds 2")
        best = max(best, float(np.max(np.linalg.norm(grads, axis=-1))))
        done += b
    if best > 2 * math.sqrt(m.L) + 1e-8:
        raise AssertionError(f"gradient norm {best} exceeds 2*sqrt(L)")
    return best


@dataclass
class _GateStep:
    rows: np.ndarray       # strings rotated by this gate
    partners: np.ndarray   # index of i*G*P (up to sign) for each row
    signs: np.ndarray      # c_new[row] += sin(2 theta) * sign * c[partner]


@dataclass
class HeisenbergPropagator:
    """Observable ``U^dag O U`` expanded in the Pauli basis.

    Conjugating a Pauli string ``P`` by ``exp(-i theta G)`` leaves it alone
    when ``[P, G] = 0`` and otherwise gives
    ``cos(2 theta) P + sin(2 theta) (i G P)``. Starting from ``O`` and walking
    the gates from last to first, the reachable strings are fixed by the
    generators alone, so the index tables are built once per model and only
    real coefficients move for each ``theta``.

    Only strings without ``Y`` factors survive the expectation in the
    ``RY``-product state: ``<X> = sin x``, ``<Z> = cos x``, ``<Y> = 0``.
    """

    model: CircuitModel
    strings: list[PauliString] = field(init=False)
    steps: list[_GateStep] = field(init=False)

    def __post_init__(self):
        m = self.model
        self.strings = [m.observable]
        index = {(m.observable.x_mask, m.observable.z_mask): 0}
        steps: list[_GateStep | None] = [None] * m.L
        for j in range(m.L - 1, -1, -1):
            g = m.generators[j]
            for p in list(self.strings):
                if not g.commutes_with(p):
                    _, q = g.multiply(p)
                    key = (q.x_mask, q.z_mask)
                    if key not in index:
                        index[key] = len(self.strings)
                        self.strings.append(q)
            rows, partners, signs = [], [], []
            for a, p in enumerate(self.strings):
                if g.commutes_with(p):
                    continue
                _, q = g.multiply(p)
                b = index[(q.x_mask, q.z_mask)]
                # i G q = sign * p
                k, r = g.multiply(q)
                assert r == p and (k + 1) % 2 == 0
                rows.append(a)
                partners.append(b)
                signs.append(1.0 if (k + 1) % 4 == 0 else -1.0)
            steps[j] = _GateStep(np.array(rows, dtype=np.intp),
                                 np.array(partners, dtype=np.intp),
                                 np.array(signs))
        self.steps = steps
        n = m.n_qubits
        yfree = [i for i, p in enumerate(self.strings) if p.n_y == 0]
        self.yfree = np.array(yfree, dtype=np.intp)
        full = (1 << n) - 1
        self._n_sin = np.array([bin(self.strings[i].x_mask).count("1") for i in yfree])
        self._n_cos = np.array([bin(self.strings[i].z_mask & full).count("1") for i in yfree])

    @property
    def n_terms(self) -> int:
        return len(self.strings)

    def coefficients(self, thetas) -> np.ndarray:
        """Y-free Pauli coefficients of ``U^dag O U``, shape ``(len(yfree), B)``.

        ``thetas`` has shape ``(B, L)``.
        """
        thetas = _check_theta(self.model, thetas)
        if thetas.ndim != 2:
            raise ValueError("thetas must have shape (B, L)")
        c = np.zeros((self.n_terms, thetas.shape[0]))
        c[0] = 1.0
        if self.model.L:
            cos2 = np.cos(2 * thetas).T
            sin2 = np.sin(2 * thetas).T
        for j in range(self.model.L - 1, -1, -1):
            st = self.steps[j]
            if st.rows.size == 0:
                continue
            rotated = c[st.partners] * st.signs[:, None]
            rotated *= sin2[j]
            c[st.rows] *= cos2[j]
            c[st.rows] += rotated
        return c[self.yfree]

    def features(self, xs) -> np.ndarray:
        """``<psi(x)|P|psi(x)>`` for each Y-free string, shape ``(N, len(yfree))``."""
        xs = np.asarray(xs, dtype=float).reshape(-1, 1)
        return np.sin(xs) ** self._n_sin * np.cos(xs) ** self._n_cos

    def values(self, xs, thetas) -> np.ndarray:
        """``f(x_i; theta_b)`` as an array of shape ``(B, N)``."""
        return self.coefficients(np.atleast_2d(thetas)).T @ self.features(xs).T
