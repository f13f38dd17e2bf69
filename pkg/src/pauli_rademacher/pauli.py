"""Phase-exact n-qubit Pauli strings acting on dense state vectors.

Conventions
-----------
Qubit 0 is the leftmost tensor factor, i.e. the most significant bit of a
basis index. A Pauli string is stored as two bit masks; a ``Y`` factor sets
both bits and carries the phase convention ``Y = i X Z``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .exceptions import OracleSizeError

__all__ = [
    "PauliString",
    "apply_pauli",
    "apply_exp_pauli",
    "dense_matrix",
    "sample_pauli_string",
    "zero_state",
    "MAX_DENSE_QUBITS",
]

MAX_DENSE_QUBITS = 6

_SINGLE = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def _popcount(a):
    # vectorised popcount for non-negative integer arrays
    a = np.asarray(a, dtype=np.uint64)
    count = np.zeros(a.shape, dtype=np.int64)
    while np.any(a):
        count += (a & np.uint64(1)).astype(np.int64)
        a = a >> np.uint64(1)
    return count


@dataclass(frozen=True)
class PauliString:
    """An n-qubit Pauli string ``P = i^{#Y} X^x_mask Z^z_mask``.

    Parameters
    ----------
    n_qubits : int
        Number of qubits.
    x_mask, z_mask : int
        Bit masks of the bit-flip and phase parts. Bit ``n_qubits - 1 - q``
        belongs to qubit ``q``.
    """

    n_qubits: int
    x_mask: int
    z_mask: int

    def __post_init__(self):
        if self.n_qubits < 1:
            raise ValueError(f"n_qubits must be >= 1, got {self.n_qubits}")
        limit = 1 << self.n_qubits
        for name in ("x_mask", "z_mask"):
            value = getattr(self, name)
            if not 0 <= value < limit:
                raise ValueError(f"{name}={value} out of range for {self.n_qubits} qubits")

    @classmethod
    def from_label(cls, label: str) -> PauliString:
        """Parse a string such as ``"ZXIIY"`` (qubit 0 first)."""
        label = label.strip().upper()
        if not label or any(c not in "IXYZ" for c in label):
            raise ValueError(f"invalid Pauli label {label!r}")
        n = len(label)
        x = z = 0
        for q, c in enumerate(label):
            bit = 1 << (n - 1 - q)
            if c in "XY":
                x |= bit
            if c in "ZY":
                z |= bit
        return cls(n, x, z)

    @classmethod
    def single(cls, n_qubits: int, qubit: int, factor: str) -> PauliString:
        """``factor`` on ``qubit`` and identity elsewhere, e.g. ``Z(0)``."""
        if not 0 <= qubit < n_qubits:
            raise ValueError(f"qubit {qubit} out of range for {n_qubits} qubits")
        label = ["I"] * n_qubits
        label[qubit] = factor
        return cls.from_label("".join(label))

    @property
    def label(self) -> str:
        out = []
        for q in range(self.n_qubits):
            bit = 1 << (self.n_qubits - 1 - q)
            xb, zb = bool(self.x_mask & bit), bool(self.z_mask & bit)
            out.append("Y" if xb and zb else "X" if xb else "Z" if zb else "I")
        return "".join(out)

    def __str__(self) -> str:
        return self.label

    @property
    def dim(self) -> int:
        return 1 << self.n_qubits

    @property
    def n_y(self) -> int:
        return bin(self.x_mask & self.z_mask).count("1")

    @property
    def is_identity(self) -> bool:
        return self.x_mask == 0 and self.z_mask == 0

    def commutes_with(self, other: PauliString) -> bool:
        self._check_same_size(other)
        sym = bin(self.x_mask & other.z_mask).count("1") + bin(self.z_mask & other.x_mask).count("1")
        return sym % 2 == 0

    def multiply(self, other: PauliString) -> tuple[int, PauliString]:
        """Return ``(k, R)`` with ``self @ other == i**k * R``."""
        self._check_same_size(other)
        x = self.x_mask ^ other.x_mask
        z = self.z_mask ^ other.z_mask
        result = PauliString(self.n_qubits, x, z)
        # Z^z1 X^x2 = (-1)^{|z1 & x2|} X^x2 Z^z1
        k = self.n_y + other.n_y - result.n_y + 2 * bin(self.z_mask & other.x_mask).count("1")
        return k % 4, result

    def _check_same_size(self, other: PauliString):
        if other.n_qubits != self.n_qubits:
            raise ValueError(f"qubit count mismatch: {self.n_qubits} vs {other.n_qubits}")

    @cached_property
    def _action(self) -> tuple[np.ndarray, np.ndarray]:
        # out[c] = phase[c] * s[c ^ x_mask]
        idx = np.arange(self.dim, dtype=np.int64)
        src = idx ^ self.x_mask
        signs = 1 - 2 * (_popcount(src & self.z_mask) % 2)
        phase = (1j ** self.n_y) * signs.astype(complex)
        return src, phase


def _as_state(p: PauliString, s) -> np.ndarray:
    s = np.asarray(s, dtype=complex)
    if s.ndim == 0 or s.shape[-1] != p.dim:
        raise ValueError(
            f"state dimension {s.shape[-1] if s.ndim else 0} does not match "
            f"{p.n_qubits}-qubit Pauli string (expected {p.dim})"
        )
    return s


def zero_state(n_qubits: int) -> np.ndarray:
    """``|0...0>`` as a complex amplitude vector."""
    s = np.zeros(1 << n_qubits, dtype=complex)
    s[0] = 1.0
    return s


def apply_pauli(p: PauliString, s) -> np.ndarray:
    """Return ``P|s>``.

    ``s`` may carry leading batch dimensions; the last axis must have length
    ``2**p.n_qubits``.
    """
    s = _as_state(p, s)
    src, phase = p._action
    return phase * s[..., src]


def apply_exp_pauli(p: PauliString, theta, s) -> np.ndarray:
    """Return ``exp(-i theta P)|s> = cos(theta)|s> - i sin(theta) P|s>``.

    ``theta`` broadcasts against the batch dimensions of ``s``.
    """
    s = _as_state(p, s)
    theta = np.asarray(theta, dtype=float)[..., None]
    src, phase = p._action
    return np.cos(theta) * s + (-1j * np.sin(theta)) * (phase * s[..., src])


def dense_matrix(p: PauliString) -> np.ndarray:
    """Dense ``2**n x 2**n`` matrix of ``p`` built from Kronecker products."""
    if p.n_qubits > MAX_DENSE_QUBITS:
        raise OracleSizeError(
            f"dense oracle limited to {MAX_DENSE_QUBITS} qubits, got {p.n_qubits}"
        )
    out = np.ones((1, 1), dtype=complex)
    for c in p.label:
        out = np.kron(out, _SINGLE[c])
    return out


def sample_pauli_string(n: int, rng: np.random.Generator) -> PauliString:
    """Draw uniformly from the ``4**n - 1`` non-identity Pauli strings."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    code = int(rng.integers(1, 4**n))
    x = z = 0
    for q in range(n):
        digit = (code >> (2 * q)) & 3
        bit = 1 << q
        # digit: 0=I, 1=X, 2=Z, 3=Y
        if digit & 1:
            x |= bit
        if digit & 2:
            z |= bit
    return PauliString(n, x, z)
