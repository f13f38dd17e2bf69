"""Closed-form complexity and generalization bounds.

The Rademacher bound is assembled from its proof ingredients rather than
hard-coded: a Lipschitz constant ``K = 2 sqrt(L)``, the parameter-domain
diameter ``R`` and the chaining constant ``18 sqrt(pi)``, giving
``18 sqrt(pi) sqrt(L) K R / sqrt(M)``. On the full box ``[0, 2 pi]^L`` the
diameter is ``2 pi sqrt(L)`` and the bound is ``72 pi^{3/2} L^{3/2} / sqrt(M)``;
on ``[0, 2 pi / sqrt(L)]^L`` it is ``2 pi`` and the bound grows like ``L``.
Since ``|f| <= 1`` the complexity never exceeds one, so results are clamped.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

__all__ = [
    "Domain",
    "BoundInputs",
    "LinearModelInputs",
    "BoundReport",
    "lipschitz_bound",
    "domain_diameter",
    "raw_rademacher_bound",
    "rademacher_bound",
    "linear_model_bound",
    "gap_bound",
    "bound_report",
    "CHAINING_CONSTANT",
]

# 12 / sqrt(M) * (3 sqrt(pi) / 2) K R  ->  18 sqrt(pi) K R / sqrt(M)
CHAINING_CONSTANT = 18.0 * math.sqrt(math.pi)


class Domain(str, Enum):
    FULL = "full"
    RESTRICTED = "restricted"


@dataclass(frozen=True)
class BoundInputs:
    L: int
    M: int
    domain: Domain = Domain.FULL
    delta: float = 0.05

    def __post_init__(self):
        object.__setattr__(self, "domain", Domain(self.domain))
        if self.L < 1:
            raise ValueError(f"L must be >= 1, got {self.L}")
        if self.M < 1:
            raise ValueError(f"M must be >= 1, got {self.M}")
        if not 0.0 < self.delta < 1.0:
            raise ValueError(f"delta must lie in (0, 1), got {self.delta}")


@dataclass(frozen=True)
class LinearModelInputs:
    D: float
    B: float
    M: int
    p: int = 1

    def __post_init__(self):
        if self.D <= 0 or self.B <= 0:
            raise ValueError(f"D and B must be positive, got D={self.D}, B={self.B}")
        if self.M < 1:
            raise ValueError(f"M must be >= 1, got {self.M}")


def lipschitz_bound(L: int) -> float:
    """``K = 2 sqrt(L)`` for Pauli generators and a Pauli observable."""
    if L < 0:
        raise ValueError(f"L must be >= 0, got {L}")
    return 2.0 * math.sqrt(L)


def domain_diameter(L: int, domain: Domain | str) -> float:
    """Euclidean diameter of ``[0, 2 pi]^L`` or ``[0, 2 pi / sqrt(L)]^L``."""
    if Domain(domain) is Domain.FULL:
        return 2.0 * math.pi * math.sqrt(L)
    return 2.0 * math.pi


def raw_rademacher_bound(inputs: BoundInputs) -> float:
    K = lipschitz_bound(inputs.L)
    R = domain_diameter(inputs.L, inputs.domain)
    return CHAINING_CONSTANT * math.sqrt(inputs.L) * K * R / math.sqrt(inputs.M)


def rademacher_bound(inputs: BoundInputs) -> float:
    return min(1.0, raw_rademacher_bound(inputs))


def linear_model_bound(inputs: LinearModelInputs) -> tuple[float, str]:
    """``D B / sqrt(M)`` for ``{x -> w.x : |x| <= D, |w| <= B}``.

    The second element labels the growth regime in the parameter count ``p``:
    a norm bound counts as growing with ``p`` when it is at least ``p``
    (and ``p > 1``).
    """
    value = inputs.D * inputs.B / math.sqrt(inputs.M)
    grows = sum(1 for v in (inputs.D, inputs.B) if inputs.p > 1 and v >= inputs.p)
    regime = ("1/sqrt(M)", "p/sqrt(M)", "p^2/sqrt(M)")[grows]
    return value, regime


def gap_bound(rademacher: float, M: int, delta: float) -> float:
    """Upper bound on test minus training loss, valid with probability ``1 - delta``."""
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    if M < 1:
        raise ValueError(f"M must be >= 1, got {M}")
    if rademacher < 0:
        raise ValueError(f"rademacher must be >= 0, got {rademacher}")
    return 2.0 * rademacher + math.sqrt(math.log(1.0 / delta) / (2.0 * M))


@dataclass(frozen=True)
class BoundReport:
    L: int
    M: int
    K: float
    R: float
    raw_bound: float
    clamped_bound: float
    restricted_bound: float
    delta: float
    gap_bound: float
    # intermediate 18 sqrt(pi) sqrt(L/M) K R and the closed form 72 pi^{3/2} L^{3/2} / sqrt(M)
    intermediate: float
    closed_form: float

    def as_row(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def bound_report(L: int, M: int, delta: float = 0.05) -> BoundReport:
    """All bounds for one ``(L, M)`` pair; the gap bound uses the clamped full-domain value."""
    full = BoundInputs(L, M, Domain.FULL, delta)
    restricted = BoundInputs(L, M, Domain.RESTRICTED, delta)
    K = lipschitz_bound(L)
    R = domain_diameter(L, Domain.FULL)
    raw = raw_rademacher_bound(full)
    clamped = min(1.0, raw)
    return BoundReport(
        L=L, M=M, K=K, R=R,
        raw_bound=raw,
        clamped_bound=clamped,
        restricted_bound=rademacher_bound(restricted),
        delta=delta,
        gap_bound=gap_bound(clamped, M, delta),
        intermediate=CHAINING_CONSTANT * math.sqrt(L / M) * K * R,
        closed_form=72.0 * math.pi ** 1.5 * L ** 1.5 / math.sqrt(M),
    )
