"""Log-log OLS with a two-sided slope t-test, and small summary statistics."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from .exceptions import InsufficientDataError

__all__ = [
    "RegressionResult",
    "BoxStats",
    "ols_fit",
    "loglog_fit",
    "summarize",
    "box_stats",
    "betainc",
    "t_two_sided_p",
]

_CF_TOL = 1e-12
_CF_MAX_ITER = 10_000


def _betacf(a: float, b: float, x: float) -> float:
    # modified Lentz evaluation of the continued fraction for I_x(a, b)
    tiny = 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for m in range(1, _CF_MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        d = tiny if abs(d) < tiny else d
        c = 1.0 + aa / c
        c = tiny if abs(c) < tiny else c
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        d = tiny if abs(d) < tiny else d
        c = 1.0 + aa / c
        c = tiny if abs(c) < tiny else c
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _CF_TOL:
            return h
    raise RuntimeError(f"incomplete beta continued fraction did not converge (a={a}, b={b}, x={x})")


def betainc(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta function ``I_x(a, b)``."""
    if a <= 0 or b <= 0:
        raise ValueError("a and b must be positive")
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"x must lie in [0, 1], got {x}")
    if x == 0.0 or x == 1.0:
        return x
    log_front = (math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
                 + a * math.log(x) + b * math.log1p(-x))
    front = math.exp(log_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def t_two_sided_p(t: float, df: int) -> float:
    """``P(|T| >= |t|)`` for Student's t with ``df`` degrees of freedom."""
    if df < 1:
        raise ValueError(f"df must be >= 1, got {df}")
    if math.isinf(t):
        return 0.0
    return min(1.0, betainc(df / 2.0, 0.5, df / (df + t * t)))


@dataclass(frozen=True)
class RegressionResult:
    slope: float
    intercept: float
    slope_stderr: float
    t_statistic: float
    p_value: float
    r_squared: float
    n_points: int

    def to_dict(self) -> dict:
        return asdict(self)

    def __str__(self) -> str:
        return (
            f"slope={self.slope:.6g} (se {self.slope_stderr:.3g}, t {self.t_statistic:.4g}, "
            f"p {self.p_value:.4g})  intercept={self.intercept:.6g}  "
            f"R^2={self.r_squared:.4f}  n={self.n_points}"
        )


def ols_fit(xs: Sequence[float], ys: Sequence[float]) -> RegressionResult:
    """Simple linear regression ``y = a + b x`` with a t-test of ``b = 0``."""
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError(f"xs and ys must be 1-D of equal length, got {x.shape} and {y.shape}")
    n = x.size
    if n < 3:
        raise InsufficientDataError(f"need at least 3 points for a slope test, got {n}")
    xc = x - x.mean()
    sxx = float(xc @ xc)
    if sxx == 0.0:
        raise InsufficientDataError("all x values are identical; slope is undefined")
    yc = y - y.mean()
    slope = float(xc @ yc) / sxx
    intercept = float(y.mean() - slope * x.mean())
    resid = yc - slope * xc
    sse = float(resid @ resid)
    syy = float(yc @ yc)
    df = n - 2
    stderr = math.sqrt(sse / df / sxx)
    if stderr == 0.0:
        t = 0.0 if slope == 0.0 else math.copysign(math.inf, slope)
    else:
        t = slope / stderr
    r2 = 1.0 if syy == 0.0 else min(1.0, max(0.0, 1.0 - sse / syy))
    return RegressionResult(slope, intercept, stderr, t, t_two_sided_p(t, df), r2, n)


def loglog_fit(xs: Sequence[float], ys: Sequence[float]) -> RegressionResult:
    """OLS of ``ln y`` on ``ln x``; the slope is the power-law exponent."""
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if np.any(x <= 0) or np.any(y <= 0):
        raise ValueError("log-log fit needs strictly positive xs and ys")
    return ols_fit(np.log(x), np.log(y))


def summarize(values: Sequence[float]) -> tuple[float, float]:
    """Mean and standard error (sample standard deviation over sqrt(n))."""
    v = np.asarray(values, dtype=float)
    if v.size < 2:
        raise InsufficientDataError(f"need at least 2 values, got {v.size}")
    return float(v.mean()), float(v.std(ddof=1) / math.sqrt(v.size))


@dataclass(frozen=True)
class BoxStats:
    median: float
    q1: float
    q3: float
    whisker_low: float
    whisker_high: float
    n: int


def box_stats(values: Sequence[float]) -> BoxStats:
    """Box-plot summary; whiskers reach the furthest points within 1.5 IQR."""
    v = np.sort(np.asarray(values, dtype=float))
    if v.size == 0:
        raise InsufficientDataError("no values")
    q1, med, q3 = np.percentile(v, [25, 50, 75])
    iqr = q3 - q1
    inside = v[(v >= q1 - 1.5 * iqr) & (v <= q3 + 1.5 * iqr)]
    return BoxStats(float(med), float(q1), float(q3), float(inside.min()), float(inside.max()), int(v.size))
