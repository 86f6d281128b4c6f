"""Aggregation and significance testing for repeated stochastic runs.

The Student-t CDF is evaluated through the regularized incomplete beta
function (continued fraction, Lentz's method) to avoid a statistics
dependency; it is validated against the df=1 and df=2 closed forms.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass


_CF_EPS = 3e-16
_CF_FPMIN = 1e-300
_CF_MAX_ITER = 300


def _beta_continued_fraction(a: float, b: float, x: float) -> float:
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _CF_FPMIN:
        d = _CF_FPMIN
    d = 1.0 / d
    h = d
    for m in range(1, _CF_MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _CF_FPMIN:
            d = _CF_FPMIN
        c = 1.0 + aa / c
        if abs(c) < _CF_FPMIN:
            c = _CF_FPMIN
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _CF_FPMIN:
            d = _CF_FPMIN
        c = 1.0 + aa / c
        if abs(c) < _CF_FPMIN:
            c = _CF_FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _CF_EPS:
            return h
    raise RuntimeError(f"incomplete beta continued fraction failed for a={a}, b={b}, x={x}")


def regularized_incomplete_beta(a: float, b: float, x: float) -> float:
    """I_x(a, b) for a, b > 0 and x in [0, 1]."""
    if a <= 0 or b <= 0:
        raise ValueError("shape parameters must be positive")
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    ln_front = (
        math.lgamma(a + b)
        - math.lgamma(a)
        - math.lgamma(b)
        + a * math.log(x)
        + b * math.log1p(-x)
    )
    front = math.exp(ln_front)
    # use the representation that converges fast
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _beta_continued_fraction(a, b, x) / a
    return 1.0 - front * _beta_continued_fraction(b, a, 1.0 - x) / b


def student_t_cdf(t: float, df: float) -> float:
    """P(T <= t) for Student's t with ``df`` degrees of freedom."""
    if df <= 0:
        raise ValueError("degrees of freedom must be positive")
    if t == 0.0:
        return 0.5
    x = df / (df + t * t)
    tail = 0.5 * regularized_incomplete_beta(0.5 * df, 0.5, x)
    return 1.0 - tail if t > 0 else tail


def t_test_one_sample_less(samples, mu0: float) -> float:
    """One-sided single-sample t-test with alternative mean < mu0.

    Small p means the sample mean is significantly below ``mu0``.  With
    zero sample variance the statistic is undefined; a degenerate p of
    0 (mean below mu0) or 1 is returned with a warning.
    """
    values = [float(v) for v in samples]
    k = len(values)
    if k < 2:
        raise ValueError("t-test needs at least 2 samples")
    mean = sum(values) / k
    var = sum((v - mean) ** 2 for v in values) / (k - 1)
    if var == 0.0:
        warnings.warn("zero-variance sample: returning a degenerate p-value", stacklevel=2)
        return 0.0 if mean < mu0 else 1.0
    t = (mean - mu0) / math.sqrt(var / k)
    return student_t_cdf(t, k - 1)


@dataclass(frozen=True)
class RunReport:
    """Summary of repeated runs against a single deterministic baseline."""

    samples: tuple[float, ...]
    mean: float
    stddev: float
    best: float
    baseline: float
    p_value: float | None
    config: dict


def aggregate(samples, baseline: float, config: dict | None = None) -> RunReport:
    """Mean/stddev/best of the samples plus the improvement t-test p-value.

    The p-value is omitted (None) for a single sample.  Sample standard
    deviation uses the n-1 denominator.
    """
    values = tuple(float(v) for v in samples)
    if not values:
        raise ValueError("cannot aggregate zero samples")
    k = len(values)
    mean = sum(values) / k
    if k > 1:
        stddev = math.sqrt(sum((v - mean) ** 2 for v in values) / (k - 1))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            p_value = t_test_one_sample_less(values, baseline)
    else:
        stddev = 0.0
        p_value = None
    return RunReport(
        samples=values,
        mean=mean,
        stddev=stddev,
        best=min(values),
        baseline=float(baseline),
        p_value=p_value,
        config=dict(config or {}),
    )
