"""Kolmogorov-Smirnov statistics and empirical (joint) Laplace transforms."""

import math
from dataclasses import dataclass
from typing import Callable, Tuple

import numpy as np
from scipy import special

__all__ = [
    "EmpiricalDistribution",
    "ks_two_sample",
    "ks_one_sample",
    "empirical_joint_lt",
]


@dataclass(frozen=True)
class EmpiricalDistribution:
    """Sorted sample vector with its right-continuous ECDF."""

    sorted_samples: np.ndarray
    n: int

    @classmethod
    def from_samples(cls, samples) -> "EmpiricalDistribution":
        a = np.sort(np.asarray(samples, dtype=float))
        if a.size == 0:
            raise ValueError("empty sample")
        return cls(sorted_samples=a, n=a.size)

    def cdf(self, x):
        return np.searchsorted(self.sorted_samples, x, side="right") / self.n


def ks_two_sample(a, b) -> Tuple[float, float]:
    """Two-sample KS statistic and its asymptotic p-value.

    D is the sup-distance of the two right-continuous ECDFs; the p-value uses
    the Kolmogorov distribution at effective size n*m/(n+m).
    """
    a = np.sort(np.asarray(a, dtype=float))
    b = np.sort(np.asarray(b, dtype=float))
    if a.size == 0 or b.size == 0:
        raise ValueError("ks_two_sample requires nonempty samples")
    pooled = np.concatenate([a, b])
    ca = np.searchsorted(a, pooled, side="right") / a.size
    cb = np.searchsorted(b, pooled, side="right") / b.size
    d = float(np.abs(ca - cb).max())
    en = math.sqrt(a.size * b.size / (a.size + b.size))
    p = float(special.kolmogorov(en * d))
    return d, p


def ks_one_sample(a, cdf: Callable) -> float:
    """One-sample KS statistic of the samples against a supplied CDF."""
    a = np.sort(np.asarray(a, dtype=float))
    if a.size == 0:
        raise ValueError("ks_one_sample requires a nonempty sample")
    n = a.size
    f = np.asarray(cdf(a), dtype=float)
    i = np.arange(1, n + 1)
    return float(max(np.abs(i / n - f).max(), np.abs((i - 1) / n - f).max()))


def empirical_joint_lt(x, y, alpha: float, beta: float) -> Tuple[float, float]:
    """Sample mean and standard error of exp(-alpha x - beta y)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size == 0:
        raise ValueError("empirical_joint_lt requires nonempty samples")
    if alpha < 0 or beta < 0:
        raise ValueError("transform arguments must be >= 0")
    v = np.exp(-alpha * x - beta * y)
    est = float(v.mean())
    se = float(v.std(ddof=1) / math.sqrt(v.size)) if v.size > 1 else 0.0
    return est, se
