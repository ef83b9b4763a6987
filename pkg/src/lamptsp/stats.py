"""Small statistics toolkit: batch means, 99% intervals, KS and chi-square."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

Z99 = 2.5758293035489004  # two-sided 99% normal quantile


@dataclass
class SizeStats:
    """One experiment row: the statistic's per-trial mean at one size."""

    n: int
    trials: int
    mean: float
    std_err: float
    statistic: float
    lo99: float
    hi99: float

    @classmethod
    def from_values(cls, n: int, values, statistic: float | None = None):
        v = np.asarray(values, dtype=np.float64)
        mean = float(v.mean()) if v.size else float("nan")
        se = float(v.std(ddof=1) / math.sqrt(v.size)) if v.size > 1 else 0.0
        stat = mean if statistic is None else float(statistic)
        return cls(
            n=n,
            trials=int(v.size),
            mean=mean,
            std_err=se,
            statistic=stat,
            lo99=mean - Z99 * se,
            hi99=mean + Z99 * se,
        )


def ks_two_sample(a, b) -> float:
    """Two-sample Kolmogorov-Smirnov statistic (sup distance of ECDFs)."""
    a = np.sort(np.asarray(a, dtype=np.float64))
    b = np.sort(np.asarray(b, dtype=np.float64))
    allv = np.concatenate([a, b])
    cdf_a = np.searchsorted(a, allv, side="right") / a.size
    cdf_b = np.searchsorted(b, allv, side="right") / b.size
    return float(np.abs(cdf_a - cdf_b).max())


def ks_critical(alpha: float, n: int, m: int) -> float:
    """Large-sample two-sample KS critical value at level alpha."""
    c = math.sqrt(-0.5 * math.log(alpha / 2.0))
    return c * math.sqrt((n + m) / (n * m))


def chi_square_uniform(counts) -> tuple[float, int]:
    """Chi-square statistic and dof against the uniform law over the cells."""
    counts = np.asarray(counts, dtype=np.float64)
    total = counts.sum()
    if total == 0 or counts.size < 2:
        return 0.0, max(0, counts.size - 1)
    expected = total / counts.size
    stat = float(((counts - expected) ** 2 / expected).sum())
    return stat, counts.size - 1


def chi_square_threshold(alpha: float, dof: int) -> float:
    from scipy.stats import chi2

    return float(chi2.ppf(1.0 - alpha, dof))
