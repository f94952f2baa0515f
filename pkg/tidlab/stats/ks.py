from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
import scipy.stats

from tidlab.common.errors import EmptySample
from tidlab.common.utils.common_utils import ArrayLike

# Asymptotic 1%-level Kolmogorov constant
KS_LEVEL_CONSTANT = 1.63


@dataclass(frozen=True)
class KSReport:
    """Kolmogorov-Smirnov distance of a sample to a predicted law

    Attributes:
        statistic (float): sup-distance between empirical and predicted CDF
        n (int): sample size
        passed (bool): statistic < threshold
        threshold (float): acceptance threshold
        pvalue (float): asymptotic p-value from scipy

    """

    statistic: float
    n: int
    passed: bool
    threshold: float
    pvalue: float = float("nan")

    def to_dict(self) -> dict:
        return dict(
            statistic=self.statistic,
            n=self.n,
            passed=self.passed,
            threshold=self.threshold,
            pvalue=self.pvalue,
        )


def default_threshold(n: int) -> float:
    return KS_LEVEL_CONSTANT / np.sqrt(n)


def ks_distance(
    samples: ArrayLike, cdf: Callable[[np.ndarray], np.ndarray], threshold: Optional[float] = None
) -> KSReport:
    """sup_i max(|i/n - F(x_i)|, |(i-1)/n - F(x_i)|) over the sorted sample.

    `cdf` must accept an array. The threshold defaults to 1.63 / sqrt(n).
    """
    samples = np.asarray(samples, dtype=float).ravel()
    if samples.size == 0:
        raise EmptySample("ks_distance needs at least one sample")
    n = samples.size
    if threshold is None:
        threshold = default_threshold(n)

    result = scipy.stats.kstest(samples, cdf)
    statistic = float(np.clip(result.statistic, 0.0, 1.0))
    return KSReport(
        statistic=statistic,
        n=n,
        passed=statistic < threshold,
        threshold=float(threshold),
        pvalue=float(result.pvalue),
    )
