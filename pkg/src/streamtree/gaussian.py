"""Incremental Gaussian attribute model used as the comparison baseline.

Mean and variance accumulate in a single pass (Welford update). The CDF at
a split point comes from the fitted normal; a degenerate fit (fewer than
two samples, or zero spread) collapses to a step function at the mean.
"""

from __future__ import annotations

import math


class GaussianStats:
    __slots__ = ("weight_sum", "mean", "variance_sum", "initialized")

    def __init__(self):
        self.weight_sum = 0.0
        self.mean = 0.0
        self.variance_sum = 0.0
        self.initialized = False

    def update(self, x: float, weight: float = 1.0) -> None:
        if weight <= 0:
            raise ValueError("weight must be > 0")
        if not self.initialized:
            self.mean = x
            self.weight_sum = weight
            self.variance_sum = 0.0
            self.initialized = True
            return
        self.weight_sum += weight
        prior = self.mean
        self.mean += weight * (x - prior) / self.weight_sum
        self.variance_sum += weight * (x - prior) * (x - self.mean)

    @property
    def variance(self) -> float:
        """Sample variance; defined only after two or more observations."""
        if self.weight_sum <= 1.0:
            raise ValueError("variance undefined for weight_sum <= 1")
        return self.variance_sum / (self.weight_sum - 1.0)

    def cdf(self, pt: float) -> float:
        """P(X < pt) under the fitted normal, step function if degenerate."""
        if self.weight_sum <= 1.0 or self.variance_sum <= 0.0:
            return 0.0 if pt < self.mean else 1.0
        return normal_cdf(pt, self.mean, self.variance)


def normal_cdf(pt: float, mean: float, variance: float) -> float:
    """Phi((pt - mean)/sqrt(variance))."""
    if variance <= 0.0:
        return 0.0 if pt < mean else 1.0
    z = (pt - mean) / math.sqrt(variance)
    return 0.5 * (1.0 + math.erf(z / math.sqrt(2.0)))
