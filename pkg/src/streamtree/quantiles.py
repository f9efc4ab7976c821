"""Incremental quantile tracking driven by asymmetric signum steps.

Each tracked quantile value calibrates itself against every incoming
sample: it moves up by ``lam * alpha`` when the sample lands above it and
down by ``lam * (1 - alpha)`` otherwise. In the long run the fraction of
samples below the tracked value settles at ``alpha``. A set of such
trackers doubles as a compact CDF estimate: the estimated probability
mass below a point is the fraction of tracked quantiles sitting below it
(mass quantized to 1/|Q| steps, rounding down).
"""

from __future__ import annotations

from typing import Sequence

import numpy as np


def default_targets(count: int) -> tuple[float, ...]:
    """Evenly spaced interior probabilities k/(count+1), k = 1..count."""
    if count < 2:
        raise ValueError("quantile count must be >= 2")
    return tuple(k / (count + 1) for k in range(1, count + 1))


def asym_signum(z: float, alpha: float) -> float:
    """-alpha for z < 0, (1 - alpha) for z >= 0."""
    if z < 0:
        return -alpha
    return 1.0 - alpha


class QuantileSet:
    """A bank of independently tracked quantile values for one distribution.

    Values are deliberately not kept sorted: each tracker moves on its own
    and transient inversions between neighbours are legal. ``cdf_below``
    only counts, so it is insensitive to ordering.
    """

    __slots__ = ("targets", "values", "seen_count", "initialized")

    def __init__(self, targets: Sequence[float]):
        targets = tuple(float(a) for a in targets)
        if len(targets) < 2:
            raise ValueError("need at least 2 quantile targets")
        for a, b in zip(targets, targets[1:]):
            if not a < b:
                raise ValueError("targets must be strictly increasing")
        if not (0.0 < targets[0] and targets[-1] < 1.0):
            raise ValueError("targets must lie in (0, 1)")
        self.targets = targets
        self.values: list[float] = [0.0] * len(targets)
        self.seen_count = 0
        self.initialized = False

    @classmethod
    def from_values(cls, values: Sequence[float], targets: Sequence[float]) -> "QuantileSet":
        qs = cls(targets)
        if len(values) != len(qs.targets):
            raise ValueError("values/targets length mismatch")
        qs.values = [float(v) for v in values]
        qs.initialized = True
        qs.seen_count = 1
        return qs

    def __len__(self) -> int:
        return len(self.targets)

    def update(self, x: float, lam: float) -> None:
        """Calibrate every tracker against one sample with step size lam."""
        if lam < 0:
            raise ValueError("lam must be >= 0")
        if not self.initialized:
            # First observation seeds every tracker at the sample itself.
            self.values = [x] * len(self.targets)
            self.initialized = True
            self.seen_count = 1
            return
        values = self.values
        for k, alpha in enumerate(self.targets):
            values[k] -= lam * asym_signum(values[k] - x, alpha)
        self.seen_count += 1

    def update_many(self, xs: Sequence[float], lam: float) -> None:
        """Stream a batch of samples through the trackers in order.

        Equivalent to repeated ``update`` but runs quantile-major so each
        tracker's value stays in a local through the scan.
        """
        if lam < 0:
            raise ValueError("lam must be >= 0")
        xs = np.asarray(xs, dtype=np.float64).tolist()
        if not xs:
            return
        start = 0
        if not self.initialized:
            self.values = [xs[0]] * len(self.targets)
            self.initialized = True
            start = 1
        values = self.values
        for k, alpha in enumerate(self.targets):
            up = lam * alpha
            down = lam * (1.0 - alpha)
            v = values[k]
            for x in xs[start:] if start else xs:
                if v < x:
                    v += up
                else:
                    v -= down
            values[k] = v
        self.seen_count += len(xs)

    def cdf_below(self, pt: float) -> float:
        """Fraction of trackers strictly below pt, in 1/|Q| steps."""
        below = 0
        for v in self.values:
            if v < pt:
                below += 1
        return below / len(self.values)

    def cdf_curve(self, xs: np.ndarray, lo: float, hi: float) -> np.ndarray:
        """Continuous CDF reconstruction evaluated at the points xs.

        Piecewise-linear through the tracked (value, target) pairs,
        anchored at (lo, 0) and (hi, 1) from the observed value range.
        Values are sorted and clipped into [lo, hi] first so the curve is
        a valid monotone CDF even when trackers have transiently crossed.
        """
        knots = np.clip(np.sort(np.asarray(self.values, dtype=np.float64)), lo, hi)
        xp = np.concatenate(([lo], knots, [hi]))
        fp = np.concatenate(([0.0], np.asarray(self.targets), [1.0]))
        # Collapse any equal-x knots monotonically for interp.
        xp = np.maximum.accumulate(xp)
        return np.interp(np.asarray(xs, dtype=np.float64), xp, fp)
