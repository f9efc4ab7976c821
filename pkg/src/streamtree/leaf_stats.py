"""Per-leaf training statistics stored in flat shared pools.

All statistics for every leaf live in preallocated arrays indexed by
(element, attribute, class): element ids are dense integers handed out by
the tree's pool, so memory is bounded by capacity regardless of how the
tree grows, and recycling an element is a slice reset. A `generation`
counter per element tags handles so a stale reference to a recycled
element raises instead of silently reading another leaf's numbers.

Numeric attributes carry either a bank of quantile trackers per class or
an incremental Gaussian per class, never both. Categorical attributes
carry value-by-class count histograms. The per-sample update path is
vectorized across attributes (one sample touches every attribute of one
(element, class) slice).
"""

from __future__ import annotations

from typing import NamedTuple, Optional, Sequence

import numpy as np

from . import fixed_point as fx
from .gaussian import normal_cdf
from .quantiles import default_targets
from .schema import CATEGORICAL, NUMERIC, DatasetSchema, Sample

METHOD_QUANTILE = "quantile"
METHOD_GAUSSIAN = "gaussian"
BACKEND_FLOAT = "float"
BACKEND_FIXED = "fixed"


class StaleElementError(RuntimeError):
    """A LeafElement handle outlived the element's recycling."""


class ClassDistPair(NamedTuple):
    left: np.ndarray   # |C| reals
    right: np.ndarray  # |C| reals
    split_point: object


class StatsPool:
    """Flat statistics arrays for up to `capacity` live elements."""

    def __init__(self, schema: DatasetSchema, capacity: int,
                 method: str = METHOD_QUANTILE,
                 quantile_count: int = 8,
                 lam: float = 0.01,
                 backend: str = BACKEND_FLOAT,
                 targets: Optional[Sequence[float]] = None):
        if method not in (METHOD_QUANTILE, METHOD_GAUSSIAN):
            raise ValueError(f"unknown method {method!r}")
        if backend not in (BACKEND_FLOAT, BACKEND_FIXED):
            raise ValueError(f"unknown backend {backend!r}")
        if method == METHOD_GAUSSIAN and backend == BACKEND_FIXED:
            raise ValueError("fixed backend applies to the quantile method only")
        self.schema = schema
        self.capacity = capacity
        self.method = method
        self.backend = backend
        self.lam = lam
        C = schema.class_count
        self.class_count = C
        self.numeric_idx = tuple(
            i for i, a in enumerate(schema.attributes) if a.kind == NUMERIC
        )
        self.cat_idx = tuple(
            i for i, a in enumerate(schema.attributes) if a.kind == CATEGORICAL
        )
        self.num_sub = {i: k for k, i in enumerate(self.numeric_idx)}
        self.cat_sub = {i: k for k, i in enumerate(self.cat_idx)}
        A = len(self.numeric_idx)

        self.generation = np.zeros(capacity, dtype=np.int64)
        self.n_f = np.zeros(capacity, dtype=np.int64)
        self.n_fj = np.zeros((capacity, C), dtype=np.int64)
        self.min_a = np.full((capacity, A), np.inf)
        self.max_a = np.full((capacity, A), -np.inf)
        self.hists = [
            np.zeros((capacity, schema.attributes[i].cardinality, C), dtype=np.int64)
            for i in self.cat_idx
        ]

        if method == METHOD_QUANTILE:
            self.targets = np.asarray(
                targets if targets is not None else default_targets(quantile_count)
            )
            Q = len(self.targets)
            self.quantile_count = Q
            if backend == BACKEND_FLOAT:
                self.qvals = np.zeros((capacity, A, C, Q))
                self.step_up = lam * self.targets
                self.step_down = lam * (1.0 - self.targets)
            else:
                self.qraw = np.zeros((capacity, A, C, Q), dtype=np.int64)
                lam_raw = fx.float_to_raw(lam)
                self.step_up_raw = np.array(
                    [fx.mul_raw(lam_raw, fx.float_to_raw(a)) for a in self.targets],
                    dtype=np.int64,
                )
                self.step_down_raw = np.array(
                    [fx.mul_raw(lam_raw, fx.float_to_raw(1.0 - a)) for a in self.targets],
                    dtype=np.int64,
                )
        else:
            self.g_mean = np.zeros((capacity, A, C))
            self.g_vsum = np.zeros((capacity, A, C))

        self.saturation_count = 0

    def reset_element(self, e: int) -> None:
        """Recycle element e: zero its statistics and bump its generation."""
        self.generation[e] += 1
        self.n_f[e] = 0
        self.n_fj[e] = 0
        self.min_a[e] = np.inf
        self.max_a[e] = -np.inf
        for h in self.hists:
            h[e] = 0
        if self.method == METHOD_QUANTILE:
            if self.backend == BACKEND_FLOAT:
                self.qvals[e] = 0.0
            else:
                self.qraw[e] = 0
        else:
            self.g_mean[e] = 0.0
            self.g_vsum[e] = 0.0

    def observe(self, e: int, values: Sequence, label: int) -> None:
        self.n_f[e] += 1
        cj = self.n_fj[e, label] + 1
        self.n_fj[e, label] = cj

        if self.numeric_idx:
            xv = np.array([values[i] for i in self.numeric_idx])
            np.minimum(self.min_a[e], xv, out=self.min_a[e])
            np.maximum(self.max_a[e], xv, out=self.max_a[e])
            if self.method == METHOD_QUANTILE:
                if self.backend == BACKEND_FLOAT:
                    if cj == 1:
                        self.qvals[e, :, label, :] = xv[:, None]
                    else:
                        v = self.qvals[e, :, label, :]
                        v += np.where(v < xv[:, None], self.step_up, -self.step_down)
                else:
                    xr, sat = fx.float_to_raw_array(xv)
                    self.saturation_count += sat
                    if cj == 1:
                        self.qraw[e, :, label, :] = xr[:, None]
                    else:
                        v = self.qraw[e, :, label, :]
                        v += np.where(v < xr[:, None],
                                      self.step_up_raw, -self.step_down_raw)
                        self.saturation_count += fx.saturate_raw_array(v)
            else:
                if cj == 1:
                    self.g_mean[e, :, label] = xv
                    self.g_vsum[e, :, label] = 0.0
                else:
                    m = self.g_mean[e, :, label]
                    d = xv - m
                    m2 = m + d / cj
                    self.g_vsum[e, :, label] += d * (xv - m2)
                    self.g_mean[e, :, label] = m2

        for i, h in zip(self.cat_idx, self.hists):
            h[e, values[i], label] += 1

    def split_points(self, e: int, attr: int, count: int) -> list[float]:
        """count evenly spaced interior points of the observed value range."""
        k = self.num_sub[attr]
        lo = float(self.min_a[e, k])
        hi = float(self.max_a[e, k])
        if not lo < hi:
            return []
        span = (hi - lo) / (count + 1)
        return [lo + span * p for p in range(1, count + 1)]

    def numeric_partition_table(self, e: int, attr: int, pts: Sequence[float]) -> np.ndarray:
        """dist_L for every (split point, class), shape (len(pts), |C|)."""
        k = self.num_sub[attr]
        counts = self.n_fj[e].astype(np.float64)
        pts_arr = np.asarray(pts, dtype=np.float64)
        if self.method == METHOD_QUANTILE:
            if self.backend == BACKEND_FLOAT:
                q = self.qvals[e, k]  # (C, Q)
                below = (q[None, :, :] < pts_arr[:, None, None]).sum(axis=2)
            else:
                praw, _ = fx.float_to_raw_array(pts_arr)
                q = self.qraw[e, k]
                below = (q[None, :, :] < praw[:, None, None]).sum(axis=2)
            dist_l = below / self.quantile_count * counts[None, :]
        else:
            dist_l = np.empty((len(pts_arr), self.class_count))
            for j in range(self.class_count):
                n = counts[j]
                if n == 0:
                    dist_l[:, j] = 0.0
                    continue
                m = self.g_mean[e, k, j]
                vs = self.g_vsum[e, k, j]
                if n <= 1 or vs <= 0.0:
                    dist_l[:, j] = np.where(pts_arr < m, 0.0, n)
                else:
                    var = vs / (n - 1.0)
                    for p, pt in enumerate(pts_arr):
                        dist_l[p, j] = n * normal_cdf(float(pt), m, var)
        # zero-count classes contribute nothing regardless of method
        dist_l[:, counts == 0] = 0.0
        return dist_l

    def deduce_partitions(self, e: int, attr: int, pt: float) -> ClassDistPair:
        dist_l = self.numeric_partition_table(e, attr, [pt])[0]
        counts = self.n_fj[e].astype(np.float64)
        return ClassDistPair(dist_l, counts - dist_l, pt)

    def categorical_partitions(self, e: int, attr: int, v: int) -> ClassDistPair:
        h = self.hists[self.cat_sub[attr]]
        left = h[e, v].astype(np.float64)
        counts = self.n_fj[e].astype(np.float64)
        return ClassDistPair(left, counts - left, v)

    def majority_class(self, e: int) -> int:
        return int(np.argmax(self.n_fj[e]))


class LeafElement:
    """Handle to one element's statistics; guards against recycling."""

    __slots__ = ("pool", "eid", "generation")

    def __init__(self, pool: StatsPool, eid: int):
        self.pool = pool
        self.eid = eid
        self.generation = int(pool.generation[eid])

    def _check(self) -> None:
        if self.pool.generation[self.eid] != self.generation:
            raise StaleElementError(
                f"element {self.eid} was recycled (generation "
                f"{self.pool.generation[self.eid]} != {self.generation})"
            )

    @property
    def n_f(self) -> int:
        self._check()
        return int(self.pool.n_f[self.eid])

    @property
    def n_fj(self) -> np.ndarray:
        self._check()
        return self.pool.n_fj[self.eid]

    def observe(self, s: Sample) -> None:
        self._check()
        self.pool.observe(self.eid, s.values, s.label)

    def split_points(self, attr: int, count: int) -> list[float]:
        self._check()
        return self.pool.split_points(self.eid, attr, count)

    def deduce_partitions(self, attr: int, pt: float) -> ClassDistPair:
        self._check()
        return self.pool.deduce_partitions(self.eid, attr, pt)

    def numeric_partition_table(self, attr: int, pts: Sequence[float]) -> np.ndarray:
        self._check()
        return self.pool.numeric_partition_table(self.eid, attr, pts)

    def categorical_partitions(self, attr: int, v: int) -> ClassDistPair:
        self._check()
        return self.pool.categorical_partitions(self.eid, attr, v)

    def majority_class(self) -> int:
        self._check()
        return self.pool.majority_class(self.eid)
