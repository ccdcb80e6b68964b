"""Gini-index estimators built from U-statistics.

Two routes compute the same quantities:

* the standalone functions (:func:`gmd`, :func:`gini`, :func:`tau_hat`,
  :func:`s_w_squared`, :func:`v_squared`) sort their input and apply
  vectorised order-statistic identities, and
* :class:`EstimatorState` keeps a sorted buffer that grows one observation
  at a time and evaluates everything in a compiled O(n) pass.

The naive pairwise definitions live in :mod:`seqgini.naive` and serve as the
reference for both.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import InsufficientSampleError, InvariantViolationError, RejectedObservationError


def as_sample(values) -> np.ndarray:
    """Validate incomes and return them as a float array in arrival order."""
    xs = np.asarray(values, dtype=np.float64).ravel()
    bad = np.flatnonzero(~(np.isfinite(xs) & (xs > 0)))
    if bad.size:
        raise RejectedObservationError(float(xs[bad[0]]), int(bad[0]))
    return xs


def _sorted(values, what, needed):
    xs = np.sort(as_sample(values))
    if xs.size < needed:
        raise InsufficientSampleError(what, xs.size, needed)
    return xs


def _spacing_weights(n):
    k = np.arange(1, n, dtype=np.float64)
    return k * (n - k)


def _gmd_sorted(xs):
    # sum_{i<j} |x_i - x_j| = sum_k k (n - k) (x_(k+1) - x_(k)); the
    # spacings are non-negative, so ties give exact zeros
    n = xs.size
    return float(np.dot(_spacing_weights(n), np.diff(xs)) / (0.5 * n * (n - 1)))


def gmd(sample) -> float:
    """Gini's mean difference, the average of ``|X_i - X_j|`` over all pairs."""
    return _gmd_sorted(_sorted(sample, "gmd", 2))


def gini(sample) -> float:
    """Sample Gini index ``gmd / (2 * mean)``."""
    xs = _sorted(sample, "gini", 2)
    mean = float(np.mean(xs))
    if mean <= 0:
        raise InvariantViolationError(f"sample mean {mean} is not positive")
    return _gmd_sorted(xs) / (2.0 * mean)


def tau_hat(sample) -> float:
    """U-statistic with kernel ``(x + y)|x - y| / 2``.

    Uses ``(x + y)|x - y| = |x^2 - y^2|``, so the result is half the GMD of
    the squared sample.
    """
    xs = _sorted(sample, "tau_hat", 2)
    return 0.5 * _gmd_sorted(xs * xs)


def _pseudo_values(xs):
    n = xs.size
    gaps = np.diff(xs)
    k = np.arange(1, n, dtype=np.float64)
    # R_k = sum_i |x_(k) - x_i|, stepped along the spacings
    r = np.empty(n)
    r[0] = np.dot(n - k, gaps)
    r[1:] = r[0] + np.cumsum((2.0 * k - n) * gaps)
    pairs = 0.5 * n * (n - 1)
    loo_pairs = 0.5 * (n - 1) * (n - 2)
    d = _gmd_sorted(xs)
    loo = (pairs * d - r) / loo_pairs
    return n * d - (n - 2) * loo


def s_w_squared(sample) -> float:
    """Sample variance of the jackknife pseudo-values of the GMD.

    Pseudo-values are ``n * gmd - (n - 2) * gmd_without_j``; their variance
    estimates four times the variance of ``E(|X_1 - X_2| | X_1)``.
    """
    xs = _sorted(sample, "s_w_squared", 4)
    return float(np.var(_pseudo_values(xs), ddof=1))


def _v2_terms(mean, var, d, tau, sw2):
    m2 = mean * mean
    return (
        d * d * var / (4.0 * m2 * m2)
        - d * tau / (m2 * mean)
        + d * d / m2
        + sw2 / (4.0 * m2)
    )


def v_squared_raw(sample) -> float:
    """Plug-in estimate of the asymptotic variance constant, before clamping."""
    xs = _sorted(sample, "v_squared", 4)
    return float(
        _v2_terms(
            float(np.mean(xs)),
            float(np.var(xs, ddof=1)),
            _gmd_sorted(xs),
            0.5 * _gmd_sorted(xs * xs),
            float(np.var(_pseudo_values(xs), ddof=1)),
        )
    )


def v_squared(sample) -> float:
    """Plug-in estimate of the asymptotic variance constant of the Gini index.

    Negative values, which the difference of estimates can produce in very
    small samples, are clamped to zero.
    """
    return max(v_squared_raw(sample), 0.0)


@dataclass(frozen=True)
class EstimateSnapshot:
    """All estimators at sample size ``n``.

    Fields that are undefined at ``n`` are ``None``: dispersion measures
    need two observations, ``sw2`` and ``v2`` need four.
    """

    n: int
    mean: float | None
    variance: float | None = None
    gmd: float | None = None
    gini: float | None = None
    tau: float | None = None
    sw2: float | None = None
    v2: float | None = None
    v2_clamped: bool = False

    @classmethod
    def from_stats(cls, n, stats):
        def opt(i):
            v = float(stats[i])
            return None if math.isnan(v) else v

        mean = opt(_kernels.STAT_MEAN)
        d = opt(_kernels.STAT_GMD)
        raw = opt(_kernels.STAT_V2)
        return cls(
            n=n,
            mean=mean,
            variance=opt(_kernels.STAT_VAR),
            gmd=d,
            gini=None if d is None else d / (2.0 * mean),
            tau=opt(_kernels.STAT_TAU),
            sw2=opt(_kernels.STAT_SW2),
            v2=None if raw is None else max(raw, 0.0),
            v2_clamped=raw is not None and raw < 0.0,
        )


class EstimatorState:
    """Incremental sufficient statistics for a growing sample.

    Keeps the observations twice: in arrival order and as a sorted buffer.
    ``push`` is O(n) (an insertion shift); ``snapshot`` rebuilds prefix sums
    over the sorted buffer, also O(n).
    """

    def __init__(self, capacity: int = 256):
        capacity = max(int(capacity), 4)
        self._sorted = np.empty(capacity)
        self._arrivals = np.empty(capacity)
        self._stats = np.empty(_kernels.NSTATS)
        self._work = np.empty((2, capacity))
        self.n = 0
        self.sum_x = 0.0
        self.sum_x2 = 0.0

    def __len__(self):
        return self.n

    def reserve(self, capacity: int) -> None:
        if capacity <= self._sorted.size:
            return
        size = self._sorted.size
        while size < capacity:
            size *= 2
        for name in ("_sorted", "_arrivals"):
            old = getattr(self, name)
            new = np.empty(size)
            new[: self.n] = old[: self.n]
            setattr(self, name, new)
        self._work = np.empty((2, size))

    def push(self, x: float) -> "EstimatorState":
        x = float(x)
        if not (math.isfinite(x) and x > 0):
            raise RejectedObservationError(x, self.n)
        self.reserve(self.n + 1)
        _kernels.insert_sorted(self._sorted, self.n, x)
        self._arrivals[self.n] = x
        self.n += 1
        self.sum_x += x
        self.sum_x2 += x * x
        return self

    def extend(self, values) -> "EstimatorState":
        for x in as_sample(values):
            self.push(x)
        return self

    def _record_block(self, block: np.ndarray) -> None:
        # for the engine, which has already inserted block into the sorted buffer
        k = block.size
        self._arrivals[self.n : self.n + k] = block
        self.n += k
        self.sum_x += float(block.sum())
        self.sum_x2 += float(np.dot(block, block))

    @property
    def values(self) -> np.ndarray:
        """Observations in arrival order (a copy)."""
        return self._arrivals[: self.n].copy()

    @property
    def ordered(self) -> np.ndarray:
        """Observations in ascending order (a copy)."""
        return self._sorted[: self.n].copy()

    def snapshot(self) -> EstimateSnapshot:
        _kernels.sorted_stats(self._sorted, self.n, self._stats, self._work)
        return EstimateSnapshot.from_stats(self.n, self._stats)


def push(state: EstimatorState, x: float) -> EstimatorState:
    return state.push(x)


def snapshot(state: EstimatorState) -> EstimateSnapshot:
    return state.snapshot()


def snapshot_of(sample) -> EstimateSnapshot:
    """Snapshot via the standalone (sort every time) functions."""
    xs = np.sort(as_sample(sample))
    n = xs.size
    if n == 0:
        return EstimateSnapshot(n=0, mean=None)
    mean = float(np.mean(xs))
    if n < 2:
        return EstimateSnapshot(n=n, mean=mean)
    d = _gmd_sorted(xs)
    fields = dict(
        n=n,
        mean=mean,
        variance=float(np.var(xs, ddof=1)),
        gmd=d,
        gini=d / (2.0 * mean),
        tau=0.5 * _gmd_sorted(xs * xs),
    )
    if n >= 4:
        raw = v_squared_raw(xs)
        fields.update(sw2=s_w_squared(xs), v2=max(raw, 0.0), v2_clamped=raw < 0)
    return EstimateSnapshot(**fields)
