"""Purely sequential stopping rules for minimum-risk Gini estimation.

After a pilot of ``m`` observations the rule is checked once per new
observation and sampling stops at the first ``n`` with

    plain:    n >= sqrt(A/c) * V_n
    guarded:  n >= sqrt(A/c) * (V_n + n**-gamma)
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Literal

import numpy as np

from . import _kernels
from .errors import InsufficientDataError, RejectedObservationError, ValidationError
from .estimators import EstimateSnapshot, EstimatorState

DEFAULT_CAP = 1_000_000
BLOCK = 128
_NO_TRAJ = np.empty((0, 3))


@dataclass(frozen=True)
class StudyConfig:
    A: float = 50_000.0
    c: float = 0.1
    m: int = 10
    rule: Literal["plain", "guarded"] = "plain"
    gamma: float = 0.25
    seed: int = 1
    cap: int = DEFAULT_CAP

    def __post_init__(self):
        checks = [
            (math.isfinite(self.A) and self.A > 0, f"A must be > 0, got {self.A}"),
            (math.isfinite(self.c) and self.c > 0, f"c must be > 0, got {self.c}"),
            (int(self.m) == self.m and self.m >= 4, f"m must be an integer >= 4, got {self.m}"),
            (self.rule in ("plain", "guarded"), f"rule must be 'plain' or 'guarded', got {self.rule!r}"),
            (0 < self.gamma < 0.5, f"gamma must lie in (0, 0.5), got {self.gamma}"),
            (int(self.cap) == self.cap and self.cap > self.m, f"cap must exceed m, got {self.cap}"),
        ]
        for ok, msg in checks:
            if not ok:
                raise ValidationError(msg)

    @property
    def scale(self) -> float:
        return math.sqrt(self.A / self.c)

    @property
    def guarded_floor(self) -> int:
        """Smallest n the guarded rule can stop at: ceil((A/c)^(1/(2(1+gamma))))."""
        return math.ceil((self.A / self.c) ** (1.0 / (2.0 * (1.0 + self.gamma))))

    def with_(self, **changes) -> "StudyConfig":
        return replace(self, **changes)


@dataclass(frozen=True)
class StoppingResult:
    n_final: int
    gini_final: float
    v2_final: float
    stopped_by_cap: bool
    snapshot: EstimateSnapshot
    threshold_final: float
    history_length: int
    trajectory: np.ndarray | None = field(default=None, repr=False, compare=False)

    @property
    def sw2_final(self) -> float:
        return self.snapshot.sw2

    @property
    def tau_final(self) -> float:
        return self.snapshot.tau


def threshold(n: int, v2: float, config: StudyConfig) -> float:
    """Right-hand side of the stopping condition at sample size ``n``."""
    v = math.sqrt(max(v2, 0.0))
    if config.rule == "guarded":
        return config.scale * (v + n ** (-config.gamma))
    return config.scale * v


def should_stop(n: int, v2: float, config: StudyConfig) -> bool:
    return n >= threshold(n, v2, config)


class ArraySource:
    """Stream over a fixed array, consumed front to back."""

    def __init__(self, values):
        self._values = np.asarray(values, dtype=np.float64).ravel()
        self.consumed = 0

    def peek(self, k: int) -> np.ndarray:
        return self._values[self.consumed : self.consumed + k]

    def advance(self, k: int) -> None:
        self.consumed += k


class IteratorSource:
    """Wraps a plain iterator; reads one item at a time so nothing is over-consumed."""

    def __init__(self, iterable):
        self._it = iter(iterable)
        self._pending = None
        self.consumed = 0

    def peek(self, k: int) -> np.ndarray:
        if self._pending is None:
            try:
                self._pending = np.array([float(next(self._it))])
            except StopIteration:
                return np.empty(0)
        return self._pending[:k]

    def advance(self, k: int) -> None:
        if k:
            self._pending = None
            self.consumed += k


def as_source(stream):
    if hasattr(stream, "peek") and hasattr(stream, "advance"):
        return stream
    if isinstance(stream, (np.ndarray, list, tuple)):
        return ArraySource(stream)
    return IteratorSource(stream)


def run_sequential(stream, config: StudyConfig, *, record_trajectory: bool = False) -> StoppingResult:
    """Sample one observation at a time until the stopping rule holds.

    ``stream`` is an array, an iterable of incomes, or an object with
    ``peek(k)``/``advance(k)`` (see :class:`seqgini.population.SamplerSource`).
    Exactly ``n_final`` observations are consumed from it.

    Raises:
        RejectedObservationError: the stream yielded a non-positive or non-finite income.
        InsufficientDataError: the stream ended before the rule was satisfied.
    """
    source = as_source(stream)
    state = EstimatorState(capacity=max(4 * config.m, 256))
    stats = np.empty(_kernels.NSTATS)
    guarded = config.rule == "guarded"
    scale = config.scale
    chunks = []
    last_thr = math.nan
    want = config.m

    while True:
        block = source.peek(min(want, config.cap - state.n))
        if block.size == 0:
            raise InsufficientDataError(state.n, last_thr)
        rejected = None
        if not (block.min() > 0 and np.isfinite(block).all()):
            bad = np.flatnonzero(~(np.isfinite(block) & (block > 0)))
            # consume the valid prefix first; the rule may fire before the bad value
            rejected = RejectedObservationError(float(block[bad[0]]), state.n + int(bad[0]))
            block = block[: bad[0]]
            if block.size == 0:
                raise rejected

        state.reserve(state.n + block.size)
        traj = np.full((block.size, 3), np.nan) if record_trajectory else _NO_TRAJ
        n0 = state.n
        used, status, thr = _kernels.advance(
            state._sorted, n0, block, config.m, scale, config.gamma, guarded, config.cap, stats,
            state._work, traj, record_trajectory
        )
        state._record_block(block[:used].copy())
        source.advance(used)
        if not math.isnan(thr):
            last_thr = thr
        if record_trajectory:
            chunks.append(traj[:used][~np.isnan(traj[:used, 0])])
        if status != _kernels.STOP_NONE:
            break
        if rejected is not None:
            raise rejected
        want = BLOCK

    snap = EstimateSnapshot.from_stats(state.n, stats)
    trajectory = np.concatenate(chunks) if record_trajectory else None
    history = state.n - config.m + 1
    return StoppingResult(
        n_final=state.n,
        gini_final=snap.gini,
        v2_final=snap.v2,
        stopped_by_cap=status == _kernels.STOP_CAP,
        snapshot=snap,
        threshold_final=last_thr,
        history_length=history,
        trajectory=trajectory,
    )
