"""Seeded, parallel replication studies.

Every replication gets its own generator derived from the base seed and a
spawn key, ``(STUDY, r)`` for ordinary studies, ``(BATCH, b, r)`` for the
second-order batches and ``(FIXED_N, r)`` for fixed-sample runs. Results are
collected by replication index before any reduction, so summaries do not
depend on the number of worker processes.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from typing import NamedTuple

import numpy as np

from .engine import StudyConfig, run_sequential
from .errors import InsufficientReplicationsError, ReplicationError, SeqGiniError, ValidationError
from .population import PopulationModel, PopulationParams, SamplerSource, make_rng, population_params
from .risk import RiskReport, mean_se, report_from_arrays

log = logging.getLogger(__name__)

STUDY, BATCH, FIXED_N = 0, 1, 2

# columns of the per-replication result matrix
COL_N, COL_GINI, COL_V2, COL_SW2, COL_TAU = range(5)


def replication_seed(base_seed: int, *key: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(int(base_seed), spawn_key=tuple(int(k) for k in key))


def _run_chunk(model, config, prefix, indices):
    out = np.empty((len(indices), 5))
    for row, r in enumerate(indices):
        key = (*prefix, r)
        try:
            res = run_sequential(SamplerSource(model, replication_seed(config.seed, *key)), config)
        except SeqGiniError as err:
            raise ReplicationError(r, str(err)) from err
        if res.stopped_by_cap:
            raise ReplicationError(r, f"hit the safety cap of {config.cap} observations")
        s = res.snapshot
        out[row] = (res.n_final, s.gini, s.v2, s.sw2, s.tau)
    return out


def _chunks(reps, workers):
    size = max(1, math.ceil(reps / (4 * workers)))
    return [list(range(i, min(i + size, reps))) for i in range(0, reps, size)]


def run_replications(model: PopulationModel, config: StudyConfig, reps: int, *,
                     prefix=(STUDY,), workers: int = 1) -> np.ndarray:
    """Per-replication ``(N, G_N, V^2_N, s^2_wN, tau_N)`` rows in index order."""
    if reps < 1:
        raise InsufficientReplicationsError(f"reps must be >= 1, got {reps}")
    if workers < 1:
        raise ValidationError(f"workers must be >= 1, got {workers}")
    if workers == 1:
        return _run_chunk(model, config, prefix, range(reps))
    chunks = _chunks(reps, workers)
    with ProcessPoolExecutor(max_workers=workers) as pool:
        parts = list(
            pool.map(_run_chunk, [model] * len(chunks), [config] * len(chunks),
                     [prefix] * len(chunks), chunks)
        )
    return np.concatenate(parts)


class BatchDiff(NamedTuple):
    """One batch estimate of ``E[N] - n_c`` and of the regret difference."""

    n_diff: float
    regret_diff: float
    plugin_regret_diff: float


@dataclass(frozen=True)
class ReplicationSummary:
    distribution: str
    params: str
    A: float
    c: float
    m: int
    rule: str
    gamma: float
    seed: int
    reps: int
    n_bar: float
    se_n: float
    max_n: int
    min_n: int
    gini_mean: float
    gini_se: float
    sw2_mean: float
    sw2_se: float
    tau_mean: float
    tau_se: float
    v2_mean: float
    v2_se: float
    risk_report: RiskReport
    raw: np.ndarray | None = field(default=None, repr=False, compare=False)
    batches: tuple[BatchDiff, ...] = ()

    def to_record(self) -> dict:
        """Flat mapping of scalars; the risk report is inlined with a ``risk_`` prefix."""
        rec = {}
        for f in fields(self):
            if f.name in ("raw", "batches", "risk_report"):
                continue
            rec[f.name] = getattr(self, f.name)
        for k, v in self.risk_report.as_dict().items():
            rec[f"risk_{k}"] = v
        return rec

    @classmethod
    def from_record(cls, rec: dict) -> "ReplicationSummary":
        """Inverse of :meth:`to_record`; accepts the strings read back from CSV."""
        kw = {}
        for f in fields(cls):
            if f.name in ("raw", "batches", "risk_report"):
                continue
            kw[f.name] = _coerce(f.type, rec[f.name])
        risk = {
            f.name: float(rec[f"risk_{f.name}"]) for f in fields(RiskReport)
        }
        return cls(**kw, risk_report=RiskReport(**risk))


def _coerce(type_name, value):
    if type_name == "int":
        return int(value)
    if type_name == "float":
        return float(value)
    return str(value)


def summarize(model: PopulationModel, config: StudyConfig, raw: np.ndarray,
              truth: PopulationParams) -> ReplicationSummary:
    n = raw[:, COL_N]
    if raw.shape[0] < 2:
        raise InsufficientReplicationsError(f"need at least 2 replications, got {raw.shape[0]}")
    report = report_from_arrays(n, raw[:, COL_GINI], raw[:, COL_V2], truth.gini, truth.xi2, config.A, config.c)
    stats = {name: mean_se(raw[:, col]) for name, col in
             (("n", COL_N), ("gini", COL_GINI), ("sw2", COL_SW2), ("tau", COL_TAU), ("v2", COL_V2))}
    return ReplicationSummary(
        distribution=model.family,
        params=";".join(f"{k}={v!r}" for k, v in model.params),
        A=float(config.A),
        c=float(config.c),
        m=int(config.m),
        rule=config.rule,
        gamma=float(config.gamma),
        seed=int(config.seed),
        reps=int(raw.shape[0]),
        n_bar=stats["n"].mean,
        se_n=stats["n"].se,
        max_n=int(n.max()),
        min_n=int(n.min()),
        gini_mean=stats["gini"].mean,
        gini_se=stats["gini"].se,
        sw2_mean=stats["sw2"].mean,
        sw2_se=stats["sw2"].se,
        tau_mean=stats["tau"].mean,
        tau_se=stats["tau"].se,
        v2_mean=stats["v2"].mean,
        v2_se=stats["v2"].se,
        risk_report=report,
        raw=raw,
    )


def run_study(model: PopulationModel, config: StudyConfig, reps: int, *, workers: int = 1,
              truth: PopulationParams | None = None) -> ReplicationSummary:
    """Run ``reps`` independent sequential experiments and aggregate them.

    Raises:
        ReplicationError: a replication failed or hit the cap; carries its index.
    """
    if reps < 2:
        raise InsufficientReplicationsError(f"reps must be >= 2, got {reps}")
    truth = truth or population_params(model)
    log.info("study %s: %d replications, %d worker(s)", model, reps, workers)
    raw = run_replications(model, config, reps, workers=workers)
    return summarize(model, config, raw, truth)


def run_second_order_batches(model: PopulationModel, config: StudyConfig, batch_reps: int,
                             batches: int, *, workers: int = 1,
                             truth: PopulationParams | None = None) -> list[BatchDiff]:
    """Independent batch estimates of ``E[N] - n_c`` and ``R_N - 2 c n_c``."""
    if batch_reps < 2:
        raise InsufficientReplicationsError(f"batch_reps must be >= 2, got {batch_reps}")
    if batches < 1:
        raise ValidationError(f"batches must be >= 1, got {batches}")
    truth = truth or population_params(model)
    out = []
    for b in range(batches):
        raw = run_replications(model, config, batch_reps, prefix=(BATCH, b), workers=workers)
        rep = report_from_arrays(raw[:, COL_N], raw[:, COL_GINI], raw[:, COL_V2],
                                 truth.gini, truth.xi2, config.A, config.c)
        out.append(BatchDiff(rep.n_bar - rep.n_c, rep.regret_difference, rep.plugin_regret_difference))
    return out


class FixedNRecord(NamedTuple):
    n: int
    reps: int
    mse: float
    mse_se: float

    @property
    def n_mse(self) -> float:
        return self.n * self.mse

    @property
    def n_mse_se(self) -> float:
        return self.n * self.mse_se


def sorted_gini_rows(samples: np.ndarray) -> np.ndarray:
    """Gini index of each row of a 2-D array."""
    xs = np.sort(samples, axis=1)
    n = xs.shape[1]
    w = 2.0 * np.arange(1, n + 1) - n - 1.0
    return (xs @ w) / (0.5 * n * (n - 1)) / (2.0 * xs.mean(axis=1))


def run_fixed_n_study(model: PopulationModel, n: int, reps: int, seed: int, *,
                      truth: PopulationParams | None = None) -> FixedNRecord:
    """MSE of the Gini index over ``reps`` samples of exactly ``n`` observations."""
    if n < 4:
        raise ValidationError(f"n must be >= 4, got {n}")
    if reps < 2:
        raise InsufficientReplicationsError(f"reps must be >= 2, got {reps}")
    truth = truth or population_params(model)
    ginis = np.empty(reps)
    step = 1024
    for start in range(0, reps, step):
        stop = min(start + step, reps)
        block = np.stack([model.sample(make_rng(replication_seed(seed, FIXED_N, r)), n)
                          for r in range(start, stop)])
        ginis[start:stop] = sorted_gini_rows(block)
    mse = mean_se((ginis - truth.gini) ** 2)
    return FixedNRecord(n, reps, mse.mean, mse.se)
