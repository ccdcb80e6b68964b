"""Assemble the four simulation tables from replication studies."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

from .engine import StudyConfig
from .harness import COL_GINI, COL_N, BatchDiff, ReplicationSummary, run_second_order_batches, run_study
from .population import STUDY_MODELS, PopulationModel, PopulationParams, population_params

TABLE1_COLUMNS = ["distribution", "sw2_mean", "sw2_se", "four_sigma1_2", "tau_mean", "tau_se", "tau",
                  "v2_mean", "v2_se", "xi2"]
TABLE2_COLUMNS = ["distribution", "n_bar", "se_n_bar", "n_c", "n_ratio", "max_n", "r_bar", "se_r_bar",
                  "ratio", "r_bar_plugin", "se_r_bar_plugin", "ratio_plugin"]
RAW_COLUMNS = ["distribution", "replication", "n", "gini"]


def batch_columns(batches: int) -> list[str]:
    return [f"batch_{b + 1}" for b in range(batches)]


@dataclass
class TableSet:
    config: StudyConfig
    reps: int
    batches: int
    batch_reps: int
    truths: dict[str, PopulationParams] = field(default_factory=dict)
    summaries: dict[str, ReplicationSummary] = field(default_factory=dict)
    batch_diffs: dict[str, list[BatchDiff]] = field(default_factory=dict)

    def table1(self) -> list[dict]:
        rows = []
        for name, s in self.summaries.items():
            t = self.truths[name]
            rows.append(dict(distribution=name, sw2_mean=s.sw2_mean, sw2_se=s.sw2_se,
                             four_sigma1_2=4 * t.sigma1_2, tau_mean=s.tau_mean, tau_se=s.tau_se,
                             tau=t.tau, v2_mean=s.v2_mean, v2_se=s.v2_se, xi2=t.xi2))
        return rows

    def table2(self) -> list[dict]:
        rows = []
        for name, s in self.summaries.items():
            r = s.risk_report
            rows.append(dict(distribution=name, n_bar=s.n_bar, se_n_bar=s.se_n, n_c=r.n_c,
                             n_ratio=r.n_ratio, max_n=s.max_n, r_bar=r.empirical_risk,
                             se_r_bar=r.empirical_risk_se, ratio=r.ratio_regret,
                             r_bar_plugin=r.plugin_risk, se_r_bar_plugin=r.plugin_risk_se,
                             ratio_plugin=r.plugin_ratio_regret))
        return rows

    def table3(self) -> list[dict]:
        return [
            dict(distribution=name, **dict(zip(batch_columns(self.batches), (d.n_diff for d in diffs))))
            for name, diffs in self.batch_diffs.items()
        ]

    def table4(self) -> list[dict]:
        rows = []
        for name, diffs in self.batch_diffs.items():
            cols = batch_columns(self.batches)
            rows.append(dict(distribution=name, estimator="plugin",
                             **dict(zip(cols, (d.plugin_regret_diff for d in diffs)))))
            rows.append(dict(distribution=name, estimator="squared_error",
                             **dict(zip(cols, (d.regret_diff for d in diffs)))))
        return rows

    def raw_rows(self) -> list[dict]:
        rows = []
        for name, s in self.summaries.items():
            for r, row in enumerate(s.raw):
                rows.append(dict(distribution=name, replication=r, n=int(row[COL_N]), gini=float(row[COL_GINI])))
        return rows


def reproduce_tables(config: StudyConfig, *, reps: int = 5000, batches: int = 10, batch_reps: int = 500,
                     workers: int = 1, models: Mapping[str, PopulationModel] = STUDY_MODELS) -> TableSet:
    ts = TableSet(config=config, reps=reps, batches=batches, batch_reps=batch_reps)
    for name, model in models.items():
        truth = population_params(model)
        ts.truths[name] = truth
        ts.summaries[name] = run_study(model, config, reps, workers=workers, truth=truth)
        if batches:
            ts.batch_diffs[name] = run_second_order_batches(model, config, batch_reps, batches,
                                                            workers=workers, truth=truth)
    return ts
