import math

import numpy as np
import pytest

from seqgini.engine import StudyConfig
from seqgini.errors import InsufficientReplicationsError, ReplicationError, ValidationError
from seqgini.harness import (
    COL_N,
    BATCH,
    STUDY,
    ReplicationSummary,
    replication_seed,
    run_fixed_n_study,
    run_replications,
    run_second_order_batches,
    run_study,
    sorted_gini_rows,
)
from seqgini.estimators import gini
from seqgini.population import STUDY_MODELS, PopulationParams, population_params

CFG = StudyConfig()


def test_workers_do_not_change_results():
    model = STUDY_MODELS["gamma"]
    a = run_study(model, CFG, 40, workers=1)
    b = run_study(model, CFG, 40, workers=3)
    assert a == b
    assert np.array_equal(a.raw, b.raw)


def test_seed_changes_results():
    model = STUDY_MODELS["exponential"]
    a = run_replications(model, CFG, 10)
    b = run_replications(model, CFG.with_(seed=2), 10)
    assert not np.array_equal(a, b)


def test_prefix_separates_streams():
    model = STUDY_MODELS["exponential"]
    study = run_replications(model, CFG, 5, prefix=(STUDY,))
    batch = run_replications(model, CFG, 5, prefix=(BATCH, 0))
    assert not np.array_equal(study, batch)


def test_seed_derivation_is_structural():
    keys = {replication_seed(1, STUDY, r).generate_state(2).tobytes() for r in range(1000)}
    keys |= {replication_seed(1, BATCH, b, r).generate_state(2).tobytes() for b in range(3) for r in range(1000)}
    assert len(keys) == 4000


def test_replications_are_prefix_stable():
    model = STUDY_MODELS["lognormal"]
    assert np.array_equal(run_replications(model, CFG, 7), run_replications(model, CFG, 12)[:7])


def test_constant_stub_study(constant_model, constant_truth):
    s = run_study(constant_model, CFG, 2, truth=constant_truth)
    assert s.n_bar == CFG.m and s.se_n == 0
    assert s.max_n == s.min_n == CFG.m
    assert s.gini_mean == 0 and s.v2_mean == 0


def test_constant_stub_batches(constant_model):
    # a truth whose n_c rounds to the deterministic stopping time m
    n_c = 10.3
    truth = PopulationParams(mu=3.0, sigma2=0.0, delta=0.0, sigma1_2=0.0, tau=0.0,
                             xi2=(n_c / CFG.scale) ** 2, gini=0.0)
    diffs = run_second_order_batches(constant_model, CFG, 3, 4, truth=truth)
    assert len(diffs) == 4
    for d in diffs:
        assert d.n_diff == pytest.approx(round(n_c) - n_c, abs=1e-12)
        assert d.regret_diff == pytest.approx(CFG.c * (round(n_c) - 2 * n_c), abs=1e-12)


def test_constant_stub_fixed_n(constant_model, constant_truth):
    rec = run_fixed_n_study(constant_model, 50, 10, 1, truth=constant_truth)
    assert rec.mse == 0 and rec.mse_se == 0


def test_summary_invariants():
    s = run_study(STUDY_MODELS["exponential"], CFG, 60)
    assert s.reps == 60
    assert s.max_n >= s.n_bar >= CFG.m
    assert min(s.se_n, s.gini_se, s.sw2_se, s.tau_se, s.v2_se) >= 0
    assert s.risk_report.n_ratio == pytest.approx(s.n_bar / s.risk_report.n_c, rel=1e-12)
    assert s.raw.shape == (60, 5)


def test_summary_record_round_trip():
    s = run_study(STUDY_MODELS["gamma"], CFG, 5)
    rec = s.to_record()
    assert ReplicationSummary.from_record(rec) == s
    assert ReplicationSummary.from_record({k: repr(v) if isinstance(v, float) else str(v)
                                           for k, v in rec.items()}) == s


def test_validation():
    model = STUDY_MODELS["exponential"]
    with pytest.raises(InsufficientReplicationsError):
        run_study(model, CFG, 1)
    with pytest.raises(ValidationError):
        run_replications(model, CFG, 5, workers=0)
    with pytest.raises(InsufficientReplicationsError):
        run_second_order_batches(model, CFG, 1, 3)
    with pytest.raises(ValidationError):
        run_fixed_n_study(model, 3, 10, 1)


def test_cap_becomes_replication_error():
    with pytest.raises(ReplicationError) as info:
        run_study(STUDY_MODELS["exponential"], CFG.with_(cap=20), 3)
    assert info.value.replication == 0


def test_sorted_gini_rows(rng):
    block = rng.exponential(size=(5, 40))
    want = [gini(row) for row in block]
    assert np.allclose(sorted_gini_rows(block), want, rtol=1e-12)


@pytest.mark.slow
def test_fixed_n_remainder_shrinks():
    # the remainder at n = 100 is about 0.001, so the replication counts are
    # sized to push the standard errors to 2e-4 and 4e-4
    model = STUDY_MODELS["exponential"]
    xi2 = population_params(model).xi2
    small = run_fixed_n_study(model, 100, 400_000, 3)
    large = run_fixed_n_study(model, 800, 100_000, 3)
    assert small.n_mse_se < 2.5e-4 and large.n_mse_se < 5e-4
    assert abs(large.n_mse - xi2) < abs(small.n_mse - xi2)


@pytest.mark.slow
def test_finite_stopping_1e5_runs():
    # 10^5 replications at the published settings, split over the three models
    for i, model in enumerate(STUDY_MODELS.values()):
        reps = 33_334 if i < 2 else 33_332
        raw = run_replications(model, CFG, reps, prefix=(7, i))
        assert raw[:, COL_N].max() < CFG.cap
