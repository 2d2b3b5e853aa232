import math

import numpy as np
import pytest

from orderextend import (GroundTruthOracle, ObservedMatrix, critical_mask_size,
                         generate_low_rank, rel_error)
from orderextend.experiment import (CRITICAL_LINE, CSV_HEADER, ExperimentConfig,
                                    condition_number_variant, format_rows,
                                    random_extend_baseline, run_experiment)

from conftest import observed_instance


def test_config_validation():
    ExperimentConfig(rank=2, budgets=[0, 5], seeds=[1])
    with pytest.raises(ValueError, match="strictly increasing"):
        ExperimentConfig(rank=2, budgets=[5, 5], seeds=[1])
    with pytest.raises(ValueError, match="nonnegative"):
        ExperimentConfig(rank=2, budgets=[-1], seeds=[1])
    with pytest.raises(ValueError, match="fraction"):
        ExperimentConfig(rank=2, budgets=[0], seeds=[1], initial_mask_fraction=1.0)
    with pytest.raises(ValueError, match="unknown"):
        ExperimentConfig(rank=2, budgets=[0], seeds=[1], algorithms=["magic"])


def test_random_extend_baseline(rng):
    T, obs = observed_instance(8, 6, 2, 10, seed=0)
    same = random_extend_baseline(obs, T, 0, seed=1)
    np.testing.assert_array_equal(same.mask, obs.mask)
    full = random_extend_baseline(obs, T, 38, seed=1)
    assert full.mask.all()
    np.testing.assert_array_equal(full.values, T)
    a = random_extend_baseline(obs, T, 12, seed=4)
    b = random_extend_baseline(obs, T, 12, seed=4)
    np.testing.assert_array_equal(a.mask, b.mask)
    assert a.n_observed == 22
    with pytest.raises(ValueError):
        random_extend_baseline(obs, T, 39, seed=1)


def test_run_experiment_rows_and_critical_line():
    T = generate_low_rank(30, 20, 2, seed=0)
    phi = critical_mask_size(30, 20, 2)
    m0 = round(0.4 * phi)
    cfg = ExperimentConfig(rank=2, budgets=[0, 40, 150], seeds=[0, 1],
                           algorithms=["order_extend", "random_baseline", "sequential"])
    rows = run_experiment(T, cfg)
    crit = [r for r in rows if r.algorithm == CRITICAL_LINE]
    assert [(r.b, r.seed) for r in crit] == [(phi - m0, 0), (phi - m0, 1)]
    runs = [r for r in rows if r.algorithm != CRITICAL_LINE]
    assert len(runs) == 2 * 3 * 3
    for r in runs:
        assert r.queries_used <= r.b
        assert 0.0 <= r.recovered_fraction <= 1.0
        assert math.isnan(r.wall_time_s)
    oe = {(r.seed, r.b): r for r in runs if r.algorithm == "order_extend"}
    assert oe[(0, 0)].queries_used == 0
    assert oe[(0, 150)].rel_error < 1e-6 and oe[(1, 150)].rel_error < 1e-6
    assert rows == sorted(rows, key=lambda r: (r.seed, r.b, r.algorithm))


def test_run_experiment_is_deterministic_across_threads(monkeypatch):
    T = generate_low_rank(20, 15, 2, noise_scale=0.01, seed=3)
    cfg = ExperimentConfig(rank=2, budgets=[0, 30, 60], seeds=[0, 1, 2])
    one = format_rows(run_experiment(T, cfg))
    monkeypatch.setenv("AMC_THREADS", "4")
    assert format_rows(run_experiment(T, cfg)) == one
    assert one.splitlines()[0] == CSV_HEADER


def test_timing_is_opt_in():
    T = generate_low_rank(15, 12, 2, seed=3)
    rows = run_experiment(T, ExperimentConfig(rank=2, budgets=[10], seeds=[0],
                                              algorithms=["order_extend"]), timing=True)
    assert rows[0].wall_time_s >= 0.0


def test_condition_number_variant_exact_data():
    T, obs = observed_instance(30, 20, 2, 40, seed=2)
    for threshold in (5.0, 100.0):
        rep = condition_number_variant(obs, 2, threshold, GroundTruthOracle(T, 500), 500)
        assert rel_error(T, rep.estimate) < 1e-6


def test_condition_number_variant_identity_never_extends():
    T = np.eye(3)
    obs = ObservedMatrix.from_truth(T, np.ones((3, 3), bool))
    rep = condition_number_variant(obs, 3, 5.0, GroundTruthOracle(T, 10), 10)
    assert rep.queries_used == 0 and rep.stabilizations == 0
    assert rel_error(T, rep.estimate) < 1e-12


def test_baseline_no_better_near_critical_budget():
    wins = 0
    phi = critical_mask_size(40, 30, 3)
    m0 = round(0.4 * phi)
    for seed in range(10):
        T = generate_low_rank(40, 30, 3, seed=seed)
        cfg = ExperimentConfig(rank=3, budgets=[phi - m0], seeds=[seed])
        rows = {r.algorithm: r for r in run_experiment(T, cfg)}
        wins += rows["random_baseline"].rel_error >= rows["order_extend"].rel_error
    assert wins >= 9
