import numpy as np
import pytest

from sharedsvd import ContractError, SimConfig, run_experiment, sin_theta
from sharedsvd.harness import (
    TABLE1_ROWS,
    TABLE2_ROWS,
    TABLE3_SETTINGS,
    table1_spec,
    table2_spec,
    table3_rows,
    tracing_spec,
)
from sharedsvd import build_signal, switch_profile


def test_preset_rows_match_published_designs():
    assert (10, 20, 20, 50, 50) == TABLE1_ROWS[0]
    assert len(TABLE1_ROWS) == 16
    assert len(TABLE2_ROWS) == 12
    assert len(table3_rows()) == sum(len(s.gaps) for s in TABLE3_SETTINGS.values())


def test_invalid_row_lists_valid_rows():
    with pytest.raises(ContractError) as err:
        SimConfig(preset="table1", row=99, trials=5)
    assert "1.." in str(err.value)


def test_run_experiment_basic_stats():
    cfg = SimConfig(preset="table1", row=1, trials=30, base_seed=5)
    report = run_experiment(cfg)
    assert set(report.rows) == {"individual_1", "individual_2", "stack", "average"}
    for stats in report.rows.values():
        assert 0 <= stats.mean <= 1
        assert stats.std >= 0
    assert report.trials == 30
    assert report.config["preset"] == "table1"


def test_run_experiment_reproducible_across_workers():
    a = run_experiment(SimConfig(preset="table1", row=1, trials=20, base_seed=9, workers=1))
    b = run_experiment(SimConfig(preset="table1", row=1, trials=20, base_seed=9, workers=4))
    for name in a.rows:
        assert a.rows[name].mean == b.rows[name].mean
        assert a.rows[name].std == b.rows[name].std


def test_trial_split_pools_exactly():
    whole = run_experiment(SimConfig(preset="table2", row=3, trials=50, base_seed=100,
                                     estimators=("stack",)))
    parts = []
    for j in range(5):
        rep = run_experiment(SimConfig(preset="table2", row=3, trials=10,
                                       base_seed=100 + 10 * j, estimators=("stack",)))
        parts.append(rep.rows["stack"].mean * 10)
    assert whole.rows["stack"].mean == pytest.approx(sum(parts) / 50, abs=1e-15)


def test_std_brackets_run_to_run_variation():
    means, stds = [], []
    for j in range(10):
        rep = run_experiment(SimConfig(preset="table1", row=1, trials=50,
                                       base_seed=10_000 + 50 * j, estimators=("stack",)))
        means.append(rep.rows["stack"].mean)
        stds.append(rep.rows["stack"].std)
    observed = np.std(means, ddof=1)
    predicted = np.mean(stds) / np.sqrt(50)
    assert predicted / 3 < observed < predicted * 3


def test_table3_preset_reports_accuracies():
    cfg = SimConfig(preset="table3", row=5, trials=40, base_seed=7)  # setting 1, largest gap
    report = run_experiment(cfg)
    assert set(report.rows) == {"trace_accuracy", "count_accuracy"}
    assert report.rows["trace_accuracy"].mean > 0.9


def test_custom_preset_with_oracle_and_shared():
    spec = table2_spec(10, 30, 30, 40, 45, seed=0)
    cfg = SimConfig(preset="custom", spec=spec, trials=15, base_seed=3,
                    estimators=("stack", "oracle", "shared"))
    report = run_experiment(cfg)
    assert set(report.rows) == {"stack", "oracle", "shared"}
    assert report.rows["oracle"].mean <= 0.5


def test_frobenius_loss_norm():
    cfg = SimConfig(preset="table1", row=1, trials=10, base_seed=1,
                    estimators=("stack",), loss_norm="frobenius_squared")
    report = run_experiment(cfg)
    spectral = run_experiment(SimConfig(preset="table1", row=1, trials=10, base_seed=1,
                                        estimators=("stack",)))
    assert report.rows["stack"].mean >= spectral.rows["stack"].mean


def test_tracing_spec_profile_matches_layout():
    for sid, setting in TABLE3_SETTINGS.items():
        for gap in setting.gaps:
            spec = tracing_spec(setting, gap, seed=11)
            prof = switch_profile(spec)
            expected_j = tuple(i + 1 for i, c in enumerate(setting.layout) if c == "s")
            assert prof.shared_index_set == expected_j
            # consecutive stacked gaps are gap_multiples * gap
            diffs = -np.diff(prof.stacked_values)
            assert np.allclose(diffs, np.array(setting.gap_multiples) * gap)
            assert np.min(diffs) == pytest.approx(gap)


def test_tracing_spec_noiseless_recovery():
    setting = TABLE3_SETTINGS[2]
    spec = tracing_spec(setting, 5.0, seed=2)
    pair = build_signal(spec)
    prof = switch_profile(spec)
    from sharedsvd import trace_shared
    out = trace_shared(pair.matrices[0], pair.matrices[1],
                       len(spec.unshared_labels(1)), len(spec.unshared_labels(2)), spec.r)
    assert out.shared_index_estimate == prof.shared_index_set
