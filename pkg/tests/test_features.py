import math
from dataclasses import replace

import numpy as np
import pandas as pd
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from numpy.testing import assert_allclose, assert_array_equal
from scipy import stats

from proxsim.features import (
    FeatureOptions,
    FeatureView,
    anomaly_flags,
    build_feature_matrix,
    interaction,
    load_feature_matrix,
    rolling_stats,
    save_feature_matrix,
    scenario_aggregates,
    view_columns,
)
from proxsim.scenario import PRIVILEGED_COLUMNS, ScenarioConfig, generate_records

finite = st.floats(-1e6, 1e6, allow_nan=False)


def test_rolling_example():
    std, grad = rolling_stats([1.0, 2.0, 3.0], 3)
    assert_allclose(std, [math.sqrt(0.5), 1.0, math.sqrt(0.5)])
    assert_allclose(grad, [1.0, 1.0, 1.0])


@given(arrays(float, st.integers(3, 40), elements=finite))
def test_rolling_matches_pandas(x):
    std, grad = rolling_stats(x, 3)
    ref = pd.Series(x).rolling(3, center=True, min_periods=2).std(ddof=1).to_numpy()
    # pandas uses an online update whose cancellation error scales with max|x|
    assert_allclose(std, ref, rtol=1e-7, atol=1e-7 * (1 + np.abs(x).max()))
    assert_allclose(grad, np.gradient(x))


@given(arrays(float, st.integers(3, 30), elements=st.floats(-1e3, 1e3)), st.floats(-1e3, 1e3))
def test_rolling_offset_invariant(x, c):
    assert_allclose(rolling_stats(x + c)[0], rolling_stats(x)[0], atol=1e-8)


def test_rolling_errors():
    with pytest.raises(ValueError):
        rolling_stats([1.0, 2.0], 3)
    with pytest.raises(ValueError):
        rolling_stats([1.0, 2.0, 3.0], 1)


def test_anomaly_constant_and_spike():
    x = np.full(100, 5.0)
    assert_array_equal(anomaly_flags(x), 0)
    x[60] = 6.0
    f = anomaly_flags(x)
    assert f[60] == 1 and f.sum() >= 1
    assert_array_equal(f[:16], 0)


def test_anomaly_short_series():
    assert_array_equal(anomaly_flags(np.arange(10.0), 16), 0)


def test_anomaly_reference_excludes_current():
    rng = np.random.default_rng(0)
    x = rng.normal(size=40)
    f = anomaly_flags(x, 16, 3.0)
    for i in range(16, 40):
        ref = x[i - 16:i]
        assert f[i] == int(abs(x[i] - ref.mean()) > 3.0 * ref.std(ddof=1))


def test_anomaly_false_alarm_rate():
    # for iid Gaussian input, (x - mean)/(s*sqrt(1+1/n)) is Student t with n-1 dof
    n, z = 16, 3.0
    exact = 2 * stats.t.sf(z / math.sqrt(1 + 1 / n), n - 1)
    x = np.random.default_rng(1).normal(size=400_000)
    rate = anomaly_flags(x, n, z)[n:].mean()
    assert rate == pytest.approx(exact, abs=0.0008)


def test_aggregates():
    agg = scenario_aggregates([1.0, 3.0, 5.0, 7.0])
    assert agg == {"min": 1.0, "max": 7.0, "mean": 4.0, "slope": 2.0}
    with pytest.raises(ValueError):
        scenario_aggregates([1.0])


@given(arrays(float, st.integers(2, 50), elements=st.floats(-1e4, 1e4)))
def test_slope_matches_polyfit(x):
    slope = np.polyfit(np.arange(x.size), x, 1)[0]
    assert scenario_aggregates(x)["slope"] == pytest.approx(slope, abs=1e-6 * (1 + np.abs(x).max()))


def test_interaction_ops():
    assert_allclose(interaction([10.0, 100.0], [3.0, 3.0], "mul"), [30.0, 300.0])
    # 10 log10(r^2 * 10^(j/10)) == j + 20 log10 r
    r, j = np.array([1e3, 4e7]), np.array([-20.0, 5.0])
    assert_allclose(interaction(r, j, "pow_db"), 10 * np.log10(r**2 * 10 ** (j / 10)))
    with pytest.raises(ValueError):
        interaction([1.0], [1.0], "div")


def test_view_columns():
    rf, kin, fused = (view_columns(v) for v in FeatureView)
    assert not set(rf) & set(kin)
    assert len(fused) == len(rf) + len(kin) + 3
    assert fused[: len(rf)] == rf
    for cols in (rf, kin, fused):
        assert not set(cols) & set(PRIVILEGED_COLUMNS)
        assert len(set(cols)) == len(cols)
    assert len(rf) == 5 + 6 + 3
    assert len(kin) == 15 + 20


@pytest.fixture(scope="module")
def records():
    return list(generate_records(ScenarioConfig(n_scenarios_per_cell=2)))


@pytest.mark.parametrize("view", list(FeatureView))
def test_build_matrix(records, view):
    fm = build_feature_matrix(records, view)
    assert fm.X.shape == (18 * 864, len(view_columns(view)))
    assert np.all(np.isfinite(fm.X))
    assert fm.columns == view_columns(view)
    assert sorted(np.unique(fm.y).tolist()) == [0, 1, 2]
    assert np.unique(fm.groups).size == 18
    for g in np.unique(fm.groups):
        assert np.unique(fm.y[fm.groups == g]).size == 1


def test_fused_contains_views(records):
    mats = {v: build_feature_matrix(records, v) for v in FeatureView}
    fused = mats[FeatureView.FUSED]
    for v in (FeatureView.RF_ONLY, FeatureView.KIN_ONLY):
        idx = [fused.columns.index(c) for c in mats[v].columns]
        assert_array_equal(fused.X[:, idx], mats[v].X)


def test_save_load_round_trip(records, tmp_path):
    fm = build_feature_matrix(records, "fused")
    save_feature_matrix(fm, tmp_path)
    back = load_feature_matrix(tmp_path, "fused")
    assert back.columns == fm.columns
    assert_allclose(back.X, fm.X, rtol=1e-9)
    for a in ("y", "groups", "jam_state", "regime"):
        assert_array_equal(getattr(back, a), getattr(fm, a))


def test_dir_and_records_agree(records, tmp_path):
    from proxsim.scenario import generate_dataset

    generate_dataset(ScenarioConfig(n_scenarios_per_cell=2), tmp_path, workers=1)
    a = build_feature_matrix(tmp_path, "kin")
    b = build_feature_matrix(records, "kin")
    assert_array_equal(a.groups, b.groups)
    # CSV keeps 10 significant digits
    assert_allclose(a.X, b.X, rtol=1e-8, atol=1e-12)


def test_custom_options(records):
    opts = FeatureOptions(rolling_window=5, interactions=())
    cols = view_columns(FeatureView.FUSED, opts)
    assert "rssi_dbm_rstd5" in cols and "range_sq_x_jsr_db" not in cols
    fm = build_feature_matrix(records[:3], FeatureView.FUSED, opts)
    assert fm.X.shape[1] == len(cols)
