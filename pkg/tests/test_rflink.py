import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from numpy.testing import assert_allclose, assert_array_equal

from proxsim.rflink import (
    BOLTZMANN,
    BurstParams,
    LinkConfig,
    LinkParameterError,
    apply_estimation_noise,
    fspl_db,
    link_metrics,
    received_power,
    rx_gain,
    sample_jammer_activity,
    segment_lengths,
)

QUIET = LinkConfig().without_jitter()
CLASS_BURSTS = {"benign": (0.05, 0.8), "covert": (0.15, 0.6), "threatening": (0.5, 0.15)}


def test_fspl_reference():
    # textbook form: 92.45 + 20 log10(d_km) + 20 log10(f_GHz)
    textbook = 92.45 + 20 * math.log10(40_000) + 20 * math.log10(14.25)
    assert fspl_db(40_000e3, 14.25e9) == pytest.approx(textbook, abs=0.01)
    assert fspl_db(40_000e3, 14.25e9) == pytest.approx(207.565, abs=1e-3)


def test_received_power_example():
    p = received_power(40_000e3, 0.0, QUIET, "jammer", eirp_dbw=90.0)
    assert p == pytest.approx(90 + 40 - 207.565, abs=1e-3)


def test_doubling_distance_costs_6db():
    p1 = received_power(1e7, 0.0, QUIET)
    p2 = received_power(2e7, 0.0, QUIET)
    assert p1 - p2 == pytest.approx(20 * math.log10(2), abs=1e-12)


def test_gain_pattern():
    assert rx_gain(0.0, QUIET) == 40.0
    assert rx_gain(QUIET.theta_3db, QUIET) == pytest.approx(28.0, abs=1e-12)
    assert rx_gain(math.radians(10), QUIET) == QUIET.sidelobe_floor


@given(st.floats(1e3, 1e8), st.floats(1e3, 1e8), st.floats(0, 0.02), st.floats(0, 0.02))
def test_power_monotone(d1, d2, th1, th2):
    (d1, d2), (th1, th2) = sorted((d1, d2)), sorted((th1, th2))
    assert received_power(d1, th1, QUIET) >= received_power(d2, th1, QUIET)
    assert received_power(d1, th1, QUIET) >= received_power(d1, th2, QUIET)


def test_power_errors():
    with pytest.raises(LinkParameterError):
        received_power(0.0, 0.0, QUIET)
    with pytest.raises(LinkParameterError):
        received_power(1e7, 0.0, QUIET, "jammer")
    with pytest.raises(LinkParameterError):
        received_power(1e7, 0.0, LinkConfig())  # jitter on, no rng
    with pytest.raises(LinkParameterError):
        LinkConfig(sidelobe_floor=45.0)
    with pytest.raises(LinkParameterError):
        LinkConfig(t_sys=0.0)


def test_clear_sky_snr_about_15db():
    slant = 35_814.6e3
    p_sig = received_power(slant, 0.0, QUIET)
    noise_db = 10 * math.log10(QUIET.noise_power_w)
    assert noise_db == pytest.approx(-228.6 + 10 * math.log10(500) + 10 * math.log10(36e6), abs=0.01)
    assert p_sig - noise_db == pytest.approx(15.0, abs=0.1)


def test_metrics_examples():
    n_dbw = 10 * math.log10(QUIET.noise_power_w)
    p_sig = n_dbw + 10 * math.log10(3.0)
    m = link_metrics(np.array([p_sig]), -np.inf, QUIET)
    assert m.throughput_mbps[0] == pytest.approx(72.0, rel=1e-12)
    assert m.jsr_db[0] == -np.inf and m.jam_state[0] == 0
    assert m.sjnr_db[0] == pytest.approx(10 * math.log10(3.0))
    m = link_metrics(np.array([-130.0]), np.array([-130.0]), QUIET)
    assert m.rssi_dbm[0] == -100.0
    assert m.jsr_db[0] == 0.0 and m.jam_state[0] == 1
    assert m.cn0_dbhz[0] == pytest.approx(-130 - 10 * math.log10(BOLTZMANN * 500))


@given(st.floats(-150, -90), st.lists(st.floats(-160, -80), min_size=2, max_size=10, unique=True))
def test_sjnr_and_throughput_monotone(p_sig, p_jams):
    p_jam = np.sort(np.array(p_jams))
    m = link_metrics(np.full(p_jam.size, p_sig), p_jam, QUIET)
    assert np.all(np.diff(m.sjnr_db) <= 0)
    assert np.all(np.diff(m.throughput_mbps) <= 0)
    assert np.all(m.throughput_mbps >= 0)
    assert_allclose(m.rssi_dbm - m.p_sig, 30.0, rtol=0, atol=1e-12)


@pytest.mark.parametrize("name", list(CLASS_BURSTS))
def test_duty_cycle_converges(name):
    p_on, p_off = CLASS_BURSTS[name]
    params = BurstParams(p_on, p_off)
    s = sample_jammer_activity(params, 1_000_000, np.random.default_rng(3))
    assert s.size == 1_000_000
    assert abs(s.mean() - params.duty_cycle) < 0.02
    lengths, values = segment_lengths(s)
    assert lengths.min() >= 1 and lengths.max() <= 500
    # dwell means: ON ~ 1/p_off, OFF ~ 1/p_on (interior segments only)
    inner_l, inner_v = lengths[1:-1], values[1:-1]
    assert inner_l[inner_v == 1].mean() == pytest.approx(1 / p_off, rel=0.03)
    assert inner_l[inner_v == 0].mean() == pytest.approx(1 / p_on, rel=0.03)


def test_duty_table_values():
    duties = {k: BurstParams(*v).duty_cycle for k, v in CLASS_BURSTS.items()}
    assert duties["benign"] == pytest.approx(0.06, abs=0.005)
    assert duties["covert"] == pytest.approx(0.20, abs=0.005)
    assert duties["threatening"] == pytest.approx(0.77, abs=0.005)


def test_segment_clamp():
    s = sample_jammer_activity(BurstParams(0.001, 0.001, clamp=(3, 50)), 100_000, np.random.default_rng(0))
    lengths, _ = segment_lengths(s)
    assert lengths[1:-1].min() >= 3 and lengths.max() <= 50


def test_burst_validation():
    for bad in [(0.0, 0.5), (0.5, 0.0), (1.5, 0.5)]:
        with pytest.raises(LinkParameterError):
            BurstParams(*bad)
    with pytest.raises(LinkParameterError):
        sample_jammer_activity(BurstParams(0.5, 0.5), 0, np.random.default_rng(0))


def _clean(n, rng):
    p_sig = -110.0 + rng.normal(0, 0.2, n)
    p_jam = np.where(rng.uniform(size=n) < 0.3, -115.0, -np.inf)
    return link_metrics(p_sig, p_jam, QUIET, doppler_hz=np.linspace(-1e3, 1e3, n))


def test_noise_sigma_zero_identity(rng):
    m = _clean(100, rng)
    assert apply_estimation_noise(m, 0.0, QUIET, rng) is m


def test_noise_statistics(rng):
    n = 1_000_000
    m = _clean(n, rng)
    noisy = apply_estimation_noise(m, 1.0, QUIET, rng)
    d = noisy.rssi_dbm - m.rssi_dbm
    assert d.std() == pytest.approx(QUIET.sigma_rssi, rel=0.01)
    lag1 = np.corrcoef(d[:-1], d[1:])[0, 1]
    assert abs(lag1) < 3 / math.sqrt(n)
    assert (noisy.cfo_noise_hz.std()) == pytest.approx(QUIET.sigma_cfo, rel=0.01)
    assert (noisy.doppler_hz - m.doppler_hz).std() == pytest.approx(QUIET.sigma_doppler_est, rel=0.01)
    rel = noisy.throughput_mbps / m.throughput_mbps - 1
    assert rel.std() == pytest.approx(QUIET.sigma_throughput_rel, rel=0.02)
    # privileged quantities untouched
    assert_array_equal(noisy.sjnr_db, m.sjnr_db)
    assert_array_equal(noisy.jam_state, m.jam_state)


def test_noise_scales_linearly(rng):
    m = _clean(200_000, rng)
    d2 = apply_estimation_noise(m, 2.0, QUIET, rng).rssi_dbm - m.rssi_dbm
    assert d2.std() == pytest.approx(2.0 * QUIET.sigma_rssi, rel=0.02)
    with pytest.raises(LinkParameterError):
        apply_estimation_noise(m, -1.0, QUIET, rng)


def test_jsr_reports_noise_floor_when_off(rng):
    m = _clean(50_000, rng)
    cfg = replace(QUIET, sigma_jsr=0.0)
    noisy = apply_estimation_noise(m, 1.0, cfg, rng)
    floor = 10 * math.log10(QUIET.noise_power_w) - m.p_sig
    off = m.jam_state == 0
    assert_allclose(noisy.jsr_db[off], floor[off], atol=1e-9)
    # on rows: jammer plus noise relative to carrier
    on = ~off
    expect = 10 * np.log10(10 ** (m.jsr_db[on] / 10) + 10 ** (floor[on] / 10))
    assert_allclose(noisy.jsr_db[on], expect, atol=1e-9)


def test_reproducible_with_seed():
    cfg = LinkConfig()
    a = received_power(np.full(100, 3e7), 0.001, cfg, rng=np.random.default_rng(9))
    b = received_power(np.full(100, 3e7), 0.001, cfg, rng=np.random.default_rng(9))
    assert_array_equal(a, b)
