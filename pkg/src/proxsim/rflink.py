"""Uplink/jammer link budget, RF observables, burst jammer and receiver estimation noise."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .relmotion import SPEED_OF_LIGHT

BOLTZMANN = 1.380649e-23  # J/K
JAM_OFF_DB = -400.0  # finite stand-in for -inf dB in serialized data
MAX_SEGMENT = 500
MIN_SEGMENT = 1


class LinkParameterError(ValueError):
    pass


@dataclass(frozen=True)
class LinkConfig:
    """RF link constants. Angles in radians, powers in dBW, gains in dBi.

    The ground-station EIRP (tx_power + tx_gain_max) gives about 15 dB
    clear-sky SNR on-axis over the ~35,800 km uplink. The ``sigma_*``
    fields are the receiver estimation-noise standard deviations at noise
    scale 1; ``sigma_throughput_rel`` is relative to the throughput value.
    """

    f_c: float = 14.25e9
    bandwidth: float = 36e6
    tx_power: float = 5.5
    tx_gain_max: float = 50.0
    rx_gain_max: float = 40.0
    theta_3db: float = math.radians(0.5)
    sidelobe_floor: float = 0.0
    t_sys: float = 500.0
    pointing_jitter_std: float = math.radians(0.02)
    power_jitter_db: float = 0.5
    sigma_rssi: float = 1.0
    sigma_cfo: float = 50.0
    sigma_doppler_est: float = 20.0
    sigma_throughput_rel: float = 0.03
    sigma_jsr: float = 1.5

    def __post_init__(self):
        if self.f_c <= 0 or self.bandwidth <= 0 or self.t_sys <= 0:
            raise LinkParameterError("f_c, bandwidth and t_sys must be positive")
        if self.sidelobe_floor >= self.rx_gain_max:
            raise LinkParameterError("sidelobe floor must be below the peak receive gain")
        if self.theta_3db <= 0:
            raise LinkParameterError("theta_3db must be positive")
        for name in ("pointing_jitter_std", "power_jitter_db", "sigma_rssi", "sigma_cfo",
                     "sigma_doppler_est", "sigma_throughput_rel", "sigma_jsr"):
            if getattr(self, name) < 0:
                raise LinkParameterError(f"{name} must be non-negative")

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.f_c

    @property
    def noise_power_w(self) -> float:
        return BOLTZMANN * self.t_sys * self.bandwidth

    @property
    def signal_eirp(self) -> float:
        return self.tx_power + self.tx_gain_max

    def without_jitter(self) -> "LinkConfig":
        return replace(self, pointing_jitter_std=0.0, power_jitter_db=0.0)


@dataclass(frozen=True)
class BurstParams:
    """Two-state jammer chain: p_on is OFF->ON per step, p_off is ON->OFF."""

    p_on: float
    p_off: float
    clamp: tuple[int, int] = (MIN_SEGMENT, MAX_SEGMENT)

    def __post_init__(self):
        if not (0.0 < self.p_on <= 1.0 and 0.0 < self.p_off <= 1.0):
            raise LinkParameterError(f"burst probabilities must lie in (0, 1], got {self.p_on, self.p_off}")
        lo, hi = self.clamp
        if not 1 <= lo <= hi:
            raise LinkParameterError("segment clamp needs 1 <= min <= max")

    @property
    def duty_cycle(self) -> float:
        return self.p_on / (self.p_on + self.p_off)


@dataclass(frozen=True)
class LinkMetrics:
    """Per-timestep RF observables for one scenario (columnar).

    ``p_jam`` and ``jsr_db`` are -inf where the jammer is off.
    """

    t: np.ndarray
    p_sig: np.ndarray
    p_jam: np.ndarray
    sjnr_db: np.ndarray
    rssi_dbm: np.ndarray
    throughput_mbps: np.ndarray
    cn0_dbhz: np.ndarray
    jsr_db: np.ndarray
    cfo_noise_hz: np.ndarray
    doppler_hz: np.ndarray
    jam_state: np.ndarray


def fspl_db(distance, f_c: float):
    wavelength = SPEED_OF_LIGHT / f_c
    return 20.0 * np.log10(4.0 * math.pi * np.asarray(distance, dtype=float) / wavelength)


def rx_gain(theta, cfg: LinkConfig):
    """Parabolic main lobe, 12 dB down at theta_3db, floored at the sidelobe level."""
    theta = np.asarray(theta, dtype=float)
    return np.maximum(cfg.rx_gain_max - 12.0 * (theta / cfg.theta_3db) ** 2, cfg.sidelobe_floor)


def received_power(distance, off_axis, cfg: LinkConfig, role: str = "signal",
                   rng: np.random.Generator | None = None, eirp_dbw: float | None = None):
    """Received power (dBW) at the GEO receiver.

    ``role="signal"`` uses the ground-station EIRP from ``cfg``; ``"jammer"``
    requires ``eirp_dbw``. Pointing jitter perturbs the off-axis angle and
    power jitter the transmit level; both draws need ``rng`` when non-zero.
    """
    distance = np.asarray(distance, dtype=float)
    if np.any(distance <= 0):
        raise LinkParameterError("link distance must be positive")
    if role == "signal":
        eirp = cfg.signal_eirp
    elif role == "jammer":
        if eirp_dbw is None:
            raise LinkParameterError("jammer role needs eirp_dbw")
        eirp = eirp_dbw
    else:
        raise LinkParameterError(f"unknown link role {role!r}")

    theta = np.broadcast_to(np.asarray(off_axis, dtype=float), distance.shape)
    eirp = np.full(distance.shape, float(eirp))
    if cfg.pointing_jitter_std > 0 or cfg.power_jitter_db > 0:
        if rng is None:
            raise LinkParameterError("jitter enabled but no rng supplied")
        if cfg.pointing_jitter_std > 0:
            theta = np.abs(theta + rng.normal(0.0, cfg.pointing_jitter_std, distance.shape))
        if cfg.power_jitter_db > 0:
            eirp = eirp + rng.normal(0.0, cfg.power_jitter_db, distance.shape)
    out = eirp + rx_gain(theta, cfg) - fspl_db(distance, cfg.f_c)
    return out if out.ndim else float(out)


def link_metrics(p_sig_dbw, p_jam_dbw, cfg: LinkConfig, t=None, doppler_hz=None) -> LinkMetrics:
    """Noise-free RF observables from received powers (p_jam = -inf when off)."""
    p_sig = np.atleast_1d(np.asarray(p_sig_dbw, dtype=float))
    p_jam = np.broadcast_to(np.asarray(p_jam_dbw, dtype=float), p_sig.shape).copy()
    n = p_sig.shape[0]
    noise = cfg.noise_power_w
    with np.errstate(divide="ignore"):
        sjnr_lin = 10.0 ** (p_sig / 10.0) / (10.0 ** (p_jam / 10.0) + noise)
        sjnr_db = 10.0 * np.log10(sjnr_lin)
    jam_on = np.isfinite(p_jam)
    jsr = np.where(jam_on, p_jam - p_sig, -np.inf)
    return LinkMetrics(
        t=np.arange(n, dtype=float) if t is None else np.asarray(t, dtype=float),
        p_sig=p_sig,
        p_jam=p_jam,
        sjnr_db=sjnr_db,
        rssi_dbm=p_sig + 30.0,
        throughput_mbps=cfg.bandwidth / 1e6 * np.log2(1.0 + sjnr_lin),
        cn0_dbhz=p_sig - 10.0 * math.log10(BOLTZMANN * cfg.t_sys),
        jsr_db=jsr,
        cfo_noise_hz=np.zeros(n),
        doppler_hz=np.zeros(n) if doppler_hz is None else np.asarray(doppler_hz, dtype=float),
        jam_state=jam_on.astype(np.int8),
    )


def sample_jammer_activity(params: BurstParams, n: int, rng: np.random.Generator) -> np.ndarray:
    """Binary ON/OFF series of length ``n`` from alternating geometric dwells.

    OFF dwells have mean 1/p_on and ON dwells mean 1/p_off, each clamped to
    ``params.clamp``; the first state is drawn from the stationary law.
    """
    if n < 1:
        raise LinkParameterError("need at least one sample")
    lo, hi = params.clamp
    first = int(rng.uniform() < params.duty_cycle)
    mean_pair = 1.0 / params.p_on + 1.0 / params.p_off
    lengths, values, total = [], [], 0
    while total < n:
        k = int((n - total) / mean_pair * 1.1) + 8
        # dwell for the current state comes first in each pair
        p_first, p_second = (params.p_off, params.p_on) if first else (params.p_on, params.p_off)
        pair = np.empty(2 * k, dtype=np.int64)
        pair[0::2] = rng.geometric(p_first, k)
        pair[1::2] = rng.geometric(p_second, k)
        pair = np.clip(pair, lo, hi)
        lengths.append(pair)
        values.append(np.tile(np.array([first, 1 - first], dtype=np.int8), k))
        total += int(pair.sum())
    lengths = np.concatenate(lengths)
    values = np.concatenate(values)
    return np.repeat(values, lengths)[:n]


def segment_lengths(series) -> tuple[np.ndarray, np.ndarray]:
    """Run lengths and their values for a binary series."""
    s = np.asarray(series)
    edges = np.flatnonzero(np.diff(s)) + 1
    starts = np.concatenate(([0], edges))
    ends = np.concatenate((edges, [s.size]))
    return ends - starts, s[starts]


def apply_estimation_noise(metrics: LinkMetrics, sigma: float, cfg: LinkConfig,
                           rng: np.random.Generator) -> LinkMetrics:
    """Receiver-side estimation error at noise scale ``sigma``.

    Every estimate gets zero-mean Gaussian error whose std is ``sigma`` times
    its base std in ``cfg``. The reported JSR is the in-band
    interference-plus-noise level relative to the carrier: a receiver cannot
    split jammer power from thermal noise once estimates are imperfect, so
    the jammer-off rows sit at the noise floor rather than at -inf. With
    ``sigma == 0`` the input is returned unchanged.
    """
    if sigma < 0:
        raise LinkParameterError("noise scale must be non-negative")
    if sigma == 0:
        return metrics
    n = metrics.t.shape[0]
    z = rng.standard_normal((5, n))
    noise_rel_db = 10.0 * np.log10(cfg.noise_power_w) - metrics.p_sig
    jsr_floor = 10.0 * np.log10(10.0 ** (metrics.jsr_db / 10.0) + 10.0 ** (noise_rel_db / 10.0))
    return replace(
        metrics,
        rssi_dbm=metrics.rssi_dbm + sigma * cfg.sigma_rssi * z[0],
        throughput_mbps=np.maximum(
            metrics.throughput_mbps * (1.0 + sigma * cfg.sigma_throughput_rel * z[1]), 0.0),
        jsr_db=jsr_floor + sigma * cfg.sigma_jsr * z[2],
        cfo_noise_hz=metrics.cfo_noise_hz + sigma * cfg.sigma_cfo * z[3],
        doppler_hz=metrics.doppler_hz + sigma * cfg.sigma_doppler_est * z[4],
    )
