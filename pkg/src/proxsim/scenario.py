"""End-to-end scenario generation and the on-disk dataset (CSV shards + manifest)."""

from __future__ import annotations

import hashlib
import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import _serde
from .orbital import (
    OMEGA_EARTH,
    R_EARTH,
    BehaviorClass,
    ConfigurationError,
    DeltaVPrior,
    ManeuverSpec,
    OrbitRegime,
    RegimeBands,
    default_dv_priors,
    elements_to_state,
    geo_target_elements,
    propagate_state,
    propagate_with_maneuver,
    sample_maneuver,
    sample_orbit,
)
from .relmotion import KinematicSeries, kinematic_series
from .rflink import (
    JAM_OFF_DB,
    BurstParams,
    LinkConfig,
    LinkMetrics,
    apply_estimation_noise,
    link_metrics,
    received_power,
    sample_jammer_activity,
)

log = logging.getLogger(__name__)

SCHEMA_VERSION = "proxsim-v1"
CLASSES = tuple(BehaviorClass)
REGIMES = tuple(OrbitRegime)

COLUMNS = (
    "scenario_id", "class", "regime", "t",
    "range_m", "range_rate_mps", "v_r", "v_t", "v_n", "a_r", "a_t", "a_n",
    "jerk", "curvature", "doppler_hz", "doppler_rate_hzs", "boresight_rad", "t_to_tca", "visibility",
    "rssi_dbm", "throughput_mbps", "cn0_dbhz", "jsr_db", "cfo_noise_hz",
    "sjnr_db", "jam_state",
)
PRIVILEGED_COLUMNS = ("sjnr_db", "jam_state")
_ROW_FORMAT = "%d,%s,%s," + ",".join(["%.10g"] * 15) + ",%d," + ",".join(["%.10g"] * 6) + ",%d"
MIN_PERIGEE_ALTITUDE = 100e3


class ScenarioError(RuntimeError):
    """Failure while generating a specific scenario."""


@dataclass(frozen=True)
class JammerProfile:
    burst: BurstParams
    eirp_dbw: float


def default_jammers() -> dict[BehaviorClass, JammerProfile]:
    return {
        BehaviorClass.BENIGN: JammerProfile(BurstParams(p_on=0.05, p_off=0.8), 70.0),
        BehaviorClass.COVERT: JammerProfile(BurstParams(p_on=0.15, p_off=0.6), 80.0),
        BehaviorClass.THREATENING: JammerProfile(BurstParams(p_on=0.5, p_off=0.15), 90.0),
    }


@dataclass(frozen=True)
class ScenarioConfig:
    n_scenarios_per_cell: int = 400
    horizon: float = 8640.0
    dt: float = 10.0
    master_seed: int = 0
    bands: RegimeBands = field(default_factory=RegimeBands)
    dv_priors: dict[BehaviorClass, DeltaVPrior] = field(default_factory=default_dv_priors)
    burn_window: tuple[float, float] = (0.1, 0.8)
    link: LinkConfig = field(default_factory=LinkConfig)
    jammers: dict[BehaviorClass, JammerProfile] = field(default_factory=default_jammers)
    sigma: float = 1.0
    gs_longitude_offset_deg: float = 5.0

    def __post_init__(self):
        if self.n_scenarios_per_cell < 1:
            raise ConfigurationError("n_scenarios_per_cell must be >= 1")
        if self.dt <= 0 or self.horizon <= 0:
            raise ConfigurationError("horizon and dt must be positive")
        ratio = self.horizon / self.dt
        if abs(ratio - round(ratio)) > 1e-9 or round(ratio) < 3:
            raise ConfigurationError("horizon/dt must be an integer sample count >= 3")
        lo, hi = self.burn_window
        if not 0.0 <= lo < hi <= 1.0:
            raise ConfigurationError("burn_window must satisfy 0 <= lo < hi <= 1")
        if self.sigma < 0:
            raise ConfigurationError("sigma must be non-negative")
        missing = set(CLASSES) - set(self.dv_priors) | set(CLASSES) - set(self.jammers)
        if missing:
            raise ConfigurationError(f"priors/jammers missing for {sorted(c.value for c in missing)}")

    @property
    def n_samples(self) -> int:
        return int(round(self.horizon / self.dt))

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.n_samples) * self.dt


@dataclass(frozen=True)
class ScenarioRecord:
    scenario_id: int
    behavior: BehaviorClass
    regime: OrbitRegime
    seed: int
    maneuver: ManeuverSpec
    kin: KinematicSeries
    link: LinkMetrics

    @property
    def n_rows(self) -> int:
        return int(self.kin.t.shape[0])

    @property
    def visibility(self) -> np.ndarray:
        return self.kin.visibility

    def columns(self) -> dict[str, np.ndarray]:
        """Row data keyed by CSV column, -inf dB replaced by the sentinel."""
        k, m = self.kin, self.link
        n = self.n_rows
        return {
            "scenario_id": np.full(n, self.scenario_id, dtype=np.int64),
            "class": np.full(n, self.behavior.value, dtype=object),
            "regime": np.full(n, self.regime.value, dtype=object),
            "t": k.t,
            "range_m": k.range,
            "range_rate_mps": k.range_rate,
            "v_r": k.v_rtn[:, 0], "v_t": k.v_rtn[:, 1], "v_n": k.v_rtn[:, 2],
            "a_r": k.a_rtn[:, 0], "a_t": k.a_rtn[:, 1], "a_n": k.a_rtn[:, 2],
            "jerk": k.jerk,
            "curvature": k.curvature,
            "doppler_hz": m.doppler_hz,
            "doppler_rate_hzs": k.doppler_rate_hzs,
            "boresight_rad": k.boresight_rad,
            "t_to_tca": k.tca.t_to_tca,
            "visibility": k.visibility.astype(np.int64),
            "rssi_dbm": m.rssi_dbm,
            "throughput_mbps": m.throughput_mbps,
            "cn0_dbhz": m.cn0_dbhz,
            "jsr_db": _finite_db(m.jsr_db),
            "cfo_noise_hz": m.cfo_noise_hz,
            "sjnr_db": _finite_db(m.sjnr_db),
            "jam_state": m.jam_state.astype(np.int64),
        }

    def to_csv_rows(self) -> str:
        cols = self.columns()
        data = [cols[c].tolist() for c in COLUMNS]
        return "".join(_ROW_FORMAT % row + "\n" for row in zip(*data))


def _finite_db(x):
    return np.where(np.isneginf(x), JAM_OFF_DB, x)


def scenario_seed(master_seed: int, scenario_id: int) -> int:
    """Stable 63-bit seed for one scenario, independent of generation order."""
    digest = hashlib.blake2b(f"proxsim:{master_seed}:{scenario_id}".encode(), digest_size=8).digest()
    return int.from_bytes(digest, "little") >> 1


def scenario_id_for(cfg: ScenarioConfig, behavior: BehaviorClass, regime: OrbitRegime, k: int) -> int:
    cell = behavior.index * len(REGIMES) + regime.index
    return cell * cfg.n_scenarios_per_cell + k


def ground_station_positions(times, longitude_offset_deg: float) -> np.ndarray:
    """ECI positions of an equatorial ground station east of the target's sub-satellite point."""
    ang = math.radians(longitude_offset_deg) + OMEGA_EARTH * np.asarray(times, dtype=float)
    return R_EARTH * np.column_stack([np.cos(ang), np.sin(ang), np.zeros_like(ang)])


def generate_scenario(cfg: ScenarioConfig, behavior: BehaviorClass, regime: OrbitRegime,
                      scenario_id: int) -> ScenarioRecord:
    """Simulate one labeled scenario; deterministic in (cfg.master_seed, scenario_id)."""
    seed = scenario_seed(cfg.master_seed, scenario_id)
    rng = np.random.default_rng(seed)
    try:
        return _simulate(cfg, behavior, regime, scenario_id, seed, rng)
    except (ValueError, ArithmeticError) as exc:
        raise ScenarioError(f"scenario {scenario_id} ({behavior.value}/{regime.value}): {exc}") from exc


def _simulate(cfg, behavior, regime, scenario_id, seed, rng) -> ScenarioRecord:
    times = cfg.times
    target = geo_target_elements()
    tgt_pos, tgt_vel = propagate_state(elements_to_state(target), times)
    attacker = sample_orbit(regime, behavior, rng, cfg.bands)
    att0 = elements_to_state(attacker)

    lo, hi = cfg.burn_window
    prior = cfg.dv_priors[behavior]
    for _ in range(50):
        t_burn = float(rng.uniform(lo, hi) * cfg.horizon)
        pb, _vb = propagate_state(att0, [t_burn])
        tb, _ = propagate_state(elements_to_state(target), [t_burn])
        maneuver = sample_maneuver(prior, t_burn, tb[0] - pb[0], rng)
        att_pos, att_vel = propagate_with_maneuver(attacker, maneuver, times)
        if np.min(np.linalg.norm(att_pos, axis=1)) > R_EARTH + MIN_PERIGEE_ALTITUDE:
            break
    else:
        raise ScenarioError("could not draw a maneuver that avoids re-entry")

    gs_pos = ground_station_positions(times, cfg.gs_longitude_offset_deg)
    to_gs = gs_pos - tgt_pos
    sig_dist = np.linalg.norm(to_gs, axis=1)
    boresight = to_gs / sig_dist[:, None]
    link_cfg = cfg.link

    kin = kinematic_series(times, att_pos, att_vel, tgt_pos, tgt_vel, link_cfg.f_c, boresight)

    profile = cfg.jammers[behavior]
    jam_state = sample_jammer_activity(profile.burst, times.size, rng)
    p_sig = received_power(sig_dist, 0.0, link_cfg, "signal", rng)
    p_jam = received_power(kin.range, kin.boresight_rad, link_cfg, "jammer", rng, eirp_dbw=profile.eirp_dbw)
    p_jam = np.where(jam_state == 1, p_jam, -np.inf)
    clean = link_metrics(p_sig, p_jam, link_cfg, t=times, doppler_hz=kin.doppler_hz)
    observed = apply_estimation_noise(clean, cfg.sigma, link_cfg, rng)
    return ScenarioRecord(scenario_id, behavior, regime, seed, maneuver, kin, observed)


def scenario_plan(cfg: ScenarioConfig):
    """(scenario_id, class, regime) for every scenario, in shard order."""
    for behavior in CLASSES:
        for regime in REGIMES:
            for k in range(cfg.n_scenarios_per_cell):
                yield scenario_id_for(cfg, behavior, regime, k), behavior, regime


def generate_records(cfg: ScenarioConfig, workers: int | None = None):
    """Yield every ScenarioRecord in plan order, optionally across processes."""
    plan = list(scenario_plan(cfg))
    workers = workers or _worker_count()
    if workers <= 1:
        for sid, behavior, regime in plan:
            yield generate_scenario(cfg, behavior, regime, sid)
        return
    with ProcessPoolExecutor(workers) as pool:
        args = ([cfg] * len(plan), [p[1] for p in plan], [p[2] for p in plan], [p[0] for p in plan])
        yield from pool.map(generate_scenario, *args, chunksize=4)


def _worker_count() -> int:
    env = os.environ.get("PROXSIM_THREADS")
    if env:
        return max(1, int(env))
    return 1


def shard_name(behavior: BehaviorClass, regime: OrbitRegime) -> str:
    return f"{behavior.value}_{regime.value}.csv"


def generate_dataset(cfg: ScenarioConfig, out_dir, workers: int | None = None, extra: dict | None = None) -> dict:
    """Write one CSV shard per (class, regime) cell plus ``manifest.json``.

    ``extra`` entries are copied into the manifest. The manifest is marked
    ``"status": "partial"`` if writing fails midway.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    manifest = {
        "schema": SCHEMA_VERSION,
        "status": "in-progress",
        "config_hash": _serde.config_hash(cfg),
        "config": _serde.to_jsonable(cfg),
        "samples_per_scenario": cfg.n_samples,
        "columns": list(COLUMNS),
        "cells": [],
        "scenarios": [],
        **(extra or {}),
    }
    jam_on = {c.value: 0 for c in CLASSES}
    jam_n = {c.value: 0 for c in CLASSES}
    handles = {}
    try:
        for behavior in CLASSES:
            for regime in REGIMES:
                path = out / shard_name(behavior, regime)
                fh = path.open("w", encoding="ascii", newline="")
                fh.write(",".join(COLUMNS) + "\n")
                handles[(behavior, regime)] = fh
                manifest["cells"].append({"class": behavior.value, "regime": regime.value,
                                          "shard": path.name, "scenarios": 0, "rows": 0})
        cells = {(c["class"], c["regime"]): c for c in manifest["cells"]}
        for rec in generate_records(cfg, workers):
            handles[(rec.behavior, rec.regime)].write(rec.to_csv_rows())
            cell = cells[(rec.behavior.value, rec.regime.value)]
            cell["scenarios"] += 1
            cell["rows"] += rec.n_rows
            jam_on[rec.behavior.value] += int(rec.link.jam_state.sum())
            jam_n[rec.behavior.value] += rec.n_rows
            manifest["scenarios"].append({
                "scenario_id": rec.scenario_id,
                "class": rec.behavior.value,
                "regime": rec.regime.value,
                "seed": rec.seed,
                "rows": rec.n_rows,
                "t_burn": rec.maneuver.t_burn,
                "delta_v": rec.maneuver.delta_v.tolist(),
            })
    except BaseException:
        manifest["status"] = "partial"
        _close_all(handles)
        _write_manifest(out, manifest)
        raise
    _close_all(handles)
    manifest["n_scenarios"] = len(manifest["scenarios"])
    manifest["total_rows"] = sum(c["rows"] for c in manifest["cells"])
    manifest["duty_cycle"] = {k: (jam_on[k] / jam_n[k] if jam_n[k] else None) for k in jam_on}
    manifest["status"] = "complete"
    _write_manifest(out, manifest)
    return manifest


def _close_all(handles):
    for fh in handles.values():
        fh.close()


def _write_manifest(out: Path, manifest: dict) -> None:
    (out / "manifest.json").write_text(json.dumps(manifest, indent=1, sort_keys=True) + "\n", encoding="utf-8")


def read_manifest(data_dir) -> dict:
    path = Path(data_dir) / "manifest.json"
    manifest = json.loads(path.read_text(encoding="utf-8"))
    if manifest.get("schema") != SCHEMA_VERSION:
        raise SchemaError(f"{path}: schema {manifest.get('schema')!r}, expected {SCHEMA_VERSION!r}")
    return manifest


class SchemaError(ValueError):
    pass


def with_sigma(cfg: ScenarioConfig, sigma: float, *, power_jitter_db: float | None = None) -> ScenarioConfig:
    link = cfg.link if power_jitter_db is None else replace(cfg.link, power_jitter_db=power_jitter_db)
    return replace(cfg, sigma=sigma, link=link)
