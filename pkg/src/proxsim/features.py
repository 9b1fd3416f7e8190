"""Temporal statistics, anomaly flags, scenario aggregates and the three feature views."""

from __future__ import annotations

import enum
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .scenario import CLASSES, PRIVILEGED_COLUMNS, REGIMES, SCHEMA_VERSION, SchemaError, ScenarioRecord, read_manifest

log = logging.getLogger(__name__)

KIN_BASE = (
    "range_m", "range_rate_mps", "v_r", "v_t", "v_n", "a_r", "a_t", "a_n", "jerk", "curvature",
    "doppler_hz", "doppler_rate_hzs", "boresight_rad", "t_to_tca", "visibility",
)
RF_BASE = ("rssi_dbm", "throughput_mbps", "cn0_dbhz", "jsr_db", "cfo_noise_hz")
AGGREGATES = ("min", "max", "mean", "slope")
STD_FLOOR = 1e-9


class FeatureView(enum.Enum):
    RF_ONLY = "rf"
    KIN_ONLY = "kin"
    FUSED = "fused"


@dataclass(frozen=True)
class FeatureOptions:
    rolling_window: int = 3
    rolling_columns: tuple[str, ...] = ("rssi_dbm", "throughput_mbps", "jsr_db")
    anomaly_window: int = 16
    anomaly_z: float = 3.0
    anomaly_columns: tuple[str, ...] = ("rssi_dbm", "throughput_mbps", "jsr_db")
    aggregate_columns: tuple[str, ...] = ("range_m", "range_rate_mps", "curvature", "jerk", "boresight_rad")
    # (name, left column, right column, op): product features added to the fused view.
    # op "mul" is the plain product; "pow_db" multiplies left**2 into the dB
    # power ratio on the right, i.e. right + 20*log10(left)
    interactions: tuple[tuple[str, str, str, str], ...] = (
        ("range_sq_x_jsr_db", "range_m", "jsr_db", "pow_db"),
        ("boresight_x_rssi_grad", "boresight_rad", "rssi_dbm_grad", "mul"),
        ("range_rate_x_tput_grad", "range_rate_mps", "throughput_mbps_grad", "mul"),
    )


@dataclass
class FeatureMatrix:
    X: np.ndarray
    y: np.ndarray
    groups: np.ndarray
    columns: list[str]
    view: FeatureView
    jam_state: np.ndarray = field(repr=False)
    regime: np.ndarray = field(repr=False)

    @property
    def n_rows(self) -> int:
        return self.X.shape[0]


# --- per-series statistics -------------------------------------------------

def rolling_stats(series, window: int = 3) -> tuple[np.ndarray, np.ndarray]:
    """Centred rolling sample std (shrinking at the edges) and unit-step gradient."""
    x = np.asarray(series, dtype=float)
    if window < 2:
        raise ValueError("window must be >= 2")
    if x.shape[0] < window:
        raise ValueError(f"series of length {x.shape[0]} is shorter than the window {window}")
    half = window // 2
    padded = np.pad(x, (half, window - 1 - half), constant_values=np.nan)
    windows = sliding_window_view(padded, window)
    counts = np.sum(~np.isnan(windows), axis=1)
    mean = np.nanmean(windows, axis=1)
    dev = np.where(np.isnan(windows), 0.0, windows - mean[:, None])
    std = np.sqrt(np.sum(dev * dev, axis=1) / np.maximum(counts - 1, 1))
    return std, np.gradient(x)


def anomaly_flags(series, window: int = 16, z: float = 3.0) -> np.ndarray:
    """1 where a sample departs from the mean of the preceding ``window`` samples
    by more than ``z`` sample standard deviations (std floored at 1e-9).

    The current sample is excluded from its own reference window; the first
    ``window`` samples are never flagged.
    """
    if window < 3:
        raise ValueError("anomaly window must be >= 3")
    x = np.asarray(series, dtype=float)
    flags = np.zeros(x.shape[0], dtype=np.int8)
    if x.shape[0] <= window:
        return flags
    ref = sliding_window_view(x[:-1], window)
    mean = ref.mean(axis=1)
    std = np.maximum(ref.std(axis=1, ddof=1), STD_FLOOR)
    flags[window:] = np.abs(x[window:] - mean) > z * std
    return flags


def scenario_aggregates(series) -> dict[str, float]:
    """Min, max, mean and least-squares slope against sample index."""
    x = np.asarray(series, dtype=float)
    n = x.shape[0]
    if n < 2:
        raise ValueError("aggregates need at least 2 samples")
    idx = np.arange(n, dtype=float)
    idx -= idx.mean()
    slope = float(np.dot(idx, x - x.mean()) / np.dot(idx, idx))
    return {"min": float(x.min()), "max": float(x.max()), "mean": float(x.mean()), "slope": slope}


# --- views -----------------------------------------------------------------

def view_columns(view: FeatureView, opts: FeatureOptions | None = None) -> list[str]:
    opts = opts or FeatureOptions()
    rf = list(RF_BASE)
    for c in opts.rolling_columns:
        rf += [f"{c}_rstd{opts.rolling_window}", f"{c}_grad"]
    rf += [f"{c}_anom" for c in opts.anomaly_columns]
    kin = list(KIN_BASE)
    for c in opts.aggregate_columns:
        kin += [f"{c}_{a}" for a in AGGREGATES]
    if view is FeatureView.RF_ONLY:
        return rf
    if view is FeatureView.KIN_ONLY:
        return kin
    return rf + kin + [name for name, *_ in opts.interactions]


def scenario_features(cols: dict[str, np.ndarray], opts: FeatureOptions) -> dict[str, np.ndarray]:
    """Every derived column for one scenario (superset of all views)."""
    out = {c: np.asarray(cols[c], dtype=float) for c in KIN_BASE + RF_BASE}
    n = out["range_m"].shape[0]
    for c in opts.rolling_columns:
        std, grad = rolling_stats(out[c], opts.rolling_window)
        out[f"{c}_rstd{opts.rolling_window}"] = std
        out[f"{c}_grad"] = grad
    for c in opts.anomaly_columns:
        out[f"{c}_anom"] = anomaly_flags(out[c], opts.anomaly_window, opts.anomaly_z).astype(float)
    for c in opts.aggregate_columns:
        for k, v in scenario_aggregates(out[c]).items():
            out[f"{c}_{k}"] = np.full(n, v)
    for name, a, b, op in opts.interactions:
        out[name] = interaction(out[a], out[b], op)
    return out


def interaction(left, right, op: str) -> np.ndarray:
    left = np.asarray(left, dtype=float)
    right = np.asarray(right, dtype=float)
    if op == "mul":
        return left * right
    if op == "pow_db":
        return right + 20.0 * np.log10(np.maximum(np.abs(left), 1e-300))
    raise ValueError(f"unknown interaction op {op!r}")


def _fill_nan(block: np.ndarray) -> int:
    """Forward-fill NaN down each column, then zero-fill; returns the NaN count."""
    bad = ~np.isfinite(block)
    count = int(bad.sum())
    if count:
        for j in np.flatnonzero(bad.any(axis=0)):
            col = block[:, j]
            ok = np.isfinite(col)
            idx = np.where(ok, np.arange(col.size), 0)
            np.maximum.accumulate(idx, out=idx)
            filled = col[idx]
            filled[~np.isfinite(filled)] = 0.0
            block[:, j] = filled
    return count


def iter_scenarios(dataset) -> Iterable[dict[str, np.ndarray]]:
    """Per-scenario column dicts from a dataset directory or from records."""
    if isinstance(dataset, (str, Path)):
        yield from _iter_dataset_dir(Path(dataset))
        return
    for item in dataset:
        if isinstance(item, ScenarioRecord):
            yield item.columns()
        else:
            yield item


def _iter_dataset_dir(path: Path):
    import pandas as pd

    manifest = read_manifest(path)
    for cell in manifest["cells"]:
        frame = pd.read_csv(path / cell["shard"])
        missing = set(manifest["columns"]) - set(frame.columns)
        if missing:
            raise SchemaError(f"{cell['shard']}: missing columns {sorted(missing)}")
        for _, grp in frame.groupby("scenario_id", sort=False):
            yield {c: grp[c].to_numpy() for c in grp.columns}


def build_feature_matrix(dataset, view: FeatureView | str, opts: FeatureOptions | None = None) -> FeatureMatrix:
    """Assemble the per-timestep feature matrix for one view.

    Every row carries its scenario's class label and id; simulation-privileged
    columns are never included.
    """
    view = FeatureView(view)
    opts = opts or FeatureOptions()
    columns = view_columns(view, opts)
    assert not set(columns) & set(PRIVILEGED_COLUMNS)
    class_index = {c.value: i for i, c in enumerate(CLASSES)}
    regime_index = {r.value: i for i, r in enumerate(REGIMES)}

    blocks, ys, groups, jams, regimes = [], [], [], [], []
    nan_count = 0
    for cols in iter_scenarios(dataset):
        feats = scenario_features(cols, opts)
        block = np.column_stack([feats[c] for c in columns])
        nan_count += _fill_nan(block)
        n = block.shape[0]
        blocks.append(block)
        ys.append(np.full(n, class_index[str(cols["class"][0])], dtype=np.int64))
        groups.append(np.asarray(cols["scenario_id"], dtype=np.int64))
        jams.append(np.asarray(cols["jam_state"], dtype=np.int64))
        regimes.append(np.full(n, regime_index[str(cols["regime"][0])], dtype=np.int64))
    if not blocks:
        raise ValueError("dataset contains no scenarios")
    if nan_count:
        log.info("filled %d non-finite feature values", nan_count)
    X = np.vstack(blocks)
    flat = np.flatnonzero(np.ptp(X, axis=0) == 0)
    if flat.size:
        log.warning("zero-variance feature columns: %s", ", ".join(columns[j] for j in flat))
    return FeatureMatrix(X, np.concatenate(ys), np.concatenate(groups), columns, view,
                         np.concatenate(jams), np.concatenate(regimes))


def save_feature_matrix(fm: FeatureMatrix, out_dir) -> Path:
    """Write ``features_<view>.csv`` and its column manifest; returns the CSV path."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / f"features_{fm.view.value}.csv"
    header = ["scenario_id", "label", "jam_state", "regime"] + fm.columns
    lead = np.column_stack([fm.groups, fm.y, fm.jam_state, fm.regime])
    fmt = "%d,%d,%d,%d," + ",".join(["%.10g"] * len(fm.columns))
    with csv_path.open("w", encoding="ascii", newline="") as fh:
        fh.write(",".join(header) + "\n")
        rows = np.hstack([lead.astype(float), fm.X]).tolist()
        fh.writelines(fmt % tuple(r) + "\n" for r in rows)
    manifest = {
        "schema": SCHEMA_VERSION,
        "view": fm.view.value,
        "columns": fm.columns,
        "classes": [c.value for c in CLASSES],
        "n_rows": fm.n_rows,
    }
    (out / f"features_{fm.view.value}.columns.json").write_text(json.dumps(manifest, indent=1) + "\n")
    return csv_path


def load_feature_matrix(out_dir, view: FeatureView | str) -> FeatureMatrix:
    import pandas as pd

    view = FeatureView(view)
    out = Path(out_dir)
    manifest = json.loads((out / f"features_{view.value}.columns.json").read_text())
    if manifest.get("schema") != SCHEMA_VERSION:
        raise SchemaError(f"feature manifest schema {manifest.get('schema')!r}")
    frame = pd.read_csv(out / f"features_{view.value}.csv")
    cols = manifest["columns"]
    return FeatureMatrix(frame[cols].to_numpy(dtype=float), frame["label"].to_numpy(np.int64),
                         frame["scenario_id"].to_numpy(np.int64), cols, view,
                         frame["jam_state"].to_numpy(np.int64), frame["regime"].to_numpy(np.int64))
