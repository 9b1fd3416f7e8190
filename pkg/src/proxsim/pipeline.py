"""End-to-end runs: dataset, features, three-view ablation, noise sweep, report tables.

Every file written here is a deterministic function of the run config.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, replace
from pathlib import Path


from .config import RunConfig
from .features import FeatureMatrix, FeatureView, build_feature_matrix, load_feature_matrix, save_feature_matrix
from .learn import ForestModel, MetricsReport, binary_scores, evaluate, grouped_split, train_forest, write_roc_csv
from .scenario import CLASSES, generate_dataset, generate_records, read_manifest, with_sigma

LABELS = [c.value for c in CLASSES]


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=1, sort_keys=True) + "\n", encoding="utf-8")


def dataset_summary(manifest: dict) -> dict:
    return {
        "config_hash": manifest["config_hash"],
        "n_scenarios": manifest["n_scenarios"],
        "total_rows": manifest["total_rows"],
        "rows_per_cell": {f"{c['class']}/{c['regime']}": c["rows"] for c in manifest["cells"]},
        "duty_cycle": manifest["duty_cycle"],
    }


def run_generate(cfg: RunConfig, out_dir) -> dict:
    manifest = generate_dataset(cfg.scenario, out_dir, extra={"run_config_hash": cfg.hash})
    return {**dataset_summary(manifest), "run_config_hash": cfg.hash}


def features_for(cfg: RunConfig, data_dir, view: FeatureView | str) -> FeatureMatrix:
    """Saved features from ``data_dir`` when present, else built from its shards."""
    view = FeatureView(view)
    data_dir = Path(data_dir)
    if (data_dir / f"features_{view.value}.columns.json").exists():
        return load_feature_matrix(data_dir, view)
    return build_feature_matrix(data_dir, view, cfg.features)


def run_features(cfg: RunConfig, data_dir, out_dir, view: FeatureView | str) -> Path:
    fm = build_feature_matrix(Path(data_dir), view, cfg.features)
    path = save_feature_matrix(fm, out_dir)
    meta_path = path.with_suffix(".columns.json")
    meta = json.loads(meta_path.read_text())
    meta["config_hash"] = cfg.hash
    meta["dataset_config_hash"] = read_manifest(data_dir)["config_hash"]
    _write_json(meta_path, meta)
    return path


@dataclass
class ViewResult:
    view: FeatureView
    report: MetricsReport
    model: ForestModel
    n_train_rows: int
    n_test_rows: int


def train_eval_matrix(cfg: RunConfig, fm: FeatureMatrix) -> ViewResult:
    train, test = grouped_split(fm.groups, fm.y, cfg.test_fraction, cfg.split_seed)
    model = train_forest(fm.X[train], fm.y[train], cfg.forest, fm.columns, n_classes=len(LABELS))
    proba = model.predict_proba(fm.X[test])
    report = evaluate(fm.y[test], proba, LABELS, fm.groups[test])
    return ViewResult(fm.view, report, model, int(train.sum()), int(test.sum()))


def write_view_outputs(cfg: RunConfig, result: ViewResult, out_dir, dataset_hash: str | None = None) -> dict:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    v = result.view.value
    payload = result.report.to_dict()
    payload.update({
        "view": v,
        "config_hash": cfg.hash,
        "dataset_config_hash": dataset_hash,
        "n_features": len(result.model.columns),
        "n_train_rows": result.n_train_rows,
        "n_test_rows": result.n_test_rows,
    })
    _write_json(out / f"metrics_{v}.json", payload)
    with (out / f"confusion_{v}.csv").open("w", encoding="ascii", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["true\\pred"] + LABELS)
        for lab, row in zip(LABELS, result.report.confusion.tolist()):
            w.writerow([lab] + row)
    write_roc_csv(result.report, out / f"roc_{v}.csv")
    result.model.save(out / f"model_{v}.npz")
    return payload


def run_train_eval(cfg: RunConfig, data_dir, view: FeatureView | str, out_dir) -> dict:
    manifest = read_manifest(data_dir)
    fm = features_for(cfg, data_dir, view)
    return write_view_outputs(cfg, train_eval_matrix(cfg, fm), out_dir, manifest["config_hash"])


# --- noise sweep -------------------------------------------------------------

SWEEP_FIELDS = ("sigma", "sigma_sq", "inv_sigma_sq", "accuracy", "precision", "recall", "f1")


def sweep_point(cfg: RunConfig, sigma: float) -> dict:
    """Binary per-timestep jammer-activity detection at one noise scale.

    Data are regenerated with transmit-power jitter switched off; the
    detector sees the fused features and is scored against the true
    jammer state.
    """
    scen = with_sigma(cfg.scenario, sigma, power_jitter_db=0.0)
    scen = replace(scen, n_scenarios_per_cell=cfg.sweep_scenarios_per_cell)
    fm = build_feature_matrix(generate_records(scen), FeatureView.FUSED, cfg.features)
    train, test = grouped_split(fm.groups, fm.y, cfg.test_fraction, cfg.split_seed)
    model = train_forest(fm.X[train], fm.jam_state[train], cfg.forest, fm.columns, n_classes=2)
    scores = binary_scores(fm.jam_state[test], model.predict(fm.X[test]))
    return {"sigma": sigma, "sigma_sq": sigma * sigma,
            "inv_sigma_sq": math.inf if sigma == 0 else 1.0 / (sigma * sigma), **scores}


def run_noise_sweep(cfg: RunConfig, out_dir) -> list[dict]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows = [sweep_point(cfg, s) for s in cfg.sigma_grid]
    with (out / "noise_sweep.csv").open("w", encoding="ascii", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SWEEP_FIELDS)
        for r in rows:
            w.writerow(["inf" if (k == "inv_sigma_sq" and math.isinf(r[k])) else repr(float(r[k]))
                        for k in SWEEP_FIELDS])
    _write_json(out / "noise_sweep.json", {
        "config_hash": cfg.hash,
        "scenarios_per_cell": cfg.sweep_scenarios_per_cell,
        "rows": [{k: ("inf" if isinstance(v, float) and math.isinf(v) else v) for k, v in r.items()} for r in rows],
    })
    return rows


# --- report ------------------------------------------------------------------

def run_report(out_dir) -> str:
    """Collect ``metrics_<view>.json`` files into ablation and per-class tables."""
    out = Path(out_dir)
    found = [(v, json.loads((out / f"metrics_{v.value}.json").read_text()))
             for v in FeatureView if (out / f"metrics_{v.value}.json").exists()]
    if not found:
        raise FileNotFoundError(f"no metrics_<view>.json files in {out}")
    with (out / "ablation_table.csv").open("w", encoding="ascii", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["model", "accuracy", "macro_f1", "auroc"])
        for v, m in found:
            w.writerow([v.value.upper(), f"{m['accuracy']:.4f}", f"{m['macro_f1']:.4f}",
                        "" if m["macro_auroc"] is None else f"{m['macro_auroc']:.4f}"])
    with (out / "per_class_table.csv").open("w", encoding="ascii", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["model", "class", "precision", "recall", "f1", "auroc"])
        for v, m in found:
            for lab, pc in m["per_class"].items():
                w.writerow([v.value.upper(), lab, f"{pc['precision']:.4f}", f"{pc['recall']:.4f}", f"{pc['f1']:.4f}",
                            "" if pc["auroc"] is None else f"{pc['auroc']:.4f}"])
    lines = [f"{'model':<8}{'accuracy':>10}{'macro_f1':>10}{'auroc':>10}"]
    for v, m in found:
        auc = float("nan") if m["macro_auroc"] is None else m["macro_auroc"]
        lines.append(f"{v.value.upper():<8}{m['accuracy']:>10.4f}{m['macro_f1']:>10.4f}{auc:>10.4f}")
    return "\n".join(lines)
