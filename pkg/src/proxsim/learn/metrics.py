"""Classification metrics: confusion matrix, per-class P/R/F1, one-vs-rest ROC."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


def confusion_matrix(y_true, y_pred, n_classes: int) -> np.ndarray:
    """Counts with rows = true class, columns = predicted class."""
    y_true = np.asarray(y_true, dtype=np.int64)
    y_pred = np.asarray(y_pred, dtype=np.int64)
    if y_true.shape != y_pred.shape:
        raise ValueError("y_true and y_pred differ in length")
    flat = y_true * n_classes + y_pred
    return np.bincount(flat, minlength=n_classes * n_classes).reshape(n_classes, n_classes)


def precision_recall_f1(cm: np.ndarray):
    """Per-class precision, recall, F1 and a mask of metrics that were 0/0.

    Undefined values are reported as 0 and flagged in the returned mask
    (shape (3, n_classes): precision, recall, f1).
    """
    cm = np.asarray(cm, dtype=float)
    tp = np.diag(cm)
    pred = cm.sum(axis=0)
    true = cm.sum(axis=1)
    undefined = np.zeros((3, cm.shape[0]), dtype=bool)
    undefined[0] = pred == 0
    undefined[1] = true == 0
    with np.errstate(divide="ignore", invalid="ignore"):
        precision = np.where(pred > 0, tp / pred, 0.0)
        recall = np.where(true > 0, tp / true, 0.0)
        denom = precision + recall
        f1 = np.where(denom > 0, 2 * precision * recall / denom, 0.0)
    undefined[2] = denom == 0
    return precision, recall, f1, undefined


def roc_curve(y_binary, scores):
    """ROC points from a threshold sweep over every distinct score.

    A sample is called positive when ``score >= threshold``; thresholds run
    from +inf (nothing positive) down to -inf (everything positive).
    """
    y = np.asarray(y_binary).astype(bool)
    s = np.asarray(scores, dtype=float)
    n_pos = int(y.sum())
    n_neg = y.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("ROC needs both positive and negative samples")
    order = np.argsort(-s, kind="stable")
    s_sorted = s[order]
    y_sorted = y[order]
    tp = np.cumsum(y_sorted)
    fp = np.cumsum(~y_sorted)
    # last index of each run of equal scores
    last = np.flatnonzero(np.r_[s_sorted[1:] != s_sorted[:-1], True])
    tpr = np.r_[0.0, tp[last] / n_pos, 1.0]
    fpr = np.r_[0.0, fp[last] / n_neg, 1.0]
    thresholds = np.r_[np.inf, s_sorted[last], -np.inf]
    return fpr, tpr, thresholds


def auroc(y_binary, scores) -> float:
    fpr, tpr, _ = roc_curve(y_binary, scores)
    return float(np.sum(np.diff(fpr) * (tpr[1:] + tpr[:-1]) / 2.0))


@dataclass
class MetricsReport:
    labels: list[str]
    confusion: np.ndarray
    precision: np.ndarray
    recall: np.ndarray
    f1: np.ndarray
    undefined: np.ndarray
    accuracy: float
    macro_f1: float
    auroc: np.ndarray
    macro_auroc: float
    roc: dict = field(default_factory=dict, repr=False)
    scenario: dict | None = None

    def to_dict(self) -> dict:
        per_class = {
            lab: {
                "precision": float(self.precision[i]),
                "recall": float(self.recall[i]),
                "f1": float(self.f1[i]),
                "auroc": None if np.isnan(self.auroc[i]) else float(self.auroc[i]),
                "undefined": [m for m, u in zip(("precision", "recall", "f1"), self.undefined[:, i]) if u],
            }
            for i, lab in enumerate(self.labels)
        }
        out = {
            "labels": self.labels,
            "confusion_matrix": self.confusion.tolist(),
            "per_class": per_class,
            "accuracy": self.accuracy,
            "macro_f1": self.macro_f1,
            "macro_auroc": None if np.isnan(self.macro_auroc) else self.macro_auroc,
        }
        if self.scenario is not None:
            out["scenario_level"] = self.scenario
        return out


def _argmax_first(proba: np.ndarray) -> np.ndarray:
    return np.argmax(proba, axis=1)


def scenario_majority(groups, y_true, y_pred, n_classes: int):
    """Per-scenario label and majority-vote prediction (ties -> lowest index)."""
    groups = np.asarray(groups)
    uniq, inv = np.unique(groups, return_inverse=True)
    votes = np.zeros((uniq.size, n_classes), dtype=np.int64)
    np.add.at(votes, (inv, np.asarray(y_pred)), 1)
    truth = np.zeros(uniq.size, dtype=np.int64)
    truth[inv] = y_true
    return truth, np.argmax(votes, axis=1)


def evaluate(y_true, proba, labels: list[str], groups=None) -> MetricsReport:
    """Row-level metrics from class probabilities, plus scenario-majority metrics
    when ``groups`` is given."""
    y_true = np.asarray(y_true, dtype=np.int64)
    proba = np.asarray(proba, dtype=float)
    k = len(labels)
    if proba.shape != (y_true.size, k):
        raise ValueError(f"proba shape {proba.shape} does not match {y_true.size} rows x {k} classes")
    y_pred = _argmax_first(proba)
    cm = confusion_matrix(y_true, y_pred, k)
    p, r, f1, undef = precision_recall_f1(cm)
    aucs = np.full(k, np.nan)
    roc = {}
    for c in range(k):
        yb = y_true == c
        if yb.all() or not yb.any():
            continue
        fpr, tpr, thr = roc_curve(yb, proba[:, c])
        aucs[c] = float(np.sum(np.diff(fpr) * (tpr[1:] + tpr[:-1]) / 2.0))
        roc[labels[c]] = (fpr, tpr, thr)
    report = MetricsReport(
        labels=list(labels), confusion=cm, precision=p, recall=r, f1=f1, undefined=undef,
        accuracy=float(np.trace(cm) / cm.sum()), macro_f1=float(f1.mean()), auroc=aucs,
        macro_auroc=float(np.nanmean(aucs)) if np.isfinite(aucs).any() else float("nan"), roc=roc,
    )
    if groups is not None:
        truth, pred = scenario_majority(groups, y_true, y_pred, k)
        scm = confusion_matrix(truth, pred, k)
        _, sr, sf1, _ = precision_recall_f1(scm)
        report.scenario = {
            "n_scenarios": int(truth.size),
            "confusion_matrix": scm.tolist(),
            "accuracy": float(np.trace(scm) / scm.sum()),
            "macro_f1": float(sf1.mean()),
            "recall": {lab: float(sr[i]) for i, lab in enumerate(labels)},
        }
    return report


def binary_scores(y_true, y_pred) -> dict[str, float]:
    """Accuracy, precision, recall and F1 of the positive class (label 1)."""
    cm = confusion_matrix(y_true, y_pred, 2)
    p, r, f1, _ = precision_recall_f1(cm)
    return {"accuracy": float(np.trace(cm) / cm.sum()), "precision": float(p[1]),
            "recall": float(r[1]), "f1": float(f1[1])}


def write_roc_csv(report: MetricsReport, path) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.write("class,threshold,fpr,tpr\n")
        for lab, (fpr, tpr, thr) in report.roc.items():
            for a, b, t in zip(fpr, tpr, thr):
                fh.write(f"{lab},{t!r},{a!r},{b!r}\n")
