from .forest import ForestModel, ForestParams, ModelError, train_forest
from .metrics import (
    MetricsReport,
    auroc,
    binary_scores,
    confusion_matrix,
    evaluate,
    precision_recall_f1,
    roc_curve,
    write_roc_csv,
)
from .split import SplitError, grouped_split

__all__ = [
    "ForestModel", "ForestParams", "ModelError", "train_forest", "MetricsReport", "auroc",
    "binary_scores", "confusion_matrix", "evaluate", "precision_recall_f1", "roc_curve",
    "write_roc_csv", "SplitError", "grouped_split",
]
