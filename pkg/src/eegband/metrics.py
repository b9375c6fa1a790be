"""Confusion matrix and weighted-average F1 for the 3-class problem.

Conventions: rows of the confusion matrix are true classes, columns are
predictions. Precision or recall with a zero denominator is defined as 0,
and a class with zero support contributes zero weight to the weighted F1.
"""

from dataclasses import dataclass

import numpy as np

NUM_CLASSES = 3
CLASS_NAMES = ("Left", "HighAmbiguity", "Right")


@dataclass
class EvalReport:
    confusion: np.ndarray          # [C, C] ints, rows true / cols predicted
    precision: np.ndarray          # [C]
    recall: np.ndarray             # [C]
    f1: np.ndarray                 # [C]
    supports: np.ndarray           # [C] true-class counts
    weighted_f1: float
    accuracy: float

    def to_dict(self):
        return {
            "confusion": self.confusion.tolist(),
            "precision": [round(float(x), 6) for x in self.precision],
            "recall": [round(float(x), 6) for x in self.recall],
            "f1": [round(float(x), 6) for x in self.f1],
            "supports": self.supports.tolist(),
            "weighted_f1": round(float(self.weighted_f1), 6),
            "accuracy": round(float(self.accuracy), 6),
        }

    def summary(self):
        lines = ["class            precision  recall     f1         support"]
        for c, name in enumerate(CLASS_NAMES):
            lines.append(f"{name:<16} {self.precision[c]:<10.4f} "
                         f"{self.recall[c]:<10.4f} {self.f1[c]:<10.4f} "
                         f"{self.supports[c]}")
        lines.append(f"weighted F1 {self.weighted_f1:.4f}   "
                     f"accuracy {self.accuracy:.4f}")
        return "\n".join(lines)


def confusion(labels, preds, num_classes=NUM_CLASSES):
    """Count matrix: counts[t][p] = |{i : labels_i = t and preds_i = p}|."""
    labels = np.asarray(labels)
    preds = np.asarray(preds)
    if labels.shape != preds.shape or labels.ndim != 1:
        raise ValueError(f"labels {labels.shape} and preds {preds.shape} "
                         "must be equal-length vectors")
    if labels.size == 0:
        raise ValueError("cannot evaluate zero trials")
    for name, v in (("labels", labels), ("preds", preds)):
        if v.min() < 0 or v.max() >= num_classes:
            raise ValueError(f"{name} contain values outside [0, {num_classes})")
    cm = np.zeros((num_classes, num_classes), dtype=np.int64)
    np.add.at(cm, (labels, preds), 1)
    return cm


def per_class_prf(cm):
    """(precision, recall, f1, supports) with the zero-denominator rule."""
    cm = np.asarray(cm, dtype=np.float64)
    tp = np.diag(cm)
    pred_totals = cm.sum(axis=0)
    supports = cm.sum(axis=1)
    precision = np.divide(tp, pred_totals, out=np.zeros_like(tp),
                          where=pred_totals > 0)
    recall = np.divide(tp, supports, out=np.zeros_like(tp), where=supports > 0)
    pr = precision + recall
    f1 = np.divide(2 * precision * recall, pr, out=np.zeros_like(tp),
                   where=pr > 0)
    return precision, recall, f1, supports.astype(np.int64)


def weighted_f1(cm):
    """Per-class F1 averaged with true-class support weights."""
    cm = np.asarray(cm)
    total = cm.sum()
    if total <= 0:
        raise ValueError("confusion matrix is empty")
    _, _, f1, supports = per_class_prf(cm)
    return float((f1 * supports).sum() / supports.sum())


def evaluate(labels, preds, num_classes=NUM_CLASSES):
    """Full report from parallel label / prediction vectors."""
    cm = confusion(labels, preds, num_classes)
    precision, recall, f1, supports = per_class_prf(cm)
    acc = float(np.trace(cm) / cm.sum())
    return EvalReport(cm, precision, recall, f1, supports,
                      weighted_f1(cm), acc)
