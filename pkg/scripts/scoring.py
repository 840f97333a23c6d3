#!/usr/bin/env python3
"""Metric definitions for OFF/NOT classification.

Per-class precision, recall and F1 use the 0/0 -> 0 convention. The reported
``precision`` and ``recall`` are macro-averaged, ``macro_f1`` is the unweighted mean of
the two class F1 scores and ``weighted_f1`` the support-weighted mean.
"""
from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

import numpy as np
from sklearn.metrics import confusion_matrix

from scripts.corpus import Label
from scripts.errors import EvaluationError

LABEL_ORDER: Tuple[Label, Label] = (Label.OFF, Label.NOT)
METRIC_NAMES = ("precision", "recall", "macro_f1", "weighted_f1", "accuracy")


@dataclass(frozen=True)
class ConfusionMatrix:
    """2x2 counts indexed by (gold, pred) in ``LABEL_ORDER``."""

    counts: Tuple[Tuple[int, int], Tuple[int, int]]

    def count(self, gold: Label, pred: Label) -> int:
        return self.counts[LABEL_ORDER.index(gold)][LABEL_ORDER.index(pred)]

    @property
    def total(self) -> int:
        return sum(sum(row) for row in self.counts)

    def support(self, label: Label) -> int:
        return sum(self.counts[LABEL_ORDER.index(label)])

    def true_positives(self, label: Label) -> int:
        return self.count(label, label)

    def false_positives(self, label: Label) -> int:
        return sum(self.count(g, label) for g in LABEL_ORDER if g is not label)

    def false_negatives(self, label: Label) -> int:
        return sum(self.count(label, p) for p in LABEL_ORDER if p is not label)

    def to_dict(self) -> dict:
        return {
            f"{g.value}->{p.value}": self.count(g, p) for g in LABEL_ORDER for p in LABEL_ORDER
        }


@dataclass(frozen=True)
class ClassMetrics:
    precision: float
    recall: float
    f1: float
    support: int


@dataclass(frozen=True)
class Metrics:
    per_class: Dict[Label, ClassMetrics]
    precision: float
    recall: float
    macro_f1: float
    weighted_f1: float
    accuracy: float

    def value(self, name: str) -> float:
        if name not in METRIC_NAMES:
            raise KeyError(name)
        return float(getattr(self, name))

    def to_dict(self) -> dict:
        return {
            "precision": self.precision,
            "recall": self.recall,
            "macro_f1": self.macro_f1,
            "weighted_f1": self.weighted_f1,
            "accuracy": self.accuracy,
            "per_class": {
                label.value: {
                    "precision": cm.precision,
                    "recall": cm.recall,
                    "f1": cm.f1,
                    "support": cm.support,
                }
                for label, cm in self.per_class.items()
            },
        }


def _ratio(num: int, den: int) -> float:
    return num / den if den else 0.0


def confusion(preds: Sequence[Label], golds: Sequence[Label]) -> ConfusionMatrix:
    if len(preds) != len(golds):
        raise EvaluationError(f"{len(preds)} predictions for {len(golds)} gold labels")
    if not golds:
        raise EvaluationError("cannot score an empty prediction set")
    labels = [label.value for label in LABEL_ORDER]
    matrix = confusion_matrix(
        [Label(g).value for g in golds], [Label(p).value for p in preds], labels=labels
    )
    return ConfusionMatrix(tuple(tuple(int(v) for v in row) for row in matrix))


def compute_metrics(cm: ConfusionMatrix) -> Metrics:
    if cm.total <= 0:
        raise EvaluationError("confusion matrix is empty")
    per_class: Dict[Label, ClassMetrics] = {}
    for label in LABEL_ORDER:
        tp = cm.true_positives(label)
        precision = _ratio(tp, tp + cm.false_positives(label))
        recall = _ratio(tp, tp + cm.false_negatives(label))
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        per_class[label] = ClassMetrics(precision, recall, f1, cm.support(label))

    classes = list(per_class.values())
    return Metrics(
        per_class=per_class,
        precision=float(np.mean([c.precision for c in classes])),
        recall=float(np.mean([c.recall for c in classes])),
        macro_f1=float(np.mean([c.f1 for c in classes])),
        weighted_f1=sum(c.f1 * c.support for c in classes) / cm.total,
        accuracy=sum(cm.true_positives(label) for label in LABEL_ORDER) / cm.total,
    )


def score_labels(preds: Sequence[Label], golds: Sequence[Label]) -> Metrics:
    return compute_metrics(confusion(preds, golds))


def aggregate(metrics: List[Metrics]) -> Dict[str, Dict[str, float]]:
    """Mean and population standard deviation of each metric across runs."""
    if not metrics:
        raise EvaluationError("nothing to aggregate")
    out: Dict[str, Dict[str, float]] = {}
    for name in METRIC_NAMES:
        values = np.array([m.value(name) for m in metrics], dtype=np.float64)
        out[name] = {"mean": float(values.mean()), "std": float(values.std())}
    return out


def format_metrics(metrics: Metrics) -> str:
    """One-line summary for console output."""
    return (
        f"P={metrics.precision:.4f} R={metrics.recall:.4f} "
        f"macro-F1={metrics.macro_f1:.4f} weighted-F1={metrics.weighted_f1:.4f} "
        f"acc={metrics.accuracy:.4f}"
    )


if __name__ == "__main__":
    import json

    example = confusion(
        [Label.OFF, Label.NOT, Label.NOT, Label.NOT], [Label.OFF, Label.OFF, Label.NOT, Label.NOT]
    )
    print("Metric definitions (precision/recall macro-averaged)")
    print("=" * 60)
    payload = {"confusion": example.to_dict(), **compute_metrics(example).to_dict()}
    print(json.dumps(payload, indent=2))
