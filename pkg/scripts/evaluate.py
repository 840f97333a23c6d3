#!/usr/bin/env python3
"""Evaluation harness: held-out split scoring, k-fold cross-validation and JSON reports.

Usage:
  python3 scripts/evaluate.py --gold data/test.tsv --pred runs/<run>/report.json
  python3 scripts/evaluate.py --gold data/test.tsv --pred runs/<run>/report.json -o rescored.json

A report is a JSON object documented in evaluation/report_schema.json:

- model        name, arch, feature and the full model spec
- averaging    always "macro" (precision and recall columns are macro-averaged)
- test         metrics and confusion counts on the held-out split, or null
- cv           per-fold metrics with mean/std per metric, or null
- predictions  one {id, gold, pred, probability} object per test tweet

Cross-validation fits the feature artifacts on the k-1 training folds only.
"""
import argparse
import json
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from joblib import Parallel, delayed

from scripts.corpus import Corpus, Label, load_tsv, make_folds, upsample_minority
from scripts.errors import EvaluationError, FormatError, SalamNetError
from scripts.features import EmbeddingTable
from scripts.models import ModelSpec, TrainedModel, fit_model, predict_texts
from scripts.preprocess import Pipeline
from scripts.scoring import (
    ConfusionMatrix,
    Metrics,
    aggregate,
    compute_metrics,
    confusion,
    format_metrics,
)

LOGGER = logging.getLogger(__name__)

AVERAGING = "macro"


@dataclass(frozen=True)
class PredictionRecord:
    id: str
    gold: Label
    pred: Label
    probability: float

    @property
    def correct(self) -> bool:
        return self.gold is self.pred

    def to_dict(self) -> Dict:
        return {
            "id": self.id,
            "gold": self.gold.value,
            "pred": self.pred.value,
            "probability": self.probability,
        }

    @classmethod
    def from_dict(cls, raw: Dict) -> "PredictionRecord":
        return cls(
            str(raw["id"]), Label(raw["gold"]), Label(raw["pred"]), float(raw["probability"])
        )


@dataclass(frozen=True)
class SplitResult:
    metrics: Metrics
    confusion: ConfusionMatrix
    records: List[PredictionRecord]

    def to_dict(self) -> Dict:
        return {"metrics": self.metrics.to_dict(), "confusion": self.confusion.to_dict()}


@dataclass(frozen=True)
class FoldResult:
    fold: int
    n_train: int
    n_test: int
    metrics: Metrics

    def to_dict(self) -> Dict:
        return {
            "fold": self.fold,
            "n_train": self.n_train,
            "n_test": self.n_test,
            "metrics": self.metrics.to_dict(),
        }


@dataclass(frozen=True)
class CVReport:
    model: str
    k: int
    seed: int
    folds: List[FoldResult]
    models: List[TrainedModel] = field(default_factory=list, compare=False, repr=False)

    def __post_init__(self):
        if len(self.folds) != self.k:
            raise EvaluationError(f"{len(self.folds)} fold results for k={self.k}")

    @property
    def summary(self) -> Dict[str, Dict[str, float]]:
        return aggregate([f.metrics for f in self.folds])

    def to_dict(self) -> Dict:
        return {
            "model": self.model,
            "k": self.k,
            "seed": self.seed,
            "averaging": AVERAGING,
            "folds": [f.to_dict() for f in self.folds],
            "summary": self.summary,
        }


def _records(corpus: Corpus, outputs: List[Tuple[float, Label]]) -> List[PredictionRecord]:
    return [
        PredictionRecord(t.id, t.label, label, prob) for t, (prob, label) in zip(corpus, outputs)
    ]


def evaluate_split(
    model: TrainedModel, test: Corpus, pipeline: Optional[Pipeline] = None
) -> SplitResult:
    """Preprocess (if a pipeline is given), featurize, predict and score ``test``."""
    if len(test) == 0:
        raise EvaluationError("test split is empty")
    if pipeline is not None:
        test = pipeline.preprocess_corpus(test)
    records = _records(test, predict_texts(model, test.texts))
    cm = confusion([r.pred for r in records], [r.gold for r in records])
    metrics = compute_metrics(cm)
    LOGGER.info("%s on %d tweets: %s", model.name, len(test), format_metrics(metrics))
    return SplitResult(metrics, cm, records)


def _run_fold(
    spec: ModelSpec,
    train: Corpus,
    test: Corpus,
    fold: int,
    embeddings: Optional[EmbeddingTable],
    upsample: bool,
) -> Tuple[FoldResult, TrainedModel]:
    if upsample:
        train = upsample_minority(train, spec.hyper.seed)
    model = fit_model(spec, train, None, embeddings)
    records = _records(test, predict_texts(model, test.texts))
    metrics = compute_metrics(confusion([r.pred for r in records], [r.gold for r in records]))
    LOGGER.info("%s fold %d: %s", spec.name, fold, format_metrics(metrics))
    return FoldResult(fold, len(train), len(test), metrics), model


def cross_validate(
    spec: ModelSpec,
    corpus: Corpus,
    k: int = 10,
    seed: int = 0,
    embeddings: Optional[EmbeddingTable] = None,
    pipeline: Optional[Pipeline] = None,
    upsample: bool = False,
    jobs: int = 1,
    keep_models: bool = False,
) -> CVReport:
    """k-fold CV; fold i trains on the other folds with seed ``spec.hyper.seed + i``.

    Single-class test folds are scored with the 0/0 -> 0 convention rather than aborted.
    """
    counts = corpus.class_counts()
    if min(counts.values()) == 0:
        raise EvaluationError("cross-validation needs both classes in the corpus")
    if pipeline is not None:
        corpus = pipeline.preprocess_corpus(corpus)
    plan = make_folds(corpus, k, seed)
    jobs_args = []
    for fold in range(k):
        train, test = plan.split(corpus, fold)
        fold_spec = spec.with_hyper(seed=spec.hyper.seed + fold)
        jobs_args.append((fold_spec, train, test, fold, embeddings, upsample))
    outcomes = Parallel(n_jobs=jobs)(delayed(_run_fold)(*args) for args in jobs_args)
    report = CVReport(
        model=spec.name,
        k=k,
        seed=seed,
        folds=[result for result, _ in outcomes],
        models=[model for _, model in outcomes] if keep_models else [],
    )
    mean_f1 = report.summary["macro_f1"]
    LOGGER.info(
        "%s %d-fold CV macro-F1 %.4f +/- %.4f", spec.name, k, mean_f1["mean"], mean_f1["std"]
    )
    return report


def build_report(
    spec: ModelSpec,
    test: Optional[SplitResult] = None,
    cv: Optional[CVReport] = None,
) -> Dict:
    return {
        "model": {
            "name": spec.name,
            "arch": spec.arch.value,
            "feature": spec.feature.value,
            "spec": spec.model_dump(mode="json"),
        },
        "averaging": AVERAGING,
        "test": None if test is None else test.to_dict(),
        "cv": None if cv is None else cv.to_dict(),
        "predictions": [] if test is None else [r.to_dict() for r in test.records],
    }


def write_report(report: Dict, path: Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(report, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
    LOGGER.info("Report written to %s", path)


def read_predictions(path: Path) -> Tuple[Dict, List[PredictionRecord]]:
    """Model block and per-tweet records of a report file."""
    path = Path(path)
    try:
        report = json.loads(path.read_text(encoding="utf-8"))
        model = report.get("model") or {}
        records = [PredictionRecord.from_dict(r) for r in report["predictions"]]
    except FileNotFoundError:
        raise EvaluationError(f"report not found: {path}") from None
    except (json.JSONDecodeError, KeyError, TypeError, ValueError, AttributeError) as exc:
        raise FormatError(f"{path}: not a prediction report ({exc})") from None
    ids = [r.id for r in records]
    if len(set(ids)) != len(ids):
        raise FormatError(f"{path}: duplicate prediction ids")
    return model, records


def evaluate(gold: Corpus, records: List[PredictionRecord]) -> Dict:
    """Rescore prediction records against a gold corpus (ids must match exactly)."""
    by_id = {r.id: r for r in records}
    missing = [t.id for t in gold if t.id not in by_id]
    if missing:
        raise EvaluationError(
            f"{len(missing)} gold tweets have no prediction (first: {missing[0]})"
        )
    extra = set(by_id) - set(gold.ids)
    if extra:
        raise EvaluationError(f"{len(extra)} predictions for unknown ids")
    preds = [by_id[t.id].pred for t in gold]
    cm = confusion(preds, gold.labels)
    metrics = compute_metrics(cm)
    return {
        "items": len(gold),
        "averaging": AVERAGING,
        "confusion": cm.to_dict(),
        **{k: round(v, 4) if isinstance(v, float) else v for k, v in metrics.to_dict().items()},
    }


def main() -> int:
    p = argparse.ArgumentParser(
        description="Rescore a prediction report against a gold TSV file.",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  # Rescore the predictions of a finished run
  python3 scripts/evaluate.py --gold data/test.tsv --pred runs/demo/report.json

  # Write the metrics to a file
  python3 scripts/evaluate.py --gold data/test.tsv --pred runs/demo/report.json -o metrics.json
        """,
    )
    p.add_argument("--gold", required=True, help="Gold TSV file (id, text, label)")
    p.add_argument("--pred", required=True, help="Report JSON with a predictions array")
    p.add_argument("--output", "-o", type=str, help="Output file for results (default: stdout)")
    args = p.parse_args()

    try:
        _, records = read_predictions(Path(args.pred))
        result = evaluate(load_tsv(Path(args.gold)), records)
    except FileNotFoundError as exc:
        print(f"Error: file not found: {exc.filename}", file=sys.stderr)
        return 1
    except SalamNetError as exc:
        print(f"Error: {exc}", file=sys.stderr)
        return exc.exit_code

    output = json.dumps(result, indent=2)
    if args.output:
        Path(args.output).write_text(output + "\n", encoding="utf-8")
        print(f"Results written to {args.output}")
    else:
        print(output)
    return 0


if __name__ == "__main__":
    sys.exit(main())
