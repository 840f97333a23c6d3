#!/usr/bin/env python3
"""Cross-model error analysis over prediction reports.

* misclassified_by_all: tweets every run gets wrong, split into OFF->NOT and NOT->OFF
* misclassified_only_by: tweets one run gets wrong while all others are right
* feature_family_contrast: tweets one feature family always misses while most runs of
  the other family get them right
* length_and_repetition_profile: token counts and letter-repeat rate of the raw text
"""
import json
import logging
import re
import statistics
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, FrozenSet, List, Mapping, Optional, Sequence, Set, Tuple

from scripts.corpus import Corpus, Label
from scripts.errors import AnalysisError, ConfigError
from scripts.evaluate import PredictionRecord, read_predictions

LOGGER = logging.getLogger(__name__)

OFF_AS_NOT = "OFF->NOT"
NOT_AS_OFF = "NOT->OFF"
# a letter repeated three or more times in a row
REPEAT_RUN_PATTERN = re.compile(r"([^\W\d_])\1{2,}")


@dataclass(frozen=True)
class PredictionRun:
    run_id: str
    arch: str
    feature: str
    records: Tuple[PredictionRecord, ...]
    _by_id: Dict[str, PredictionRecord] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "records", tuple(self.records))
        by_id: Dict[str, PredictionRecord] = {}
        for r in self.records:
            if r.id in by_id:
                raise AnalysisError(f"run {self.run_id}: duplicate id {r.id!r}")
            by_id[r.id] = r
        object.__setattr__(self, "_by_id", by_id)

    @classmethod
    def from_report(cls, path: Path, run_id: Optional[str] = None) -> "PredictionRun":
        model, records = read_predictions(path)
        return cls(
            run_id=run_id or str(path),
            arch=str(model.get("arch", "")),
            feature=str(model.get("feature", "")),
            records=tuple(records),
        )

    @property
    def ids(self) -> FrozenSet[str]:
        return frozenset(self._by_id)

    def record(self, tweet_id: str) -> PredictionRecord:
        return self._by_id[tweet_id]

    def is_correct(self, tweet_id: str) -> bool:
        return self._by_id[tweet_id].correct

    def errors(self) -> Set[str]:
        return {r.id for r in self.records if not r.correct}


@dataclass(frozen=True)
class ErrorReport:
    run_ids: Tuple[str, ...]
    off_as_not: Tuple[str, ...] = ()
    not_as_off: Tuple[str, ...] = ()
    texts: Mapping[str, str] = field(default_factory=dict)

    @property
    def ids(self) -> Tuple[str, ...]:
        return self.off_as_not + self.not_as_off

    @property
    def counts(self) -> Dict[str, int]:
        return {OFF_AS_NOT: len(self.off_as_not), NOT_AS_OFF: len(self.not_as_off)}

    def sets(self) -> Dict[str, Tuple[str, ...]]:
        return {OFF_AS_NOT: self.off_as_not, NOT_AS_OFF: self.not_as_off}

    def to_dict(self) -> Dict:
        return {
            "runs": list(self.run_ids),
            "counts": self.counts,
            **{
                name: [{"id": i, "text": self.texts.get(i)} for i in ids]
                for name, ids in self.sets().items()
            },
        }


def _check_coverage(runs: Sequence[PredictionRun]) -> FrozenSet[str]:
    if not runs:
        raise AnalysisError("at least one prediction run is required")
    ids = runs[0].ids
    for run in runs[1:]:
        if run.ids != ids:
            raise AnalysisError(
                f"run {run.run_id} covers {len(run.ids)} ids, {runs[0].run_id} covers {len(ids)}; "
                f"{len(run.ids ^ ids)} differ"
            )
    for tweet_id in ids:
        golds = {run.record(tweet_id).gold for run in runs}
        if len(golds) > 1:
            raise AnalysisError(f"runs disagree on the gold label of {tweet_id!r}")
    return ids


def _partition(runs: Sequence[PredictionRun], ids: Set[str]) -> ErrorReport:
    reference = runs[0]
    off = sorted(i for i in ids if reference.record(i).gold is Label.OFF)
    not_ = sorted(i for i in ids if reference.record(i).gold is Label.NOT)
    return ErrorReport(tuple(r.run_id for r in runs), tuple(off), tuple(not_))


def misclassified_by_all(runs: Sequence[PredictionRun]) -> ErrorReport:
    _check_coverage(runs)
    common = set.intersection(*(run.errors() for run in runs))
    report = _partition(runs, common)
    LOGGER.info("Misclassified by all %d runs: %s", len(runs), report.counts)
    return report


def misclassified_only_by(runs: Sequence[PredictionRun], run_id: str) -> ErrorReport:
    """Ids the named run gets wrong while every other run gets them right."""
    ids = _check_coverage(runs)
    target = [r for r in runs if r.run_id == run_id]
    if not target:
        raise AnalysisError(f"unknown run {run_id!r}")
    others = [r for r in runs if r.run_id != run_id]
    only = {i for i in target[0].errors() if all(o.is_correct(i) for o in others)}
    return _partition(runs, only & ids)


def _mostly_right(family: Sequence[PredictionRun], tweet_id: str, threshold: float) -> bool:
    fraction = sum(run.is_correct(tweet_id) for run in family) / len(family)
    if threshold >= 1.0:
        return fraction == 1.0
    return fraction > threshold


def feature_family_contrast(
    family_a: Sequence[PredictionRun],
    family_b: Sequence[PredictionRun],
    majority_threshold: float = 0.5,
) -> Tuple[Set[str], Set[str]]:
    """(wrong in all of A but right in most of B, the mirror image).

    "Most" means a fraction strictly above ``majority_threshold``; a threshold of 1.0
    requires every run of the other family to be right.
    """
    if not family_a or not family_b:
        raise AnalysisError("both feature families need at least one run")
    if not 0.0 <= majority_threshold <= 1.0:
        raise ConfigError(f"majority threshold must be in [0, 1], got {majority_threshold}")
    ids = _check_coverage(list(family_a) + list(family_b))

    def contrast(wrong_family, right_family) -> Set[str]:
        return {
            i
            for i in ids
            if all(not run.is_correct(i) for run in wrong_family)
            and _mostly_right(right_family, i, majority_threshold)
        }

    return contrast(family_a, family_b), contrast(family_b, family_a)


def attach_texts(report: ErrorReport, corpus: Corpus) -> ErrorReport:
    """Copy of ``report`` carrying the raw text of each listed tweet."""
    missing = [i for i in report.ids if i not in corpus]
    if missing:
        raise AnalysisError(
            f"{len(missing)} report ids are not in the corpus (first: {missing[0]})"
        )
    return replace(report, texts={i: corpus[i].text for i in report.ids})


@dataclass(frozen=True)
class SetProfile:
    """Statistics of one error set; None when the set is empty."""

    size: int
    mean_tokens: Optional[float]
    median_tokens: Optional[float]
    repeat_fraction: Optional[float]

    def to_dict(self) -> Dict:
        return {
            "size": self.size,
            "mean_tokens": self.mean_tokens,
            "median_tokens": self.median_tokens,
            "repeat_fraction": self.repeat_fraction,
        }


def has_repeat_run(text: str) -> bool:
    return REPEAT_RUN_PATTERN.search(text) is not None


def profile_texts(texts: Sequence[str]) -> SetProfile:
    if not texts:
        return SetProfile(0, None, None, None)
    lengths = [len(t.split()) for t in texts]
    return SetProfile(
        size=len(texts),
        mean_tokens=float(statistics.fmean(lengths)),
        median_tokens=float(statistics.median(lengths)),
        repeat_fraction=sum(has_repeat_run(t) for t in texts) / len(texts),
    )


def length_and_repetition_profile(report: ErrorReport, corpus: Corpus) -> Dict[str, SetProfile]:
    """Per error set: token counts and repeat-run rate, measured on the raw corpus text."""
    profiles: Dict[str, SetProfile] = {}
    for name, ids in report.sets().items():
        missing = [i for i in ids if i not in corpus]
        if missing:
            raise AnalysisError(f"id {missing[0]!r} of {name} is not in the corpus")
        profiles[name] = profile_texts([corpus[i].text for i in ids])
    return profiles


def write_error_report(
    report: ErrorReport,
    json_path: Path,
    tsv_path: Path,
    profile: Optional[Dict[str, SetProfile]] = None,
    extra: Optional[Dict] = None,
) -> None:
    """JSON report plus a ``set<TAB>id<TAB>text`` TSV for reading by eye."""
    payload = report.to_dict()
    if profile is not None:
        payload["profile"] = {name: p.to_dict() for name, p in profile.items()}
    if extra:
        payload.update(extra)
    json_path, tsv_path = Path(json_path), Path(tsv_path)
    json_path.parent.mkdir(parents=True, exist_ok=True)
    json_path.write_text(json.dumps(payload, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
    lines: List[str] = ["set\tid\ttext"]
    for name, ids in report.sets().items():
        for i in ids:
            text = report.texts.get(i, "")
            lines.append(f"{name}\t{i}\t{text.replace(chr(9), ' ').replace(chr(10), ' ')}")
    tsv_path.parent.mkdir(parents=True, exist_ok=True)
    tsv_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    LOGGER.info("Error report written to %s and %s", json_path, tsv_path)
