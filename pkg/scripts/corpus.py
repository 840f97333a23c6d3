"""Labeled tweet corpus: TSV ingestion, official split, folds and minority upsampling.

File format (UTF-8, one record per line):

    id<TAB>text<TAB>label

Labels are ``OFF`` or ``NOT``. An optional first line whose third field is ``label`` is
treated as a header. Tabs and newlines inside a tweet are stored escaped as ``\\t`` and ``\\n``.
"""
import logging
from collections import Counter
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Dict, Iterable, Iterator, List, Mapping, Sequence, Tuple

import numpy as np

from scripts.errors import (
    ConfigError,
    LabelError,
    ParseError,
    RebalanceError,
    SplitError,
    UniquenessError,
)

LOGGER = logging.getLogger(__name__)

OFFICIAL_SIZES = (7000, 1000, 2000)
HEADER = ("id", "text", "label")


class Label(str, Enum):
    """Gold label of a tweet."""

    OFF = "OFF"
    NOT = "NOT"

    @property
    def target(self) -> int:
        """Binary training target: 1 for offensive."""
        return 1 if self is Label.OFF else 0

    @classmethod
    def from_target(cls, value: int) -> "Label":
        return cls.OFF if value else cls.NOT


class SplitTag(str, Enum):
    TRAIN = "TRAIN"
    DEV = "DEV"
    TEST = "TEST"
    UNSPLIT = "UNSPLIT"


@dataclass(frozen=True)
class Tweet:
    id: str
    text: str
    label: Label


@dataclass(frozen=True)
class Corpus:
    """Ordered, immutable collection of tweets with unique ids."""

    tweets: Tuple[Tweet, ...] = ()
    split_tag: SplitTag = SplitTag.UNSPLIT
    _index: Dict[str, int] = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "tweets", tuple(self.tweets))
        index: Dict[str, int] = {}
        for pos, tweet in enumerate(self.tweets):
            if tweet.id in index:
                raise UniquenessError(f"duplicate tweet id {tweet.id!r}")
            index[tweet.id] = pos
        object.__setattr__(self, "_index", index)

    def __len__(self) -> int:
        return len(self.tweets)

    def __iter__(self) -> Iterator[Tweet]:
        return iter(self.tweets)

    def __getitem__(self, tweet_id: str) -> Tweet:
        return self.tweets[self._index[tweet_id]]

    def __contains__(self, tweet_id: object) -> bool:
        return tweet_id in self._index

    @property
    def ids(self) -> List[str]:
        return [t.id for t in self.tweets]

    @property
    def texts(self) -> List[str]:
        return [t.text for t in self.tweets]

    @property
    def labels(self) -> List[Label]:
        return [t.label for t in self.tweets]

    def targets(self) -> np.ndarray:
        return np.array([t.label.target for t in self.tweets], dtype=np.int64)

    def class_counts(self) -> Dict[Label, int]:
        counts = Counter(t.label for t in self.tweets)
        return {label: counts.get(label, 0) for label in Label}

    def select(self, ids: Iterable[str], split_tag: SplitTag = SplitTag.UNSPLIT) -> "Corpus":
        """Sub-corpus in this corpus' order restricted to ``ids``."""
        wanted = set(ids)
        return Corpus(tuple(t for t in self.tweets if t.id in wanted), split_tag)

    def with_texts(self, texts: Sequence[str]) -> "Corpus":
        """Same ids and labels with replaced texts (e.g. after preprocessing)."""
        if len(texts) != len(self.tweets):
            raise ValueError("text count does not match corpus size")
        return Corpus(
            tuple(replace(t, text=x) for t, x in zip(self.tweets, texts)), self.split_tag
        )


@dataclass(frozen=True)
class FoldPlan:
    k: int
    assignments: Mapping[str, int]
    seed: int

    def fold_ids(self, fold: int) -> List[str]:
        return [tid for tid, f in self.assignments.items() if f == fold]

    def fold_sizes(self) -> List[int]:
        counts = Counter(self.assignments.values())
        return [counts.get(i, 0) for i in range(self.k)]

    def split(self, corpus: Corpus, fold: int) -> Tuple[Corpus, Corpus]:
        """(train, test) corpora for ``fold``; test is the fold itself."""
        test_ids = set(self.fold_ids(fold))
        train = Corpus(tuple(t for t in corpus if t.id not in test_ids), SplitTag.TRAIN)
        test = Corpus(tuple(t for t in corpus if t.id in test_ids), SplitTag.TEST)
        return train, test


def _unescape(text: str) -> str:
    return text.replace("\\t", "\t").replace("\\n", "\n")


def _escape(text: str) -> str:
    return text.replace("\t", "\\t").replace("\n", "\\n")


def _parse_label(raw: str, line_no: int) -> Label:
    try:
        return Label(raw.strip())
    except ValueError:
        raise LabelError(f"unknown label {raw.strip()!r}", line_no) from None


def load_tsv(path: Path, allow_empty_text: bool = False) -> Corpus:
    """Read a labeled TSV file into a Corpus, preserving line order.

    ``allow_empty_text`` accepts records whose text is empty, which happens for
    preprocessed files where every token was a stopword or symbol.
    """
    path = Path(path)
    tweets: List[Tweet] = []
    seen: Dict[str, int] = {}
    warned_extra = False
    with path.open("r", encoding="utf-8", newline="\n") as f:
        for line_no, raw_line in enumerate(f, 1):
            line = raw_line.rstrip("\n").rstrip("\r")
            if not line.strip():
                continue
            parts = line.split("\t")
            if line_no == 1 and len(parts) >= 3 and parts[2].strip().lower() == "label":
                LOGGER.debug("Skipping header line in %s", path)
                continue
            if len(parts) < 3:
                raise ParseError(f"expected 3 tab-separated fields, found {len(parts)}", line_no)
            if len(parts) > 3 and not warned_extra:
                LOGGER.warning("%s: ignoring extra columns from line %d on", path, line_no)
                warned_extra = True
            tweet_id, text, raw_label = parts[0].strip(), _unescape(parts[1]), parts[2]
            if not tweet_id:
                raise ParseError("empty tweet id", line_no)
            if not text.strip() and not allow_empty_text:
                raise ParseError("empty tweet text", line_no)
            label = _parse_label(raw_label, line_no)
            if tweet_id in seen:
                raise UniquenessError(
                    f"line {line_no}: duplicate id {tweet_id!r} "
                    f"(first seen on line {seen[tweet_id]})"
                )
            seen[tweet_id] = line_no
            tweets.append(Tweet(tweet_id, text, label))
    LOGGER.info("Loaded %d tweets from %s", len(tweets), path)
    return Corpus(tuple(tweets))


def save_tsv(corpus: Corpus, path: Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="\n") as f:
        f.write("\t".join(HEADER) + "\n")
        for t in corpus:
            f.write(f"{t.id}\t{_escape(t.text)}\t{t.label.value}\n")


def official_split(
    corpus: Corpus, sizes: Tuple[int, int, int] = OFFICIAL_SIZES
) -> Tuple[Corpus, Corpus, Corpus]:
    """Positional TRAIN/DEV/TEST split; the corpus order is the official order."""
    n_train, n_dev, n_test = sizes
    if min(sizes) < 0 or n_train + n_dev + n_test != len(corpus):
        raise SplitError(f"split sizes {tuple(sizes)} do not add up to corpus size {len(corpus)}")
    tweets = corpus.tweets
    return (
        Corpus(tweets[:n_train], SplitTag.TRAIN),
        Corpus(tweets[n_train : n_train + n_dev], SplitTag.DEV),
        Corpus(tweets[n_train + n_dev :], SplitTag.TEST),
    )


def split_by_fractions(
    corpus: Corpus, fractions: Tuple[float, float, float] = (0.7, 0.1, 0.2)
) -> Tuple[Corpus, Corpus, Corpus]:
    """Positional split by fractions; the rounding remainder goes to TRAIN."""
    if any(f < 0 for f in fractions) or abs(sum(fractions) - 1.0) > 1e-9:
        raise ConfigError(f"split fractions must be non-negative and sum to 1, got {fractions}")
    n = len(corpus)
    n_dev = int(round(fractions[1] * n))
    n_test = int(round(fractions[2] * n))
    return official_split(corpus, (n - n_dev - n_test, n_dev, n_test))


def make_folds(corpus: Corpus, k: int, seed: int) -> FoldPlan:
    """Seeded shuffle followed by round-robin fold assignment."""
    if k < 2:
        raise ConfigError(f"k must be at least 2, got {k}")
    if len(corpus) < k:
        raise ConfigError(f"corpus of {len(corpus)} tweets is too small for {k} folds")
    order = np.random.default_rng(seed).permutation(len(corpus))
    ids = corpus.ids
    assignments = {ids[idx]: pos % k for pos, idx in enumerate(order)}
    return FoldPlan(k=k, assignments=assignments, seed=seed)


def upsample_minority(corpus: Corpus, seed: int) -> Corpus:
    """Duplicate minority-class tweets (uniformly, with replacement) until classes balance."""
    counts = corpus.class_counts()
    if min(counts.values()) == 0:
        raise RebalanceError(f"cannot rebalance a single-class corpus: {_fmt_counts(counts)}")
    minority = min(Label, key=lambda lab: (counts[lab], lab.value))
    deficit = max(counts.values()) - counts[minority]
    if deficit == 0:
        return corpus

    pool = [t for t in corpus if t.label is minority]
    picks = np.random.default_rng(seed).integers(0, len(pool), size=deficit)
    dup_counter: Counter = Counter()
    taken = set(corpus.ids)
    duplicates = []
    for idx in picks:
        original = pool[int(idx)]
        # next free "<id>#dupN"; source ids may already use the suffix
        while True:
            dup_counter[original.id] += 1
            new_id = f"{original.id}#dup{dup_counter[original.id]}"
            if new_id not in taken:
                break
        taken.add(new_id)
        duplicates.append(replace(original, id=new_id))
    LOGGER.info("Upsampled %s with %d duplicates", minority.value, deficit)
    return Corpus(corpus.tweets + tuple(duplicates), corpus.split_tag)


def _fmt_counts(counts: Mapping[Label, int]) -> str:
    return ", ".join(f"{lab.value}:{n}" for lab, n in counts.items())


def read_texts(path: Path) -> List[Tuple[str, str]]:
    """``(id, text)`` pairs of a TSV file whose label column is optional."""
    path = Path(path)
    rows: List[Tuple[str, str]] = []
    seen = set()
    with path.open("r", encoding="utf-8", newline="\n") as f:
        for line_no, raw_line in enumerate(f, 1):
            line = raw_line.rstrip("\n").rstrip("\r")
            if not line.strip():
                continue
            parts = line.split("\t")
            if line_no == 1 and parts[0].strip().lower() == "id":
                continue
            if len(parts) < 2:
                raise ParseError("expected at least id and text fields", line_no)
            tweet_id = parts[0].strip()
            if not tweet_id:
                raise ParseError("empty tweet id", line_no)
            if tweet_id in seen:
                raise UniquenessError(f"line {line_no}: duplicate id {tweet_id!r}")
            seen.add(tweet_id)
            rows.append((tweet_id, _unescape(parts[1])))
    return rows
