"""Model inputs: character n-gram TF-IDF, word embeddings and per-token sequences.

TF-IDF uses raw counts of character 2..5-grams (spaces included), the smoothed idf
``ln((1 + N) / (1 + df)) + 1`` and L2-normalized rows. Recurrent models consume
``SequenceTensor`` objects, built either from an embedding table or from the TF-IDF
model through one of two bridges:

* ``hashed``   one vector per token; each in-vocabulary n-gram of the token adds its
               document tf x idf weight to bucket ``fnv1a_64(ngram) % buckets``
* ``document`` the whole document TF-IDF vector as a length-1 sequence
"""
import logging
import re
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import sparse
from sklearn.feature_extraction.text import CountVectorizer, TfidfTransformer
from sklearn.preprocessing import normalize

from scripts.errors import ConfigError, FitError, FormatError

LOGGER = logging.getLogger(__name__)

NGRAM_RANGE = (2, 5)
DEFAULT_BUCKETS = 256
MIN_BUCKETS = 16
DEFAULT_MAX_LEN = 50
DEFAULT_EMBEDDING_DIM = 300

FNV_OFFSET = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3
FNV_MASK = (1 << 64) - 1

_ESCAPES = {"\\": "\\\\", "\t": "\\t", "\n": "\\n"}
_UNESCAPE_PATTERN = re.compile(r"\\(.)")
_UNESCAPES = {"\\": "\\", "t": "\t", "n": "\n"}


class FeatureKind(str, Enum):
    TFIDF = "tfidf"
    ARAVEC = "aravec"


class SequenceBridge(str, Enum):
    HASHED = "hashed"
    DOCUMENT = "document"


def char_ngrams(text: str) -> List[str]:
    """All character n-grams of ``text`` (with repetitions), sliding over spaces too.

    Windows are taken over the raw string; whitespace runs are not collapsed.
    """
    lo, hi = NGRAM_RANGE
    return [text[i : i + n] for n in range(lo, hi + 1) for i in range(len(text) - n + 1)]


def _char_vectorizer(vocabulary: Optional[Dict[str, int]] = None) -> CountVectorizer:
    return CountVectorizer(analyzer=char_ngrams, vocabulary=vocabulary)


@dataclass(frozen=True)
class SparseVector:
    dim: int
    entries: Tuple[Tuple[int, float], ...] = ()

    @property
    def indices(self) -> List[int]:
        return [i for i, _ in self.entries]

    @property
    def values(self) -> List[float]:
        return [v for _, v in self.entries]

    def norm(self) -> float:
        return float(np.sqrt(sum(v * v for _, v in self.entries)))

    def to_dense(self) -> np.ndarray:
        out = np.zeros(self.dim, dtype=np.float64)
        for i, v in self.entries:
            out[i] = v
        return out

    @classmethod
    def from_csr_row(cls, row: sparse.csr_matrix) -> "SparseVector":
        row = row.tocsr(copy=True)
        row.eliminate_zeros()
        row.sort_indices()
        return cls(
            dim=row.shape[1],
            entries=tuple((int(i), float(v)) for i, v in zip(row.indices, row.data)),
        )


@dataclass(frozen=True, eq=False)
class TfidfModel:
    """Fitted character n-gram vocabulary with smoothed idf weights.

    ``vocab`` maps each n-gram to its column; columns follow lexicographic n-gram order.
    """

    vocab: Dict[str, int]
    idf: np.ndarray
    n_docs: int
    ngram_range: Tuple[int, int] = NGRAM_RANGE
    _vectorizer: CountVectorizer = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if len(self.idf) != len(self.vocab):
            raise FormatError(f"{len(self.vocab)} n-grams but {len(self.idf)} idf weights")
        if sorted(self.vocab.values()) != list(range(len(self.vocab))):
            raise FormatError("column indices are not a bijection onto 0..|vocab|-1")
        object.__setattr__(self, "_vectorizer", _char_vectorizer(dict(self.vocab)))

    @property
    def dim(self) -> int:
        return len(self.vocab)

    def column(self, ngram: str) -> Optional[int]:
        return self.vocab.get(ngram)

    def weight(self, ngram: str) -> Optional[float]:
        col = self.vocab.get(ngram)
        return None if col is None else float(self.idf[col])

    def counts(self, texts: Sequence[str]) -> sparse.csr_matrix:
        return self._vectorizer.transform(list(texts)).astype(np.float64)

    def save(self, path: Path) -> None:
        """Write ``ngram<TAB>index<TAB>idf`` lines under a one-line header."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        lo, hi = self.ngram_range
        with path.open("w", encoding="utf-8", newline="\n") as f:
            f.write(f"# n_docs={self.n_docs} ngram_range={lo},{hi}\n")
            for ngram, col in sorted(self.vocab.items(), key=lambda kv: kv[1]):
                f.write(f"{_escape(ngram)}\t{col}\t{float(self.idf[col]):.17g}\n")

    @classmethod
    def load(cls, path: Path) -> "TfidfModel":
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"TF-IDF model not found: {path}")
        vocab: Dict[str, int] = {}
        weights: Dict[int, float] = {}
        with path.open("r", encoding="utf-8", newline="\n") as f:
            header = f.readline().rstrip("\n")
            n_docs, ngram_range = _parse_tfidf_header(header)
            for line_no, raw in enumerate(f, 2):
                line = raw.rstrip("\n")
                if not line:
                    continue
                parts = line.split("\t")
                if len(parts) != 3:
                    raise FormatError(f"{path}: expected 'ngram<TAB>index<TAB>idf'", line_no)
                ngram = _unescape(parts[0])
                try:
                    col, weight = int(parts[1]), float(parts[2])
                except ValueError:
                    raise FormatError(f"{path}: bad index or idf value", line_no) from None
                if ngram in vocab or col in weights:
                    raise FormatError(f"{path}: duplicate n-gram or column {col}", line_no)
                vocab[ngram] = col
                weights[col] = weight
        idf = np.array([weights.get(i, np.nan) for i in range(len(vocab))], dtype=np.float64)
        return cls(vocab=vocab, idf=idf, n_docs=n_docs, ngram_range=ngram_range)


def _escape(text: str) -> str:
    return "".join(_ESCAPES.get(ch, ch) for ch in text)


def _unescape(text: str) -> str:
    return _UNESCAPE_PATTERN.sub(lambda m: _UNESCAPES.get(m.group(1), m.group(0)), text)


def _parse_tfidf_header(header: str) -> Tuple[int, Tuple[int, int]]:
    match = re.fullmatch(r"# n_docs=(\d+) ngram_range=(\d+),(\d+)", header.strip())
    if not match:
        raise FormatError(f"bad TF-IDF header {header!r}", 1)
    return int(match.group(1)), (int(match.group(2)), int(match.group(3)))


@dataclass(frozen=True, eq=False)
class EmbeddingTable:
    vocab: Dict[str, int]
    matrix: np.ndarray

    @property
    def dim(self) -> int:
        return int(self.matrix.shape[1])

    def __len__(self) -> int:
        return len(self.vocab)

    def __contains__(self, token: object) -> bool:
        return token in self.vocab

    def lookup(self, token: str) -> Optional[np.ndarray]:
        """Row for ``token``; ``None`` when out of vocabulary."""
        row = self.vocab.get(token)
        return None if row is None else self.matrix[row]


@dataclass(frozen=True, eq=False)
class SequenceTensor:
    """Per-token input matrix for the recurrent cells; padded rows are zero and unmasked."""

    vectors: np.ndarray
    mask: np.ndarray

    @property
    def length(self) -> int:
        return int(self.vectors.shape[0])

    @property
    def dim(self) -> int:
        return int(self.vectors.shape[1])


def fit_char_tfidf(corpus: Sequence[str]) -> TfidfModel:
    """Fit the n-gram vocabulary and smoothed idf over ``corpus``."""
    texts = list(corpus)
    if not texts:
        raise FitError("cannot fit TF-IDF on an empty corpus")
    vectorizer = _char_vectorizer()
    try:
        counts = vectorizer.fit_transform(texts)
    except ValueError:
        raise FitError(
            f"no character n-grams of length {NGRAM_RANGE[0]}+ in {len(texts)} documents"
        ) from None
    transformer = TfidfTransformer(norm="l2", use_idf=True, smooth_idf=True, sublinear_tf=False)
    transformer.fit(counts)
    vocab = {ngram: int(col) for ngram, col in vectorizer.vocabulary_.items()}
    LOGGER.info("Fitted TF-IDF on %d documents: %d n-grams", len(texts), len(vocab))
    idf = np.asarray(transformer.idf_, dtype=np.float64)
    return TfidfModel(vocab=vocab, idf=idf, n_docs=len(texts))


def transform_tfidf_matrix(model: TfidfModel, texts: Sequence[str]) -> sparse.csr_matrix:
    """Rows of counts x idf, L2-normalized; all-OOV rows stay zero."""
    weighted = model.counts(texts) @ sparse.diags(model.idf, format="csr")
    return normalize(weighted.tocsr(), norm="l2", copy=False)


def transform_tfidf(model: TfidfModel, text: str) -> SparseVector:
    return SparseVector.from_csr_row(transform_tfidf_matrix(model, [text])[0])


def _decode_line(path: Path, raw: bytes, line_no: int) -> str:
    try:
        return raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise FormatError(f"{path}: invalid UTF-8 at byte {exc.start}", line_no) from None


def load_embeddings(path: Path) -> EmbeddingTable:
    """Read a word2vec text file: ``count dim`` header, then ``token v1 .. vdim`` rows."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"embedding file not found: {path}")
    vocab: Dict[str, int] = {}
    rows: List[List[float]] = []
    with path.open("rb") as f:
        header = _decode_line(path, f.readline(), 1).split()
        if len(header) != 2:
            raise FormatError(f"{path}: header must be 'count dim'", 1)
        try:
            count, dim = int(header[0]), int(header[1])
        except ValueError:
            raise FormatError(f"{path}: header must be two integers", 1) from None
        if count < 0 or dim < 1:
            raise FormatError(f"{path}: invalid header {count} {dim}", 1)
        for line_no, raw in enumerate(f, 2):
            parts = _decode_line(path, raw, line_no).split()
            if not parts:
                continue
            token, values = parts[0], parts[1:]
            if len(values) != dim:
                raise FormatError(f"{path}: row has {len(values)} values, expected {dim}", line_no)
            if token in vocab:
                raise FormatError(f"{path}: duplicate token {token!r}", line_no)
            try:
                rows.append([float(v) for v in values])
            except ValueError:
                raise FormatError(f"{path}: non-numeric value", line_no) from None
            vocab[token] = len(rows) - 1
    if len(rows) != count:
        raise FormatError(f"{path}: header announces {count} rows, found {len(rows)}")
    matrix = np.array(rows, dtype=np.float64).reshape(len(rows), dim)
    LOGGER.info("Loaded %d embeddings of width %d from %s", count, dim, path)
    return EmbeddingTable(vocab=vocab, matrix=matrix)


def _empty_sequence(dim: int) -> SequenceTensor:
    return SequenceTensor(np.zeros((1, dim), dtype=np.float64), np.array([False]))


def encode_sequence(
    text: str, table: EmbeddingTable, max_len: int = DEFAULT_MAX_LEN
) -> SequenceTensor:
    """Token embeddings of ``text``; OOV tokens are zero rows that still count as steps."""
    if max_len < 1:
        raise ConfigError(f"max_len must be >= 1, got {max_len}")
    tokens = text.split()[:max_len]
    if not tokens:
        return _empty_sequence(table.dim)
    vectors = np.zeros((len(tokens), table.dim), dtype=np.float64)
    for pos, token in enumerate(tokens):
        row = table.lookup(token)
        if row is not None:
            vectors[pos] = row
    return SequenceTensor(vectors, np.ones(len(tokens), dtype=bool))


@lru_cache(maxsize=65536)
def fnv1a_64(text: str) -> int:
    value = FNV_OFFSET
    for byte in text.encode("utf-8"):
        value ^= byte
        value = (value * FNV_PRIME) & FNV_MASK
    return value


def hash_ngram_sequence(
    text: str,
    model: TfidfModel,
    buckets: int = DEFAULT_BUCKETS,
    max_len: int = DEFAULT_MAX_LEN,
    normalize_tokens: bool = True,
) -> SequenceTensor:
    """Hashed per-token TF-IDF vectors of width ``buckets``.

    Each distinct n-gram of a token contributes ``doc_tf(ngram) * idf(ngram)`` once.
    ``normalize_tokens=False`` leaves the raw bucket sums, whose total mass does not
    depend on ``buckets``.
    """
    if buckets < MIN_BUCKETS:
        raise ConfigError(f"buckets must be >= {MIN_BUCKETS}, got {buckets}")
    tokens = text.split()[:max_len]
    if not tokens:
        return _empty_sequence(buckets)
    doc_tf = Counter(char_ngrams(text))
    vectors = np.zeros((len(tokens), buckets), dtype=np.float64)
    for pos, token in enumerate(tokens):
        for ngram in sorted(set(char_ngrams(token))):
            weight = model.weight(ngram)
            if weight is None:
                continue
            vectors[pos, fnv1a_64(ngram) % buckets] += doc_tf[ngram] * weight
        norm = np.linalg.norm(vectors[pos])
        if normalize_tokens and norm > 0:
            vectors[pos] /= norm
    return SequenceTensor(vectors, np.ones(len(tokens), dtype=bool))


def document_sequence(text: str, model: TfidfModel) -> SequenceTensor:
    dense = transform_tfidf_matrix(model, [text]).toarray()
    return SequenceTensor(dense.astype(np.float64), np.array([bool(text.strip())]))


def mean_pool(table: EmbeddingTable, text: str) -> np.ndarray:
    rows = [r for r in (table.lookup(tok) for tok in text.split()) if r is not None]
    if not rows:
        return np.zeros(table.dim, dtype=np.float64)
    return np.mean(np.stack(rows), axis=0)


@dataclass(frozen=True)
class Featurizer:
    """A feature kind bound to its fitted artifacts.

    TF-IDF featurizers are fitted on training text only; embedding featurizers wrap a
    pretrained table.
    """

    kind: FeatureKind
    tfidf: Optional[TfidfModel] = None
    embeddings: Optional[EmbeddingTable] = None
    bridge: SequenceBridge = SequenceBridge.HASHED
    buckets: int = DEFAULT_BUCKETS
    max_len: int = DEFAULT_MAX_LEN

    def __post_init__(self):
        if self.kind is FeatureKind.TFIDF and self.tfidf is None:
            raise ConfigError("TF-IDF features need a fitted TfidfModel")
        if self.kind is FeatureKind.ARAVEC and self.embeddings is None:
            raise ConfigError("aravec features need an embedding file")
        if self.kind is FeatureKind.TFIDF and self.bridge is SequenceBridge.HASHED:
            if self.buckets < MIN_BUCKETS:
                raise ConfigError(f"buckets must be >= {MIN_BUCKETS}, got {self.buckets}")

    @classmethod
    def fit(
        cls,
        kind: FeatureKind,
        texts: Sequence[str],
        embeddings: Optional[EmbeddingTable] = None,
        bridge: SequenceBridge = SequenceBridge.HASHED,
        buckets: int = DEFAULT_BUCKETS,
        max_len: int = DEFAULT_MAX_LEN,
    ) -> "Featurizer":
        tfidf = fit_char_tfidf(texts) if kind is FeatureKind.TFIDF else None
        return cls(kind, tfidf, embeddings, bridge, buckets, max_len)

    def sequence_dim(self) -> int:
        if self.kind is FeatureKind.ARAVEC:
            return self.embeddings.dim
        return self.buckets if self.bridge is SequenceBridge.HASHED else self.tfidf.dim

    def vector_dim(self) -> int:
        return self.embeddings.dim if self.kind is FeatureKind.ARAVEC else self.tfidf.dim

    def sequence(self, text: str) -> SequenceTensor:
        if self.kind is FeatureKind.ARAVEC:
            return encode_sequence(text, self.embeddings, self.max_len)
        if self.bridge is SequenceBridge.HASHED:
            return hash_ngram_sequence(text, self.tfidf, self.buckets, self.max_len)
        return document_sequence(text, self.tfidf)

    def sequences(self, texts: Sequence[str]) -> List[SequenceTensor]:
        return [self.sequence(t) for t in texts]

    def vectors(self, texts: Sequence[str]) -> Union[sparse.csr_matrix, np.ndarray]:
        """Document vectors for the logistic baseline."""
        if self.kind is FeatureKind.TFIDF:
            return transform_tfidf_matrix(self.tfidf, texts)
        if not texts:
            return np.zeros((0, self.embeddings.dim), dtype=np.float64)
        return np.stack([mean_pool(self.embeddings, t) for t in texts])
