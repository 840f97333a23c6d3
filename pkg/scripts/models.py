"""Feature + classifier combinations: the logistic baseline and five recurrent models.

Defaults follow the published final settings: 50 epochs and dropout 0.5 everywhere,
RNN with two 300-wide layers, GRU/Bi-GRU/LSTM/Bi-LSTM with one 100-wide layer.
"""
import json
import logging
from dataclasses import asdict, dataclass, field
from enum import Enum
from itertools import product
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from joblib import Parallel, delayed
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from scipy import sparse
from scipy.special import expit
from sklearn.linear_model import SGDClassifier

from scripts.checkpoint import read_container, write_container
from scripts.corpus import Corpus, Label
from scripts.errors import (
    ConfigError,
    DimensionError,
    FormatError,
    NumericError,
    PredictionError,
    SalamNetError,
    TrainingError,
)
from scripts.features import (
    DEFAULT_BUCKETS,
    DEFAULT_MAX_LEN,
    EmbeddingTable,
    FeatureKind,
    Featurizer,
    SequenceBridge,
    SequenceTensor,
    SparseVector,
    TfidfModel,
    load_embeddings,
)
from scripts.neural import (
    AdamState,
    CellKind,
    ClassifierParams,
    adam_step,
    init_params,
    loss_and_grads,
    pad_batch,
    parameter_shapes,
    predict_batch,
)
from scripts.scoring import score_labels

LOGGER = logging.getLogger(__name__)

CHECKPOINT_FORMAT = "salamnet-model/1"
CHECKPOINT_FILE = "model.ckpt"
TFIDF_FILE = "tfidf.tsv"
PREDICT_CHUNK = 256
THRESHOLD = 0.5

LogisticInput = Union[sparse.spmatrix, np.ndarray, Sequence[SparseVector], Sequence[np.ndarray]]


class Arch(str, Enum):
    LR = "lr"
    RNN = "rnn"
    GRU = "gru"
    BIGRU = "bigru"
    LSTM = "lstm"
    BILSTM = "bilstm"

    @property
    def is_recurrent(self) -> bool:
        return self is not Arch.LR

    @property
    def cell(self) -> CellKind:
        return {
            Arch.RNN: CellKind.RNN,
            Arch.GRU: CellKind.GRU,
            Arch.BIGRU: CellKind.GRU,
            Arch.LSTM: CellKind.LSTM,
            Arch.BILSTM: CellKind.LSTM,
        }[self]

    @property
    def bidirectional(self) -> bool:
        return self in (Arch.BIGRU, Arch.BILSTM)


DEEP_ARCHS: Tuple[Arch, ...] = (Arch.RNN, Arch.GRU, Arch.BIGRU, Arch.LSTM, Arch.BILSTM)
# (hidden, layers) per architecture
ARCH_DEFAULTS: Dict[Arch, Tuple[int, int]] = {
    Arch.RNN: (300, 2),
    Arch.GRU: (100, 1),
    Arch.BIGRU: (100, 1),
    Arch.LSTM: (100, 1),
    Arch.BILSTM: (100, 1),
}


class Hyper(BaseModel):
    """Training hyperparameters; ``hidden``/``layers`` are filled from the architecture."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    epochs: int = Field(50, ge=0)
    dropout: float = Field(0.5, ge=0.0, lt=1.0)
    hidden: Optional[int] = Field(None, ge=1)
    layers: Optional[int] = None
    layer_dropout: float = Field(0.0, ge=0.0, lt=1.0)
    lr: float = Field(1e-3, gt=0.0)
    batch: int = Field(32, ge=1)
    max_len: int = Field(DEFAULT_MAX_LEN, ge=1)
    buckets: int = Field(DEFAULT_BUCKETS, ge=16)
    bridge: SequenceBridge = SequenceBridge.HASHED
    seed: int = 0
    l2: float = Field(1e-4, ge=0.0)
    lr_max_epochs: int = Field(500, ge=1)
    patience: int = Field(5, ge=1)

    @field_validator("layers")
    @classmethod
    def _check_layers(cls, value: Optional[int]) -> Optional[int]:
        if value is not None and value not in (1, 2):
            raise ValueError("layers must be 1 or 2")
        return value


class ModelSpec(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    arch: Arch
    feature: FeatureKind = FeatureKind.TFIDF
    hyper: Hyper = Hyper()

    @model_validator(mode="before")
    @classmethod
    def _arch_defaults(cls, data):
        if not isinstance(data, dict) or "arch" not in data:
            return data
        arch = Arch(data["arch"])
        hyper = data.get("hyper") or {}
        hyper = hyper.model_dump() if isinstance(hyper, Hyper) else dict(hyper)
        if arch.is_recurrent:
            hidden, layers = ARCH_DEFAULTS[arch]
            if hyper.get("hidden") is None:
                hyper["hidden"] = hidden
            if hyper.get("layers") is None:
                hyper["layers"] = layers
        return {**data, "hyper": hyper}

    @property
    def name(self) -> str:
        return f"{self.arch.value}-{self.feature.value}"

    def with_hyper(self, **updates) -> "ModelSpec":
        hyper = {**self.hyper.model_dump(), **updates}
        return ModelSpec(arch=self.arch, feature=self.feature, hyper=hyper)


class GridSpec(BaseModel):
    """Search space for the recurrent hyperparameters."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    dropouts: Tuple[float, ...] = (0.25, 0.5, 0.75, 0.99)
    layers: Tuple[int, ...] = (1, 2)
    hidden: Tuple[int, ...] = (50, 100, 200, 300)

    @field_validator("dropouts")
    @classmethod
    def _check_dropouts(cls, values):
        if any(not 0.25 <= v <= 0.99 for v in values):
            raise ValueError("grid dropouts must lie in [0.25, 0.99]")
        return values

    @field_validator("layers")
    @classmethod
    def _check_layers(cls, values):
        if any(v not in (1, 2) for v in values):
            raise ValueError("grid layers must be 1 or 2")
        return values

    @field_validator("hidden")
    @classmethod
    def _check_hidden(cls, values):
        if any(not 50 <= v <= 300 for v in values):
            raise ValueError("grid hidden sizes must lie in [50, 300]")
        return values

    def points(self) -> List[Tuple[float, int, int]]:
        return sorted(product(self.dropouts, self.layers, self.hidden))


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    train_loss: float
    dev_macro_f1: Optional[float] = None


@dataclass(frozen=True, eq=False)
class LogisticParams:
    weight: np.ndarray
    bias: float


@dataclass(frozen=True, eq=False)
class EncodedData:
    """Featurized examples: sequences for recurrent models or a matrix for LR."""

    y: np.ndarray
    sequences: Optional[List[SequenceTensor]] = None
    matrix: Optional[Union[sparse.csr_matrix, np.ndarray]] = None

    def __len__(self) -> int:
        return len(self.y)


@dataclass(eq=False)
class TrainedModel:
    spec: ModelSpec
    params: Union[ClassifierParams, LogisticParams]
    history: List[EpochRecord] = field(default_factory=list)
    featurizer: Optional[Featurizer] = None
    embeddings_path: Optional[str] = None

    @property
    def name(self) -> str:
        return self.spec.name


@dataclass(frozen=True)
class GridRow:
    dropout: float
    layers: int
    hidden: int
    accuracy: Optional[float] = None
    macro_f1: Optional[float] = None
    error: Optional[str] = None


def encode(featurizer: Featurizer, corpus: Corpus, recurrent: bool) -> EncodedData:
    y = corpus.targets()
    if recurrent:
        return EncodedData(y=y, sequences=featurizer.sequences(corpus.texts))
    return EncodedData(y=y, matrix=featurizer.vectors(corpus.texts))


# --- logistic baseline ------------------------------------------------------------------


def _as_matrix(X: LogisticInput) -> Union[sparse.csr_matrix, np.ndarray]:
    if sparse.issparse(X):
        return sparse.csr_matrix(X, dtype=np.float64)
    if isinstance(X, np.ndarray):
        if X.ndim != 2:
            raise TrainingError(f"expected a 2-D feature matrix, got shape {X.shape}")
        return X.astype(np.float64)
    rows = list(X)
    if not rows:
        return np.zeros((0, 0))
    if isinstance(rows[0], SparseVector):
        dims = {r.dim for r in rows}
        if len(dims) != 1:
            raise TrainingError(f"sparse vectors have mixed dimensions {sorted(dims)}")
        dim = dims.pop()
        data, indices, indptr = [], [], [0]
        for r in rows:
            indices.extend(r.indices)
            data.extend(r.values)
            indptr.append(len(indices))
        return sparse.csr_matrix((data, indices, indptr), shape=(len(rows), dim), dtype=np.float64)
    widths = {np.asarray(r).shape for r in rows}
    if len(widths) != 1:
        raise TrainingError(f"dense vectors have mixed shapes {sorted(widths)}")
    return np.vstack([np.asarray(r, dtype=np.float64) for r in rows])


def _logistic_proba(params: LogisticParams, X) -> np.ndarray:
    return expit(np.asarray(X @ params.weight).ravel() + params.bias)


def _mean_bce(probs: np.ndarray, y: np.ndarray) -> float:
    p = np.clip(probs, 1e-7, 1 - 1e-7)
    return float(-np.mean(y * np.log(p) + (1 - y) * np.log(1 - p)))


def _labels(probs: np.ndarray) -> List[Label]:
    return [Label.OFF if p >= THRESHOLD else Label.NOT for p in probs]


def _macro_f1(probs: np.ndarray, y: np.ndarray) -> float:
    return score_labels(_labels(probs), [Label.from_target(int(v)) for v in y]).macro_f1


def train_logistic(
    X: LogisticInput,
    y: Sequence[int],
    hyper: Optional[Hyper] = None,
    dev: Optional[Tuple[LogisticInput, Sequence[int]]] = None,
    featurizer: Optional[Featurizer] = None,
    spec: Optional[ModelSpec] = None,
) -> TrainedModel:
    """L2-penalized log-loss SGD over shuffled mini-batches with early stopping.

    The monitored quantity is dev macro-F1 when ``dev`` is given, else training loss;
    training stops after ``patience`` epochs without improvement and keeps the best epoch.
    """
    hyper = hyper or Hyper()
    spec = spec or ModelSpec(arch=Arch.LR, hyper=hyper)
    X = _as_matrix(X)
    y = np.asarray(y, dtype=np.int64)
    if X.shape[0] == 0 or X.shape[0] != len(y):
        raise TrainingError(f"{X.shape[0]} feature rows for {len(y)} labels")
    dev_X = dev_y = None
    if dev is not None:
        dev_X, dev_y = _as_matrix(dev[0]), np.asarray(dev[1], dtype=np.int64)
        if dev_X.shape[0] and dev_X.shape[1] != X.shape[1]:
            raise TrainingError(f"dev width {dev_X.shape[1]} != train width {X.shape[1]}")
        if dev_X.shape[0] == 0:
            dev_X = dev_y = None

    clf = SGDClassifier(
        loss="log_loss",
        penalty="l2",
        alpha=hyper.l2,
        learning_rate="optimal",
        random_state=hyper.seed,
        shuffle=False,
    )
    rng = np.random.default_rng(hyper.seed)
    history: List[EpochRecord] = []
    best: Optional[Tuple[float, LogisticParams]] = None
    stale = 0
    for epoch in range(1, hyper.lr_max_epochs + 1):
        order = rng.permutation(len(y))
        for start in range(0, len(y), hyper.batch):
            idx = order[start : start + hyper.batch]
            clf.partial_fit(X[idx], y[idx], classes=np.array([0, 1]))
        params = LogisticParams(clf.coef_[0].copy(), float(clf.intercept_[0]))
        loss = _mean_bce(_logistic_proba(params, X), y)
        if not np.isfinite(loss):
            raise NumericError(f"non-finite training loss {loss}", epoch)
        dev_f1 = _macro_f1(_logistic_proba(params, dev_X), dev_y) if dev_X is not None else None
        history.append(EpochRecord(epoch, loss, dev_f1))
        score = dev_f1 if dev_f1 is not None else -loss
        if best is None or score > best[0] + 1e-9:
            best, stale = (score, params), 0
        else:
            stale += 1
            if stale >= hyper.patience:
                LOGGER.info("LR early stop after epoch %d", epoch)
                break
    LOGGER.info("Trained LR for %d epochs (final loss %.4f)", len(history), history[-1].train_loss)
    return TrainedModel(spec=spec, params=best[1], history=history, featurizer=featurizer)


# --- recurrent models -------------------------------------------------------------------


def _predict_sequences(params: ClassifierParams, sequences: Sequence[SequenceTensor]) -> np.ndarray:
    probs = []
    for start in range(0, len(sequences), PREDICT_CHUNK):
        X, M = pad_batch(sequences[start : start + PREDICT_CHUNK])
        probs.append(predict_batch(params, X, M))
    return np.concatenate(probs) if probs else np.zeros(0)


def train_recurrent(
    spec: ModelSpec,
    train: EncodedData,
    dev: Optional[EncodedData] = None,
    featurizer: Optional[Featurizer] = None,
) -> TrainedModel:
    """Adam over seeded shuffled mini-batches; keeps the best dev macro-F1 epoch.

    Without dev data the last epoch's parameters are returned. Ties in dev macro-F1
    keep the earlier epoch.
    """
    if not spec.arch.is_recurrent:
        raise ConfigError("train_recurrent needs a recurrent architecture")
    if not train.sequences:
        raise TrainingError("no training sequences")
    dims = {s.dim for s in train.sequences}
    if len(dims) != 1:
        raise TrainingError(f"training sequences have mixed widths {sorted(dims)}")
    hyper = spec.hyper
    params = init_params(
        spec.arch.cell,
        dims.pop(),
        hyper.hidden,
        hyper.layers,
        spec.arch.bidirectional,
        hyper.dropout,
        hyper.layer_dropout,
        seed=hyper.seed,
    )
    state = AdamState.zeros(params, lr=hyper.lr)
    rng = np.random.default_rng([hyper.seed, 1])
    history: List[EpochRecord] = []
    best_params, best_f1 = params, None
    has_dev = dev is not None and dev.sequences

    for epoch in range(1, hyper.epochs + 1):
        order = rng.permutation(len(train))
        total = 0.0
        for start in range(0, len(order), hyper.batch):
            idx = order[start : start + hyper.batch]
            X, M = pad_batch([train.sequences[i] for i in idx])
            try:
                loss, grads = loss_and_grads(params, X, M, train.y[idx], rng=rng)
            except NumericError as exc:
                raise NumericError(str(exc), epoch) from exc
            params, state = adam_step(params, grads, state)
            total += loss * len(idx)
        if not params.is_finite():
            raise NumericError("non-finite parameters after update", epoch)
        dev_f1 = _macro_f1(_predict_sequences(params, dev.sequences), dev.y) if has_dev else None
        history.append(EpochRecord(epoch, total / len(train), dev_f1))
        LOGGER.info(
            "%s epoch %d: loss %.5f%s",
            spec.name,
            epoch,
            total / len(train),
            "" if dev_f1 is None else f" dev macro-F1 {dev_f1:.4f}",
        )
        if not has_dev:
            best_params = params
        elif best_f1 is None or dev_f1 > best_f1:
            best_params, best_f1 = params, dev_f1
    return TrainedModel(spec=spec, params=best_params, history=history, featurizer=featurizer)


# --- prediction -------------------------------------------------------------------------


def predict(
    model: TrainedModel, inputs: Union[LogisticInput, Sequence[SequenceTensor]]
) -> List[Tuple[float, Label]]:
    """(probability, label) per input in order; OFF iff probability >= 0.5."""
    if isinstance(model.params, ClassifierParams):
        sequences = list(inputs) if not sparse.issparse(inputs) else None
        if sequences is None or any(not isinstance(s, SequenceTensor) for s in sequences):
            raise PredictionError("recurrent models take SequenceTensor inputs")
        if not sequences:
            return []
        if any(s.dim != model.params.input_dim for s in sequences):
            raise PredictionError(
                f"sequence width does not match model input width {model.params.input_dim}"
            )
        probs = _predict_sequences(model.params, sequences)
    else:
        if not sparse.issparse(inputs) and len(inputs) == 0:
            return []
        if not sparse.issparse(inputs) and isinstance(inputs[0], SequenceTensor):
            raise PredictionError("the logistic baseline takes document vectors")
        try:
            X = _as_matrix(inputs)
        except TrainingError as exc:
            raise PredictionError(str(exc)) from exc
        if X.shape[1] != len(model.params.weight):
            raise PredictionError(
                f"feature width {X.shape[1]} does not match model width {len(model.params.weight)}"
            )
        probs = _logistic_proba(model.params, X)
    return [(float(p), label) for p, label in zip(probs, _labels(probs))]


def predict_texts(model: TrainedModel, texts: Sequence[str]) -> List[Tuple[float, Label]]:
    """Featurize preprocessed texts with the model's own artifacts, then predict."""
    if model.featurizer is None:
        raise PredictionError(f"{model.name} has no feature artifacts attached")
    texts = list(texts)
    if not texts:
        return []
    if model.spec.arch.is_recurrent:
        return predict(model, model.featurizer.sequences(texts))
    return predict(model, model.featurizer.vectors(texts))


def fit_model(
    spec: ModelSpec,
    train: Corpus,
    dev: Optional[Corpus] = None,
    embeddings: Optional[EmbeddingTable] = None,
    embeddings_path: Optional[Path] = None,
) -> TrainedModel:
    """Fit features on ``train`` only, then train the classifier ``spec.arch`` names."""
    if spec.feature is FeatureKind.ARAVEC and embeddings is None:
        if embeddings_path is None:
            raise ConfigError("aravec features need an embedding file")
        embeddings = load_embeddings(embeddings_path)
    featurizer = Featurizer.fit(
        spec.feature,
        train.texts,
        embeddings=embeddings,
        bridge=spec.hyper.bridge,
        buckets=spec.hyper.buckets,
        max_len=spec.hyper.max_len,
    )
    recurrent = spec.arch.is_recurrent
    train_data = encode(featurizer, train, recurrent)
    dev_data = encode(featurizer, dev, recurrent) if dev is not None and len(dev) else None
    if recurrent:
        model = train_recurrent(spec, train_data, dev_data, featurizer)
    else:
        model = train_logistic(
            train_data.matrix,
            train_data.y,
            spec.hyper,
            dev=None if dev_data is None else (dev_data.matrix, dev_data.y),
            featurizer=featurizer,
            spec=spec,
        )
    model.embeddings_path = None if embeddings_path is None else str(embeddings_path)
    return model


# --- grid search ------------------------------------------------------------------------


def _grid_point(spec: ModelSpec, train: EncodedData, dev: EncodedData) -> GridRow:
    hyper = spec.hyper
    try:
        model = train_recurrent(spec, train, dev)
        preds = [label for _, label in predict(model, dev.sequences)]
        metrics = score_labels(preds, [Label.from_target(int(v)) for v in dev.y])
    except SalamNetError as exc:
        LOGGER.warning(
            "grid point dropout=%s layers=%s hidden=%s failed: %s",
            hyper.dropout,
            hyper.layers,
            hyper.hidden,
            exc,
        )
        return GridRow(hyper.dropout, hyper.layers, hyper.hidden, error=str(exc))
    return GridRow(hyper.dropout, hyper.layers, hyper.hidden, metrics.accuracy, metrics.macro_f1)


def select_best(rows: Sequence[GridRow]) -> GridRow:
    """Highest dev accuracy; ties go to lower dropout, then fewer layers, then smaller hidden."""
    ok = [r for r in rows if r.error is None and r.accuracy is not None]
    if not ok:
        raise TrainingError("every grid point failed")
    return min(ok, key=lambda r: (-r.accuracy, r.dropout, r.layers, r.hidden))


def grid_search(
    arch: Arch,
    grid: GridSpec,
    train: EncodedData,
    dev: EncodedData,
    base: Optional[ModelSpec] = None,
    jobs: int = 1,
) -> Tuple[ModelSpec, List[GridRow]]:
    """Train one model per grid point and select by dev accuracy."""
    if not arch.is_recurrent:
        raise ConfigError("grid search covers the recurrent architectures only")
    points = grid.points()
    if not points:
        raise ConfigError("empty grid")
    if not dev.sequences:
        raise ConfigError("grid search needs dev data")
    base = base or ModelSpec(arch=arch)
    specs = [
        ModelSpec(arch=arch, feature=base.feature, hyper={
            **base.hyper.model_dump(), "dropout": d, "layers": layers, "hidden": hidden
        })
        for d, layers, hidden in points
    ]
    rows = Parallel(n_jobs=jobs)(delayed(_grid_point)(s, train, dev) for s in specs)
    best = select_best(rows)
    LOGGER.info(
        "%s grid best: dropout=%s layers=%s hidden=%s accuracy=%.4f",
        arch.value,
        best.dropout,
        best.layers,
        best.hidden,
        best.accuracy,
    )
    return base.with_hyper(dropout=best.dropout, layers=best.layers, hidden=best.hidden), list(rows)


def write_grid_tsv(rows: Sequence[GridRow], path: Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="\n") as f:
        f.write("dropout\tlayers\thidden\taccuracy\n")
        for r in rows:
            acc = "error" if r.accuracy is None else f"{r.accuracy:.6f}"
            f.write(f"{r.dropout}\t{r.layers}\t{r.hidden}\t{acc}\n")


# --- persistence ------------------------------------------------------------------------


def save_model(model: TrainedModel, directory: Path) -> Path:
    """Write ``model.ckpt`` (and ``tfidf.tsv`` for TF-IDF features) under ``directory``."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    header = {
        "format": CHECKPOINT_FORMAT,
        "arch": model.spec.arch.value,
        "feature": model.spec.feature.value,
        "seed": str(model.spec.hyper.seed),
        "spec": model.spec.model_dump_json(),
        "history": json.dumps([asdict(r) for r in model.history]),
        "embeddings": model.embeddings_path or "",
    }
    if isinstance(model.params, ClassifierParams):
        p = model.params
        header.update(
            input_dim=str(p.input_dim),
            hidden=str(p.hidden_dim),
            layers=str(p.layers),
            bidirectional=str(p.bidirectional).lower(),
            dropout=repr(p.dropout),
            layer_dropout=repr(p.layer_dropout),
        )
        tensors = p.tensors
    else:
        header["input_dim"] = str(len(model.params.weight))
        tensors = {"lr.w": model.params.weight, "lr.b": np.array([model.params.bias])}
    path = directory / CHECKPOINT_FILE
    write_container(path, header, tensors)
    if model.featurizer is not None and model.featurizer.tfidf is not None:
        model.featurizer.tfidf.save(directory / TFIDF_FILE)
    LOGGER.info("Saved %s to %s", model.name, directory)
    return path


def _header_int(header: Dict[str, str], key: str) -> int:
    try:
        return int(header[key])
    except (KeyError, ValueError):
        raise FormatError(f"checkpoint header lacks a valid {key!r}") from None


def load_model(directory: Path, embeddings: Optional[EmbeddingTable] = None) -> TrainedModel:
    directory = Path(directory)
    header, tensors = read_container(directory / CHECKPOINT_FILE)
    if header.get("format") != CHECKPOINT_FORMAT:
        raise FormatError(f"unsupported checkpoint format {header.get('format')!r}")
    try:
        spec = ModelSpec.model_validate(json.loads(header["spec"]))
        history = [EpochRecord(**r) for r in json.loads(header.get("history", "[]"))]
    except (KeyError, ValueError) as exc:
        raise FormatError(f"bad checkpoint header: {exc}") from None
    input_dim = _header_int(header, "input_dim")

    if spec.arch.is_recurrent:
        bidirectional = header.get("bidirectional") == "true"
        hidden, layers = _header_int(header, "hidden"), _header_int(header, "layers")
        shapes = parameter_shapes(spec.arch.cell, input_dim, hidden, layers, bidirectional)
        if set(shapes) != set(tensors):
            raise FormatError("checkpoint tensors do not match the architecture header")
        try:
            params: Union[ClassifierParams, LogisticParams] = ClassifierParams(
                spec.arch.cell,
                input_dim,
                hidden,
                layers,
                bidirectional,
                {name: tensors[name].reshape(shape) for name, shape in shapes.items()},
                float(header.get("dropout", spec.hyper.dropout)),
                float(header.get("layer_dropout", spec.hyper.layer_dropout)),
            )
        except ValueError as exc:
            raise FormatError(f"tensor shape mismatch: {exc}") from None
    else:
        try:
            params = LogisticParams(
                tensors["lr.w"].reshape(input_dim), float(tensors["lr.b"].reshape(1)[0])
            )
        except (KeyError, ValueError) as exc:
            raise FormatError(f"bad logistic tensors: {exc}") from None

    embeddings_path = header.get("embeddings") or None
    if spec.feature is FeatureKind.TFIDF:
        featurizer = Featurizer(
            FeatureKind.TFIDF,
            tfidf=TfidfModel.load(directory / TFIDF_FILE),
            bridge=spec.hyper.bridge,
            buckets=spec.hyper.buckets,
            max_len=spec.hyper.max_len,
        )
    else:
        if embeddings is None:
            if embeddings_path is None:
                raise ConfigError("model uses aravec features but no embedding file is known")
            embeddings = load_embeddings(Path(embeddings_path))
        featurizer = Featurizer(
            FeatureKind.ARAVEC, embeddings=embeddings, max_len=spec.hyper.max_len
        )
    expected = featurizer.sequence_dim() if spec.arch.is_recurrent else featurizer.vector_dim()
    if expected != input_dim:
        raise DimensionError(f"features give width {expected}, checkpoint expects {input_dim}")
    return TrainedModel(spec, params, history, featurizer, embeddings_path)
