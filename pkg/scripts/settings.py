"""Run configuration: defaults < environment/.env < config file < command-line flags.

Environment variables use the ``SALAMNET_`` prefix (``SALAMNET_DATA_DIR=/data/offenseval``).
Config files are INI-style ``key = value`` lines grouped in sections; sections only
organize the file and are flattened, so every key must be a RunConfig field::

    [paths]
    data = offenseval_ar.tsv
    embeddings = aravec_twitter_cbow_300.txt

    [model]
    arch = bigru
    features = tfidf

    [run]
    seed = 42
    jobs = 4
"""
import configparser
import hashlib
import logging
from pathlib import Path
from typing import Any, Dict, Iterable, List, Literal, Optional, Tuple

from pydantic import Field, ValidationError, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from scripts.errors import ConfigError
from scripts.features import DEFAULT_BUCKETS, DEFAULT_MAX_LEN, FeatureKind, SequenceBridge
from scripts.models import DEEP_ARCHS, Arch, ModelSpec
from scripts.preprocess import LEXICON_DIR, PIPELINE_ORDER, PipelineConfig, Step

LOGGER = logging.getLogger(__name__)

ArchChoice = Literal["lr", "rnn", "gru", "bigru", "lstm", "bilstm", "all"]
# fields that do not change results and stay out of the config hash
UNHASHED_FIELDS = {"run_name", "output_dir", "jobs", "verbose"}


class RunConfig(BaseSettings):
    model_config = SettingsConfigDict(
        env_prefix="SALAMNET_", env_file=".env", extra="forbid", frozen=True
    )

    # paths
    data_dir: Path = Path("data")
    data: Optional[Path] = None
    test_data: Optional[Path] = None
    embeddings: Optional[Path] = None
    model_dir: Optional[Path] = None
    output_dir: Path = Path("runs")
    run_name: Optional[str] = None
    emoji_lexicon: Path = LEXICON_DIR / "emoji.tsv"
    dialect_lexicon: Path = LEXICON_DIR / "dialect.tsv"
    hypernym_lexicon: Path = LEXICON_DIR / "hypernym.tsv"
    stopwords: Path = LEXICON_DIR / "stopwords.txt"

    # preprocessing and data
    steps: Tuple[Step, ...] = PIPELINE_ORDER
    preprocessed: bool = False
    split_fractions: Tuple[float, float, float] = (0.7, 0.1, 0.2)
    upsample: bool = False

    # model
    arch: ArchChoice = "bigru"
    features: FeatureKind = FeatureKind.TFIDF
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

    # run
    seed: int = 0
    k: int = Field(10, ge=2)
    jobs: int = 1
    verbose: bool = False

    @field_validator("split_fractions", mode="before")
    @classmethod
    def _split_csv(cls, value: Any) -> Any:
        return _csv(value)

    @field_validator("steps", mode="before")
    @classmethod
    def _upper_steps(cls, value: Any) -> Any:
        value = _csv(value)
        if isinstance(value, (list, tuple)):
            return tuple(v.upper() if isinstance(v, str) else v for v in value)
        return value

    def archs(self) -> List[Arch]:
        """Architectures the run covers; ``all`` expands to the five recurrent models."""
        return list(DEEP_ARCHS) if self.arch == "all" else [Arch(self.arch)]

    def model_spec(self, arch: Optional[Arch] = None) -> ModelSpec:
        arch = arch or Arch(self.arch)
        hyper = {
            "epochs": self.epochs,
            "dropout": self.dropout,
            "hidden": self.hidden,
            "layers": self.layers,
            "layer_dropout": self.layer_dropout,
            "lr": self.lr,
            "batch": self.batch,
            "max_len": self.max_len,
            "buckets": self.buckets,
            "bridge": self.bridge,
            "seed": self.seed,
        }
        return ModelSpec(arch=arch, feature=self.features, hyper=hyper)

    def pipeline_config(self) -> PipelineConfig:
        return PipelineConfig(
            enabled_steps=self.steps,
            emoji_path=self.emoji_lexicon,
            dialect_path=self.dialect_lexicon,
            hypernym_path=self.hypernym_lexicon,
            stopwords_path=self.stopwords,
        )

    def resolve(self, path: Optional[Path]) -> Optional[Path]:
        """``path`` as given if it exists, else relative to ``data_dir`` when that exists."""
        if path is None:
            return None
        path = Path(path)
        if path.exists() or path.is_absolute():
            return path
        candidate = self.data_dir / path
        return candidate if candidate.exists() else path

    def config_hash(self) -> str:
        payload = self.model_dump_json(exclude=UNHASHED_FIELDS)
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:10]


def _csv(value: Any) -> Any:
    if isinstance(value, str):
        return tuple(part.strip() for part in value.split(",") if part.strip())
    return value


def read_config_file(path: Path) -> Dict[str, str]:
    """Flattened ``key -> raw value`` mapping of an INI-style config file.

    Keys before the first section header are accepted as well.
    """
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    parser.optionxform = str  # type: ignore[assignment, method-assign]
    try:
        parser.read_string("[top]\n" + path.read_text(encoding="utf-8"), source=str(path))
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from None
    values: Dict[str, str] = {}
    for section in parser.sections():
        for key, value in parser.items(section, raw=True):
            if key in values:
                raise ConfigError(f"{path}: key {key!r} appears in more than one section")
            values[key] = value
    return values


def build_config(
    config_file: Optional[Path] = None, overrides: Optional[Dict[str, Any]] = None
) -> RunConfig:
    """RunConfig from env/.env, then the file, then explicit overrides (``None`` values skipped)."""
    values: Dict[str, Any] = read_config_file(config_file) if config_file else {}
    values.update({k: v for k, v in (overrides or {}).items() if v is not None})
    try:
        config = RunConfig(**values)
    except ValidationError as exc:
        problems = "; ".join(
            f"{'.'.join(str(p) for p in err['loc']) or 'config'}: {err['msg']}"
            for err in exc.errors()
        )
        raise ConfigError(f"invalid configuration: {problems}") from None
    except ValueError as exc:
        # environment values that fail to decode
        raise ConfigError(f"invalid configuration: {exc}") from None
    LOGGER.debug("Config %s: %s", config.config_hash(), config.model_dump_json())
    return config


def check_inputs(paths: Iterable[Optional[Path]]) -> None:
    """Fail before any work starts when a referenced input path is missing."""
    missing = [str(p) for p in paths if p is not None and not Path(p).exists()]
    if missing:
        raise ConfigError(f"input path(s) not found: {', '.join(missing)}")
