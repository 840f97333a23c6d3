"""Shared fixtures: small lexicons, tiny corpora and a synthetic corpus."""
from pathlib import Path

import pytest

from scripts.corpus import Corpus, Label, Tweet
from scripts.preprocess import Pipeline, PipelineConfig
from scripts.synthetic import generate_synthetic

FIXTURES = Path(__file__).resolve().parent / "fixtures"
LEXICONS = FIXTURES / "lexicons"


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture
def fixture_pipeline_config() -> PipelineConfig:
    return PipelineConfig(
        emoji_path=LEXICONS / "emoji.tsv",
        dialect_path=LEXICONS / "dialect.tsv",
        hypernym_path=LEXICONS / "hypernym.tsv",
        stopwords_path=LEXICONS / "stopwords.txt",
    )


@pytest.fixture
def fixture_pipeline(fixture_pipeline_config) -> Pipeline:
    return Pipeline(fixture_pipeline_config)


def make_corpus(labels, texts=None, prefix="t") -> Corpus:
    texts = texts or [f"نص رقم {i}" for i in range(len(labels))]
    return Corpus(
        tuple(
            Tweet(f"{prefix}{i}", text, Label(lab))
            for i, (text, lab) in enumerate(zip(texts, labels))
        )
    )


@pytest.fixture
def small_corpus() -> Corpus:
    return make_corpus(["OFF", "NOT", "NOT", "OFF", "NOT", "NOT", "NOT", "NOT", "OFF", "NOT"])


@pytest.fixture(scope="session")
def synthetic_corpus() -> Corpus:
    return generate_synthetic(200, seed=7, offensive_ratio=0.3)


@pytest.fixture
def marker_corpus() -> Corpus:
    """Separable toy task: OFF iff the tweet contains the marker word."""
    texts, labels = [], []
    fillers = ["شمس", "بحر", "قلم", "بيت", "نهر", "جبل"]
    for i in range(40):
        words = [fillers[(i + j) % len(fillers)] for j in range(3)]
        if i % 2 == 0:
            words.insert(i % 3, "غبي")
            labels.append("OFF")
        else:
            labels.append("NOT")
        texts.append(" ".join(words))
    return make_corpus(labels, texts, prefix="m")


@pytest.fixture
def corpus_factory():
    return make_corpus
