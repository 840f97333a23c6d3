"""Seeded synthetic corpus and embedding file for running the toolkit without the real dataset.

A tweet is offensive iff it contains at least one planted insult token. Every other token is
drawn from a neutral vocabulary, and some tweets get a neutral hashtag or a digit run as noise.
All words avoid stopwords, lexicon keys and letters that normalization would rewrite, so the
preprocessing pipeline leaves the planted signal intact.
"""
import logging
from pathlib import Path
from typing import List, Optional, Tuple

import numpy as np

from scripts.corpus import Corpus, Label, Tweet, save_tsv
from scripts.errors import ConfigError

LOGGER = logging.getLogger(__name__)

DEFAULT_OFFENSIVE_RATIO = 0.19
MIN_TWEETS = 20

OFFENSIVE_TOKENS: Tuple[str, ...] = ("حقير", "تافه", "غبي", "وسخ", "قذر", "منحط", "سافل", "خبيث")
NEUTRAL_TOKENS: Tuple[str, ...] = (
    "سماء", "بحر", "شمس", "كتاب", "قلم", "بيت", "طريق", "مدينه", "شجر", "ورد",
    "نهر", "جبل", "صباح", "مساء", "قهوه", "شاي", "مطر", "ضوء", "لون", "باب",
    "شارع", "سوق", "طعام", "خبز", "ملعب", "فريق", "مباراه", "سفر", "رحله", "صديق",
    "درس", "فكره", "كلام", "صوت", "نجم", "قمر", "ليل", "نهار", "حديقه", "سياره",
    "رساله", "صوره", "فيلم", "اغنيه", "يوم", "اسبوع", "شهر", "جميل", "كبير", "جديد",
)  # fmt: skip
VOCABULARY: Tuple[str, ...] = OFFENSIVE_TOKENS + NEUTRAL_TOKENS

MIN_TOKENS, MAX_TOKENS = 4, 12
NOISE_RATE = 0.2


def _tweet_tokens(rng: np.random.Generator, offensive: bool) -> List[str]:
    length = int(rng.integers(MIN_TOKENS, MAX_TOKENS + 1))
    tokens = [NEUTRAL_TOKENS[int(i)] for i in rng.integers(0, len(NEUTRAL_TOKENS), size=length)]
    if offensive:
        n_planted = int(rng.integers(1, 3))
        for pos in rng.choice(length, size=n_planted, replace=False):
            tokens[int(pos)] = OFFENSIVE_TOKENS[int(rng.integers(0, len(OFFENSIVE_TOKENS)))]
    if rng.random() < NOISE_RATE:
        a, b = rng.integers(0, len(NEUTRAL_TOKENS), size=2)
        tokens.append(f"#{NEUTRAL_TOKENS[int(a)]}_{NEUTRAL_TOKENS[int(b)]}")
    if rng.random() < NOISE_RATE:
        tokens.insert(int(rng.integers(0, len(tokens) + 1)), str(int(rng.integers(1, 2030))))
    return tokens


def generate_synthetic(
    n: int,
    seed: int = 0,
    offensive_ratio: float = DEFAULT_OFFENSIVE_RATIO,
    path: Optional[Path] = None,
) -> Corpus:
    """``n`` tweets with ``round(n * offensive_ratio)`` OFF, written to ``path`` when given."""
    if n < MIN_TWEETS:
        raise ConfigError(f"synthetic corpus needs at least {MIN_TWEETS} tweets, got {n}")
    if not 0.0 < offensive_ratio < 1.0:
        raise ConfigError(
            f"offensive ratio must be strictly between 0 and 1, got {offensive_ratio}"
        )
    n_off = int(round(n * offensive_ratio))
    if n_off == 0 or n_off == n:
        raise ConfigError(f"ratio {offensive_ratio} leaves one class empty for n={n}")

    rng = np.random.default_rng(seed)
    offensive = np.zeros(n, dtype=bool)
    offensive[rng.permutation(n)[:n_off]] = True
    tweets = tuple(
        Tweet(
            id=f"syn{i:05d}",
            text=" ".join(_tweet_tokens(rng, bool(off))),
            label=Label.OFF if off else Label.NOT,
        )
        for i, off in enumerate(offensive)
    )
    corpus = Corpus(tweets)
    LOGGER.info("Generated %d synthetic tweets (%d OFF, seed %d)", n, n_off, seed)
    if path is not None:
        save_tsv(corpus, path)
        LOGGER.info("Synthetic corpus written to %s", path)
    return corpus


def write_synthetic_embeddings(path: Path, dim: int = 50, seed: int = 0) -> Path:
    """word2vec text file over the generator vocabulary.

    Coordinate 0 is 1.0 for insult tokens and 0.0 for neutral ones; the other coordinates
    are seeded noise, so mean-pooled tweets stay linearly separable.
    """
    if dim < 2:
        raise ConfigError(f"embedding dim must be at least 2, got {dim}")
    rng = np.random.default_rng([seed, dim])
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="\n") as f:
        f.write(f"{len(VOCABULARY)} {dim}\n")
        for word in VOCABULARY:
            row = rng.normal(0.0, 0.1, size=dim)
            row[0] = 1.0 if word in OFFENSIVE_TOKENS else 0.0
            f.write(word + " " + " ".join(f"{v:.6f}" for v in row) + "\n")
    LOGGER.info("Synthetic embeddings (%d x %d) written to %s", len(VOCABULARY), dim, path)
    return path
