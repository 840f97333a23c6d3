"""Arabic tweet normalization: the six text-level preprocessing steps.

Steps run in a fixed order:

1. EMOJI    emoji/emoticons -> textual labels, unmapped emoji dropped
2. LETTERS  Alif/Alif Maqsura/Ta Marbuta variants collapsed, 3+ letter repeats cut to 2
3. DIALECT  dialect nouns -> MSA forms (lexicon)
4. HYPERNYM hyponyms (e.g. animal names) -> hypernym (lexicon)
5. HASHTAG  '#' removed, '_' -> space
6. CLEAN    HTML tags, digits, diacritics, symbols and stopwords removed, spaces collapsed

Minority upsampling, the seventh normalization step, lives in ``scripts.corpus``
and is off by default.

Lexicon files are UTF-8 ``key<TAB>value`` lines (``#`` comments allowed); the stopword
file has one token per line.
"""
import logging
import re
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from pathlib import Path
from typing import Callable, Dict, List, Mapping, Optional, Tuple

from pydantic import BaseModel, ConfigDict, field_validator

from scripts.corpus import Corpus
from scripts.errors import ConfigError, FormatError

LOGGER = logging.getLogger(__name__)

LEXICON_DIR = Path(__file__).resolve().parents[1] / "lexicons"

ARABIC_LETTERS = "\u0621-\u063a\u0641-\u064a"
# Diacritics (tashkeel), superscript Alif and tatweel.
MARKS = "\u064b-\u0652\u0670\u0640"

EMOJI_PATTERN = re.compile(
    "["
    "\U0001F1E0-\U0001F1FF"  # flags
    "\U0001F300-\U0001F5FF"  # symbols & pictographs
    "\U0001F600-\U0001F64F"  # emoticons
    "\U0001F680-\U0001F6FF"  # transport & map
    "\U0001F700-\U0001FAFF"  # extended pictographs
    "\u2600-\u27bf"  # misc symbols, dingbats
    "\u2b00-\u2bff"
    "\ufe0f\u200d"  # variation selector, zero-width joiner
    "]+"
)
ALIF_PATTERN = re.compile("[\u0623\u0625\u0622\u0671]")
# A letter repeated 3+ times; marks and '#' between the repeats do not break the run.
REPEAT_PATTERN = re.compile(rf"([{ARABIC_LETTERS}A-Za-z])(?:[{MARKS}#]*\1){{2,}}")
# Letter runs for lexicon lookup; marks and '#' inside a run do not split it.
WORD_PATTERN = re.compile(rf"[{ARABIC_LETTERS}A-Za-z{MARKS}#]+")
MARKS_PATTERN = re.compile(f"[{MARKS}]")
HTML_TAG_PATTERN = re.compile(r"<[^>]*>")
DIGITS_PATTERN = re.compile("[0-9٠-٩۰-۹]")
NON_LETTER_PATTERN = re.compile(f"[^{ARABIC_LETTERS}A-Za-z ]")


class LexiconKind(str, Enum):
    EMOJI = "EMOJI"
    DIALECT = "DIALECT"
    HYPERNYM = "HYPERNYM"
    STOPWORD = "STOPWORD"


class Step(str, Enum):
    EMOJI = "EMOJI"
    LETTERS = "LETTERS"
    DIALECT = "DIALECT"
    HYPERNYM = "HYPERNYM"
    HASHTAG = "HASHTAG"
    CLEAN = "CLEAN"


PIPELINE_ORDER: Tuple[Step, ...] = tuple(Step)


@dataclass(frozen=True)
class LexiconMap:
    """Surface form -> replacement table of one kind.

    STOPWORD maps carry an empty replacement for every entry.
    """

    kind: LexiconKind
    entries: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "entries", dict(self.entries))
        if self.kind is LexiconKind.STOPWORD:
            return
        for key, value in self.entries.items():
            if key == value:
                raise ConfigError(f"{self.kind.value} lexicon maps {key!r} to itself")
        if self.kind in (LexiconKind.DIALECT, LexiconKind.HYPERNYM):
            for key, value in self.entries.items():
                chained = [tok for tok in _words(value) if tok in self.entries]
                if chained:
                    raise ConfigError(
                        f"{self.kind.value} lexicon value {value!r} (for {key!r}) "
                        f"contains key {chained[0]!r}; replacements must be fixed points"
                    )

    def __contains__(self, key: object) -> bool:
        return key in self.entries

    def __len__(self) -> int:
        return len(self.entries)

    def get(self, key: str) -> Optional[str]:
        return self.entries.get(key)

    @classmethod
    def load(cls, path: Path, kind: LexiconKind) -> "LexiconMap":
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"{kind.value} lexicon not found: {path}")
        entries: Dict[str, str] = {}
        with path.open("r", encoding="utf-8") as f:
            for line_no, raw in enumerate(f, 1):
                line = raw.rstrip("\n").rstrip("\r")
                if not line.strip() or line.lstrip().startswith("#"):
                    continue
                if kind is LexiconKind.STOPWORD:
                    entries[line.strip()] = ""
                    continue
                parts = line.split("\t")
                if len(parts) < 2 or not parts[0].strip() or not parts[1].strip():
                    raise FormatError(f"{path}: expected 'key<TAB>value'", line_no)
                entries[parts[0].strip()] = parts[1].strip()
        LOGGER.debug("Loaded %d %s entries from %s", len(entries), kind.value, path)
        return cls(kind, entries)

    def normalized(self) -> "LexiconMap":
        """Copy with keys and values in letter-normalized form (emoji keys kept)."""
        if self.kind is LexiconKind.EMOJI:
            return LexiconMap(self.kind, {k: normalize_letters(v) for k, v in self.entries.items()})
        if self.kind is LexiconKind.STOPWORD:
            return LexiconMap(self.kind, {normalize_letters(k): "" for k in self.entries})
        return LexiconMap(
            self.kind,
            {
                _lookup_key(normalize_letters(k)): normalize_letters(v)
                for k, v in self.entries.items()
            },
        )


def _words(text: str) -> List[str]:
    return [_lookup_key(w) for w in WORD_PATTERN.findall(text)]


def _lookup_key(word: str) -> str:
    return MARKS_PATTERN.sub("", word).replace("#", "")


def _replace_words(text: str, lexicon: LexiconMap) -> str:
    def sub(match: re.Match) -> str:
        replacement = lexicon.get(_lookup_key(match.group(0)))
        return match.group(0) if replacement is None else replacement

    return WORD_PATTERN.sub(sub, text)


@lru_cache(maxsize=8)
def _emoji_pattern(keys: Tuple[str, ...]) -> "re.Pattern[str]":
    return re.compile("|".join(re.escape(k) for k in keys))


def convert_emoji(text: str, emoji_map: LexiconMap) -> str:
    """Replace mapped emoji/emoticons by their label; unmapped emoji become a space."""
    if emoji_map.entries:
        pattern = _emoji_pattern(tuple(sorted(emoji_map.entries, key=len, reverse=True)))
        pieces: List[str] = []
        last = 0
        # last character written so far, "" at the start
        before = ""
        for match in pattern.finditer(text):
            gap = text[last : match.start()]
            pieces.append(gap)
            if gap:
                before = gap[-1]
            label = emoji_map.entries[match.group(0)]
            if before and not before.isspace():
                label = " " + label
            end = match.end()
            if end < len(text) and not text[end].isspace():
                label = label + " "
            pieces.append(label)
            if label:
                before = label[-1]
            last = match.end()
        pieces.append(text[last:])
        text = "".join(pieces)
    return EMOJI_PATTERN.sub(" ", text)


def normalize_letters(text: str) -> str:
    text = ALIF_PATTERN.sub("ا", text)
    text = text.replace("ى", "ي").replace("ة", "ه")
    return REPEAT_PATTERN.sub(r"\1\1", text)


def normalize_dialect(text: str, dialect_map: LexiconMap) -> str:
    return _replace_words(text, dialect_map)


def map_hyponyms(text: str, hypernym_map: LexiconMap) -> str:
    return _replace_words(text, hypernym_map)


def segment_hashtags(text: str) -> str:
    return text.replace("#", "").replace("_", " ")


def clean_misc(text: str, stopwords: LexiconMap) -> str:
    """Remove tags, diacritics, digits, symbols and stopwords; collapse whitespace.

    Symbols are stripped before stopword tokens are dropped.
    """
    text = HTML_TAG_PATTERN.sub(" ", text)
    text = MARKS_PATTERN.sub("", text)
    text = DIGITS_PATTERN.sub(" ", text)
    text = NON_LETTER_PATTERN.sub(" ", text)
    tokens = [tok for tok in text.split() if tok not in stopwords]
    return " ".join(tokens)


class PipelineConfig(BaseModel):
    """Enabled steps and lexicon locations. Paths default to the shipped lexicons."""

    model_config = ConfigDict(frozen=True)

    enabled_steps: Tuple[Step, ...] = PIPELINE_ORDER
    emoji_path: Path = LEXICON_DIR / "emoji.tsv"
    dialect_path: Path = LEXICON_DIR / "dialect.tsv"
    hypernym_path: Path = LEXICON_DIR / "hypernym.tsv"
    stopwords_path: Path = LEXICON_DIR / "stopwords.txt"

    @field_validator("enabled_steps")
    @classmethod
    def _check_steps(cls, steps: Tuple[Step, ...]) -> Tuple[Step, ...]:
        if len(set(steps)) != len(steps):
            raise ValueError("each preprocessing step may appear only once")
        positions = [PIPELINE_ORDER.index(s) for s in steps]
        if positions != sorted(positions):
            raise ValueError(
                "preprocessing steps must follow the order "
                + " -> ".join(s.value for s in PIPELINE_ORDER)
            )
        return steps


class Pipeline:
    """Preprocessing pipeline with its lexicons loaded and validated up front."""

    def __init__(self, config: Optional[PipelineConfig] = None):
        self.config = config or PipelineConfig()
        steps = set(self.config.enabled_steps)
        empty = {kind: LexiconMap(kind) for kind in LexiconKind}
        self.emoji = self._load(Step.EMOJI, self.config.emoji_path, LexiconKind.EMOJI, steps, empty)
        self.dialect = self._load(
            Step.DIALECT, self.config.dialect_path, LexiconKind.DIALECT, steps, empty
        )
        self.hypernym = self._load(
            Step.HYPERNYM, self.config.hypernym_path, LexiconKind.HYPERNYM, steps, empty
        )
        self.stopwords = self._load(
            Step.CLEAN, self.config.stopwords_path, LexiconKind.STOPWORD, steps, empty
        )
        for key, value in self.hypernym.entries.items():
            chained = [tok for tok in _words(value) if tok in self.dialect]
            if chained:
                raise ConfigError(
                    f"hypernym {value!r} (for {key!r}) is itself a dialect key {chained[0]!r}"
                )

        available: Dict[Step, Callable[[str], str]] = {
            Step.EMOJI: lambda t: convert_emoji(t, self.emoji),
            Step.LETTERS: normalize_letters,
            Step.DIALECT: lambda t: normalize_dialect(t, self.dialect),
            Step.HYPERNYM: lambda t: map_hyponyms(t, self.hypernym),
            Step.HASHTAG: segment_hashtags,
            Step.CLEAN: lambda t: clean_misc(t, self.stopwords),
        }
        self._steps = [available[s] for s in self.config.enabled_steps]

    @staticmethod
    def _load(step, path, kind, steps, empty) -> LexiconMap:
        if step not in steps:
            return empty[kind]
        return LexiconMap.load(path, kind).normalized()

    def __call__(self, text: str) -> str:
        for step in self._steps:
            text = step(text)
        return text

    def preprocess_corpus(self, corpus: Corpus) -> Corpus:
        return corpus.with_texts([self(t) for t in corpus.texts])


def run_pipeline(text: str, config: "PipelineConfig | Pipeline") -> str:
    """Apply the enabled steps in pipeline order.

    Passing a ``PipelineConfig`` builds (and validates) the lexicons on every call;
    build a ``Pipeline`` once when processing many tweets.
    """
    pipeline = config if isinstance(config, Pipeline) else Pipeline(config)
    return pipeline(text)
