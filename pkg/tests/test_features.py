#!/usr/bin/env python3
"""Tests for TF-IDF, embeddings and sequence encoders."""
import math
from collections import Counter

import numpy as np
import pytest

from scripts.errors import ConfigError, FitError, FormatError
from scripts.features import (
    FeatureKind,
    Featurizer,
    SequenceBridge,
    TfidfModel,
    char_ngrams,
    encode_sequence,
    fit_char_tfidf,
    fnv1a_64,
    hash_ngram_sequence,
    load_embeddings,
    mean_pool,
    transform_tfidf,
    transform_tfidf_matrix,
)


def brute_ngrams(text):
    return [text[i : i + n] for n in range(2, 6) for i in range(len(text) - n + 1)]


def brute_tfidf(corpus, text):
    """Hand-written count tables and the smoothed idf formula."""
    vocab = sorted({g for doc in corpus for g in brute_ngrams(doc)})
    df = {g: sum(1 for doc in corpus if g in set(brute_ngrams(doc))) for g in vocab}
    idf = {g: math.log((1 + len(corpus)) / (1 + df[g])) + 1 for g in vocab}
    counts = Counter(g for g in brute_ngrams(text) if g in idf)
    raw = {g: c * idf[g] for g, c in counts.items()}
    norm = math.sqrt(sum(v * v for v in raw.values()))
    return vocab, idf, {g: v / norm for g, v in raw.items()} if norm else {}


ORACLE_CORPORA = [
    (["ab", "abc"], ["ab", "abc", "zz", "abab"]),
    (["كلب وسخ", "كلام حلو", "كلب"], ["كلب", "وسخ كلام", "حلو حلو"]),
    (["aaaa", "aab", "ba", "abba", "b a"], ["aaaaaa", "ab ba", "a"]),
    (["a  b", "ab", " ab "], ["a   b", "ab  ", "b"]),
]


@pytest.fixture
def tiny_table(fixtures_dir):
    return load_embeddings(fixtures_dir / "tiny.w2v")


class TestFitCharTfidf:
    """Tests for fit_char_tfidf."""

    def test_worked_example(self):
        model = fit_char_tfidf(["ab", "abc"])
        assert set(model.vocab) == {"ab", "bc", "abc"}
        assert model.weight("ab") == pytest.approx(1.0, abs=1e-12)
        assert model.weight("bc") == pytest.approx(math.log(1.5) + 1, abs=1e-12)
        assert model.weight("abc") == pytest.approx(1.405465, abs=1e-6)

    def test_single_document(self):
        model = fit_char_tfidf(["مرحبا بكم"])
        assert np.allclose(model.idf, 1.0)

    def test_columns_lexicographic(self):
        model = fit_char_tfidf(["ba", "ab"])
        assert [g for g, _ in sorted(model.vocab.items(), key=lambda kv: kv[1])] == ["ab", "ba"]

    def test_duplicate_documents(self):
        model = fit_char_tfidf(["abc", "abc"])
        assert model.n_docs == 2
        assert np.allclose(model.idf, 1.0)

    def test_empty_corpus(self):
        with pytest.raises(FitError):
            fit_char_tfidf([])

    def test_idf_decreases_with_df(self):
        model = fit_char_tfidf(["ab", "ab", "ab cd", "cd ef"])
        assert model.weight("ab") < model.weight("cd") < model.weight("ef")

    def test_spaces_are_characters(self):
        assert "b c" in char_ngrams("ab cd")

    def test_whitespace_runs_kept(self):
        assert char_ngrams("a  b") == brute_ngrams("a  b")
        assert "a  b" in char_ngrams("a  b")
        model = fit_char_tfidf(["a  b", "a b"])
        assert {"a ", " b", "  ", "a  ", "  b", "a  b"} <= set(model.vocab)


class TestTransformTfidf:
    """Tests for transform_tfidf against an independent oracle."""

    @pytest.mark.parametrize("corpus,queries", ORACLE_CORPORA)
    def test_matches_brute_force(self, corpus, queries):
        model = fit_char_tfidf(corpus)
        vocab, idf, _ = brute_tfidf(corpus, "")
        assert sorted(model.vocab) == vocab
        for gram in vocab:
            assert abs(model.weight(gram) - idf[gram]) <= 1e-12
        for query in queries:
            dense = transform_tfidf(model, query).to_dense()
            _, _, want = brute_tfidf(corpus, query)
            expected = np.zeros(model.dim)
            for gram, value in want.items():
                expected[model.column(gram)] = value
            assert np.max(np.abs(dense - expected)) <= 1e-12, query

    def test_single_ngram_is_unit(self):
        model = fit_char_tfidf(["ab", "abc"])
        vec = transform_tfidf(model, "ab")
        assert vec.indices == [model.column("ab")]
        assert vec.values == pytest.approx([1.0])

    @pytest.mark.parametrize("text", ["", "zz"])
    def test_zero_vector(self, text):
        vec = transform_tfidf(fit_char_tfidf(["ab", "abc"]), text)
        assert vec.entries == () and vec.dim == 3

    def test_unit_norm_and_sorted(self, synthetic_corpus):
        model = fit_char_tfidf(synthetic_corpus.texts[:50])
        for text in synthetic_corpus.texts[50:80]:
            vec = transform_tfidf(model, text)
            assert vec.indices == sorted(set(vec.indices))
            assert all(v != 0 for v in vec.values)
            if vec.entries:
                assert abs(vec.norm() - 1.0) <= 1e-9

    def test_depends_only_on_ngram_counts(self):
        model = fit_char_tfidf(["abab", "baba"])
        first = transform_tfidf(model, "abab")
        assert transform_tfidf(model, "abab") == first
        assert transform_tfidf(model, "ab ab") != first

    def test_matrix_rows_match_vectors(self):
        model = fit_char_tfidf(["ab", "abc", "bcd"])
        matrix = transform_tfidf_matrix(model, ["abc", "cd"])
        assert np.allclose(matrix.toarray()[1], transform_tfidf(model, "cd").to_dense())

    def test_save_load(self, tmp_path):
        model = fit_char_tfidf(["كلب\tتاب", "سطر\\ثاني"])
        model.save(tmp_path / "tfidf.tsv")
        loaded = TfidfModel.load(tmp_path / "tfidf.tsv")
        assert loaded.vocab == model.vocab and loaded.n_docs == 2
        assert np.array_equal(loaded.idf, model.idf)

    def test_load_bad_header(self, tmp_path):
        (tmp_path / "bad.tsv").write_text("ab\t0\t1.0\n", encoding="utf-8")
        with pytest.raises(FormatError):
            TfidfModel.load(tmp_path / "bad.tsv")


class TestEmbeddings:
    """Tests for load_embeddings, encode_sequence and mean_pool."""

    def test_load(self, tiny_table):
        assert len(tiny_table) == 2 and tiny_table.dim == 3
        assert list(tiny_table.lookup("a")) == [1.0, 0.0, 0.0]
        assert tiny_table.lookup("zzz") is None

    def test_short_row(self, tmp_path):
        path = tmp_path / "bad.w2v"
        path.write_text("2 3\na 1 0 0\nb 0 1\n", encoding="utf-8")
        with pytest.raises(FormatError) as err:
            load_embeddings(path)
        assert err.value.line == 3

    def test_invalid_utf8(self, tmp_path):
        path = tmp_path / "latin.w2v"
        path.write_bytes("2 1\na 1\n".encode("utf-8") + b"caf\xe9 2\n")
        with pytest.raises(FormatError) as err:
            load_embeddings(path)
        assert err.value.line == 3

    def test_duplicate_token(self, tmp_path):
        path = tmp_path / "dup.w2v"
        path.write_text("2 1\na 1\na 2\n", encoding="utf-8")
        with pytest.raises(FormatError):
            load_embeddings(path)

    def test_count_mismatch(self, tmp_path):
        path = tmp_path / "short.w2v"
        path.write_text("3 1\na 1\n", encoding="utf-8")
        with pytest.raises(FormatError):
            load_embeddings(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            load_embeddings(tmp_path / "nope.w2v")

    def test_encode(self, tiny_table):
        seq = encode_sequence("a b", tiny_table, max_len=5)
        assert seq.vectors.tolist() == [[1, 0, 0], [0, 1, 0]]
        assert seq.mask.tolist() == [True, True]

    def test_encode_empty(self, tiny_table):
        seq = encode_sequence("", tiny_table, max_len=5)
        assert seq.length == 1 and not seq.mask.any() and not seq.vectors.any()

    def test_encode_truncates_and_keeps_oov(self, tiny_table):
        seq = encode_sequence("x a y b a b", tiny_table, max_len=4)
        assert seq.length == 4 and seq.mask.all()
        assert seq.vectors.tolist() == [[0, 0, 0], [1, 0, 0], [0, 0, 0], [0, 1, 0]]

    def test_encode_rejects_zero_max_len(self, tiny_table):
        with pytest.raises(ConfigError):
            encode_sequence("a", tiny_table, max_len=0)

    @pytest.mark.parametrize(
        "text,expected", [("a b", [0.5, 0.5, 0]), ("a", [1, 0, 0]), ("x y", [0, 0, 0])]
    )
    def test_mean_pool(self, tiny_table, text, expected):
        assert mean_pool(tiny_table, text).tolist() == expected


class TestHashedSequences:
    """Tests for the FNV-1a hashed per-token bridge."""

    def test_fnv_reference_values(self):
        assert fnv1a_64("") == 0xCBF29CE484222325
        assert fnv1a_64("a") == 0xAF63DC4C8601EC8C

    def test_single_ngram_lands_in_its_bucket(self):
        model = fit_char_tfidf(["ab"])
        seq = hash_ngram_sequence("ab", model, buckets=16)
        bucket = fnv1a_64("ab") % 16
        assert seq.vectors[0, bucket] == pytest.approx(1.0)
        assert seq.vectors.sum() == pytest.approx(1.0)

    def test_oov_token_is_zero(self):
        seq = hash_ngram_sequence("ab zz", fit_char_tfidf(["ab"]), buckets=16)
        assert seq.length == 2 and not seq.vectors[1].any() and seq.mask.all()

    def test_mass_independent_of_buckets(self, synthetic_corpus):
        model = fit_char_tfidf(synthetic_corpus.texts)
        text = synthetic_corpus.texts[0]
        small = hash_ngram_sequence(text, model, buckets=16, normalize_tokens=False)
        large = hash_ngram_sequence(text, model, buckets=512, normalize_tokens=False)
        assert small.dim == 16 and large.dim == 512
        assert np.allclose(small.vectors.sum(axis=1), large.vectors.sum(axis=1))

    def test_rows_unit_norm(self, synthetic_corpus):
        model = fit_char_tfidf(synthetic_corpus.texts)
        seq = hash_ngram_sequence(synthetic_corpus.texts[3], model)
        norms = np.linalg.norm(seq.vectors, axis=1)
        assert norms.any() and np.allclose(norms[norms > 0], 1.0)

    def test_too_few_buckets(self):
        with pytest.raises(ConfigError):
            hash_ngram_sequence("ab", fit_char_tfidf(["ab"]), buckets=8)


class TestFeaturizer:
    """Tests for the Featurizer facade."""

    def test_tfidf_bridges(self, synthetic_corpus):
        texts = synthetic_corpus.texts
        hashed = Featurizer.fit(FeatureKind.TFIDF, texts, buckets=32)
        assert hashed.sequence_dim() == 32
        assert hashed.sequence(texts[0]).dim == 32
        document = Featurizer.fit(FeatureKind.TFIDF, texts, bridge=SequenceBridge.DOCUMENT)
        seq = document.sequence(texts[0])
        assert seq.length == 1 and seq.dim == document.tfidf.dim
        assert document.vectors(texts[:4]).shape == (4, document.vector_dim())

    def test_aravec(self, tiny_table):
        featurizer = Featurizer.fit(FeatureKind.ARAVEC, ["a b"], embeddings=tiny_table)
        assert featurizer.sequence_dim() == 3
        assert featurizer.vectors(["a b", "x"]).tolist() == [[0.5, 0.5, 0], [0, 0, 0]]

    def test_aravec_needs_table(self):
        with pytest.raises(ConfigError):
            Featurizer.fit(FeatureKind.ARAVEC, ["a"])
