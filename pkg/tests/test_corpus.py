#!/usr/bin/env python3
"""Tests for corpus loading, splitting, folds and upsampling."""
import pytest

from scripts.corpus import (
    Corpus,
    Label,
    SplitTag,
    Tweet,
    load_tsv,
    make_folds,
    official_split,
    read_texts,
    save_tsv,
    split_by_fractions,
    upsample_minority,
)
from scripts.errors import (
    ConfigError,
    LabelError,
    ParseError,
    RebalanceError,
    SplitError,
    UniquenessError,
)


def write(path, text):
    path.write_text(text, encoding="utf-8")
    return path


class TestLoadTsv:
    """Tests for load_tsv."""

    def test_two_lines(self, tmp_path):
        path = write(tmp_path / "c.tsv", "1\tنص\tOFF\n2\tنص آخر\tNOT\n")
        corpus = load_tsv(path)
        assert len(corpus) == 2
        assert corpus.ids == ["1", "2"]
        assert corpus.class_counts() == {Label.OFF: 1, Label.NOT: 1}
        assert corpus["2"].text == "نص آخر"

    def test_header_only(self, tmp_path):
        corpus = load_tsv(write(tmp_path / "c.tsv", "id\ttext\tlabel\n"))
        assert len(corpus) == 0

    def test_bad_label_names_line(self, tmp_path):
        path = write(tmp_path / "c.tsv", "1\tنص\tOFF\n2\tنص\tNOT\n3\tنص\tBAD\n")
        with pytest.raises(LabelError) as err:
            load_tsv(path)
        assert err.value.line == 3

    def test_missing_field(self, tmp_path):
        with pytest.raises(ParseError) as err:
            load_tsv(write(tmp_path / "c.tsv", "1\tOFF\n"))
        assert err.value.line == 1

    def test_duplicate_id(self, tmp_path):
        with pytest.raises(UniquenessError):
            load_tsv(write(tmp_path / "c.tsv", "1\tا\tOFF\n1\tب\tNOT\n"))

    def test_empty_text(self, tmp_path):
        path = write(tmp_path / "c.tsv", "1\t  \tOFF\n")
        with pytest.raises(ParseError):
            load_tsv(path)
        assert load_tsv(path, allow_empty_text=True)["1"].text == "  "

    def test_extra_columns_ignored(self, tmp_path):
        corpus = load_tsv(write(tmp_path / "c.tsv", "1\tنص\tNOT\textra\n"))
        assert corpus["1"].label is Label.NOT

    def test_round_trip_with_escapes(self, tmp_path, corpus_factory):
        corpus = corpus_factory(["OFF", "NOT"], ["سطر\tمع تاب", "سطر\nجديد"])
        save_tsv(corpus, tmp_path / "out.tsv")
        again = load_tsv(tmp_path / "out.tsv")
        assert again == corpus
        save_tsv(again, tmp_path / "out2.tsv")
        assert (tmp_path / "out.tsv").read_bytes() == (tmp_path / "out2.tsv").read_bytes()

    def test_read_texts_without_labels(self, tmp_path):
        rows = read_texts(write(tmp_path / "u.tsv", "id\ttext\n7\tمرحبا\n8\tاهلا\tOFF\n"))
        assert rows == [("7", "مرحبا"), ("8", "اهلا")]


class TestOfficialSplit:
    """Tests for positional splitting."""

    def test_scaled_sizes(self, small_corpus):
        train, dev, test = official_split(small_corpus, (7, 1, 2))
        assert train.ids == small_corpus.ids[:7]
        assert dev.ids == small_corpus.ids[7:8]
        assert test.ids == small_corpus.ids[8:]
        assert (train.split_tag, dev.split_tag, test.split_tag) == (
            SplitTag.TRAIN,
            SplitTag.DEV,
            SplitTag.TEST,
        )

    def test_concatenation_is_input(self, small_corpus):
        parts = official_split(small_corpus, (7, 1, 2))
        assert sum((p.tweets for p in parts), ()) == small_corpus.tweets

    def test_size_mismatch(self, corpus_factory):
        with pytest.raises(SplitError):
            official_split(corpus_factory(["NOT"] * 9), (7, 1, 2))

    def test_official_sizes(self, corpus_factory):
        corpus = corpus_factory(["NOT"] * 10000)
        assert [len(c) for c in official_split(corpus)] == [7000, 1000, 2000]

    def test_fractions(self, small_corpus):
        assert [len(c) for c in split_by_fractions(small_corpus)] == [7, 1, 2]

    def test_bad_fractions(self, small_corpus):
        with pytest.raises(ConfigError):
            split_by_fractions(small_corpus, (0.5, 0.1, 0.1))


class TestMakeFolds:
    """Tests for k-fold assignment."""

    def test_one_per_fold(self, small_corpus):
        plan = make_folds(small_corpus, 10, seed=1)
        assert plan.fold_sizes() == [1] * 10

    def test_pigeonhole(self, small_corpus):
        assert sorted(make_folds(small_corpus, 3, seed=1).fold_sizes()) == [3, 3, 4]

    def test_partition(self, synthetic_corpus):
        plan = make_folds(synthetic_corpus, 10, seed=5)
        seen = []
        for fold in range(10):
            train, test = plan.split(synthetic_corpus, fold)
            assert not set(train.ids) & set(test.ids)
            assert len(train) + len(test) == len(synthetic_corpus)
            seen.extend(test.ids)
        assert sorted(seen) == sorted(synthetic_corpus.ids)
        assert max(plan.fold_sizes()) - min(plan.fold_sizes()) <= 1

    def test_deterministic(self, small_corpus):
        first = make_folds(small_corpus, 5, 1).assignments
        assert make_folds(small_corpus, 5, 1).assignments == first
        assert make_folds(small_corpus, 5, 2).assignments != first

    @pytest.mark.parametrize("k", [0, 1, 11])
    def test_invalid_k(self, small_corpus, k):
        with pytest.raises(ConfigError):
            make_folds(small_corpus, k, 0)


class TestUpsampleMinority:
    """Tests for upsample_minority."""

    def test_balances_19_percent(self, corpus_factory):
        corpus = corpus_factory(["OFF"] * 19 + ["NOT"] * 81)
        balanced = upsample_minority(corpus, seed=3)
        assert balanced.class_counts() == {Label.OFF: 81, Label.NOT: 81}
        assert balanced.tweets[:100] == corpus.tweets
        for tweet in balanced.tweets[100:]:
            original, _, suffix = tweet.id.partition("#dup")
            assert suffix.isdigit()
            assert corpus[original].text == tweet.text
            assert tweet.label is Label.OFF

    def test_already_balanced(self, corpus_factory):
        corpus = corpus_factory(["OFF"] * 5 + ["NOT"] * 5)
        assert upsample_minority(corpus, 0) is corpus

    def test_single_class(self, corpus_factory):
        with pytest.raises(RebalanceError):
            upsample_minority(corpus_factory(["NOT"] * 3), 0)

    def test_seeded(self, corpus_factory):
        corpus = corpus_factory(["OFF"] * 2 + ["NOT"] * 8)
        assert upsample_minority(corpus, 4) == upsample_minority(corpus, 4)

    def test_duplicate_ids_avoid_existing(self):
        tweets = [Tweet("a", "سيء", Label.OFF), Tweet("a#dup1", "سيء", Label.OFF)]
        tweets += [Tweet(f"n{i}", "جيد", Label.NOT) for i in range(6)]
        balanced = upsample_minority(Corpus(tuple(tweets)), seed=0)
        assert balanced.class_counts() == {Label.OFF: 6, Label.NOT: 6}
        assert len(set(balanced.ids)) == 12
        assert set(balanced.ids[:8]) == {t.id for t in tweets}


def test_select_keeps_corpus_order(small_corpus):
    sub = small_corpus.select(["t5", "t1"], SplitTag.DEV)
    assert sub.ids == ["t1", "t5"]
    assert isinstance(sub, Corpus) and sub.split_tag is SplitTag.DEV
