#!/usr/bin/env python3
"""Tests for cross-run error intersections and feature-family contrast sets."""
import json

import pytest

from scripts.corpus import Label
from scripts.error_analysis import (
    NOT_AS_OFF,
    OFF_AS_NOT,
    PredictionRun,
    attach_texts,
    feature_family_contrast,
    has_repeat_run,
    length_and_repetition_profile,
    misclassified_by_all,
    misclassified_only_by,
    write_error_report,
)
from scripts.errors import AnalysisError, ConfigError
from scripts.evaluate import PredictionRecord, build_report, write_report
from scripts.models import ModelSpec

GOLDS = ["OFF", "NOT", "OFF", "NOT", "OFF"]


def make_run(run_id, wrong, golds=GOLDS, feature="tfidf"):
    """A run over ids t0..tN that gets exactly the ``wrong`` indices wrong."""
    records = []
    for i, gold in enumerate(golds):
        gold = Label(gold)
        pred = (Label.NOT if gold is Label.OFF else Label.OFF) if i in wrong else gold
        records.append(PredictionRecord(f"t{i}", gold, pred, 0.5))
    return PredictionRun(run_id, "gru", feature, tuple(records))


class TestMisclassifiedByAll:
    """Tests for misclassified_by_all."""

    def test_hand_intersection(self):
        runs = [make_run("a", {2, 4}), make_run("b", {2, 4, 1}), make_run("c", {2})]
        report = misclassified_by_all(runs)
        assert report.ids == ("t2",)
        assert report.counts == {OFF_AS_NOT: 1, NOT_AS_OFF: 0}

    def test_single_run(self):
        report = misclassified_by_all([make_run("a", {0, 1})])
        assert report.off_as_not == ("t0",) and report.not_as_off == ("t1",)

    def test_perfect_run_empties_report(self):
        runs = [make_run("a", {0, 1, 2}), make_run("b", {0, 1, 2}), make_run("p", set())]
        assert misclassified_by_all(runs).ids == ()

    def test_adding_runs_only_shrinks(self):
        runs = [make_run("a", {0, 1, 2, 3}), make_run("b", {1, 2, 3}), make_run("c", {3, 4})]
        sizes = [len(misclassified_by_all(runs[: n + 1]).ids) for n in range(3)]
        assert sizes == sorted(sizes, reverse=True)

    def test_coverage_mismatch(self):
        with pytest.raises(AnalysisError):
            misclassified_by_all([make_run("a", set()), make_run("b", set(), GOLDS[:4])])

    def test_gold_disagreement(self):
        flipped = ["NOT"] + GOLDS[1:]
        with pytest.raises(AnalysisError):
            misclassified_by_all([make_run("a", set()), make_run("b", set(), flipped)])

    def test_no_runs(self):
        with pytest.raises(AnalysisError):
            misclassified_by_all([])

    def test_duplicate_ids_in_run(self):
        record = PredictionRecord("t0", Label.OFF, Label.OFF, 0.9)
        with pytest.raises(AnalysisError):
            PredictionRun("a", "gru", "tfidf", (record, record))


class TestOnlyBy:
    """Tests for misclassified_only_by."""

    def test_unique_errors(self):
        runs = [make_run("a", {1, 3}), make_run("b", {3}), make_run("c", set())]
        assert misclassified_only_by(runs, "a").ids == ("t1",)

    def test_unknown_run(self):
        with pytest.raises(AnalysisError):
            misclassified_only_by([make_run("a", set())], "zzz")


class TestFeatureFamilyContrast:
    """Tests for feature_family_contrast."""

    def test_wrong_in_all_a_right_in_most_b(self):
        family_a = [make_run(f"a{i}", {0}, feature="aravec") for i in range(5)]
        family_b = [make_run(f"b{i}", {0} if i == 0 else set()) for i in range(5)]
        only_a, only_b = feature_family_contrast(family_a, family_b)
        assert only_a == {"t0"} and only_b == set()

    def test_right_everywhere_in_neither(self):
        family = [make_run("a", set())]
        assert feature_family_contrast(family, [make_run("b", set())]) == (set(), set())

    def test_strict_majority(self):
        family_a = [make_run("a", {0})]
        family_b = [make_run("b0", {0}), make_run("b1", set())]
        assert feature_family_contrast(family_a, family_b)[0] == set()
        assert feature_family_contrast(family_a, family_b, 0.4)[0] == {"t0"}

    def test_threshold_one_needs_every_run(self):
        family_a = [make_run("a", {0})]
        family_b = [make_run("b0", set()), make_run("b1", set()), make_run("b2", {0})]
        assert feature_family_contrast(family_a, family_b, 1.0)[0] == set()
        assert feature_family_contrast(family_a, family_b[:2], 1.0)[0] == {"t0"}

    def test_sets_disjoint(self):
        family_a = [make_run("a0", {0, 1}), make_run("a1", {1, 2})]
        family_b = [make_run("b0", {3}), make_run("b1", {3, 4}), make_run("b2", {3})]
        only_a, only_b = feature_family_contrast(family_a, family_b)
        assert only_a == {"t1"} and only_b == {"t3"}
        assert not only_a & only_b

    def test_empty_family(self):
        with pytest.raises(AnalysisError):
            feature_family_contrast([], [make_run("b", set())])

    def test_bad_threshold(self):
        with pytest.raises(ConfigError):
            feature_family_contrast([make_run("a", set())], [make_run("b", set())], 1.5)


class TestProfile:
    """Tests for texts, profiles and report files."""

    def test_mean_and_median(self, corpus_factory):
        corpus = corpus_factory(["OFF", "OFF"], ["ا ب ج", "ا ب ج د ه"])
        report = misclassified_by_all([make_run("a", {0, 1}, golds=["OFF", "OFF"])])
        profile = length_and_repetition_profile(report, corpus)
        assert profile[OFF_AS_NOT].mean_tokens == 4.0
        assert profile[OFF_AS_NOT].median_tokens == 4.0
        assert profile[NOT_AS_OFF].size == 0 and profile[NOT_AS_OFF].mean_tokens is None

    def test_repeat_runs(self):
        assert has_repeat_run("ههههه")
        assert not has_repeat_run("هه كلام")
        assert not has_repeat_run("111")

    def test_missing_id(self, corpus_factory):
        report = misclassified_by_all([make_run("a", {4})])
        with pytest.raises(AnalysisError):
            length_and_repetition_profile(report, corpus_factory(["OFF"]))
        with pytest.raises(AnalysisError):
            attach_texts(report, corpus_factory(["OFF"]))

    def test_written_files(self, corpus_factory, tmp_path):
        corpus = corpus_factory(GOLDS, ["نص\tاول", "ب", "ج", "د", "ه"])
        report = attach_texts(misclassified_by_all([make_run("a", {0, 1})]), corpus)
        profile = length_and_repetition_profile(report, corpus)
        write_error_report(report, tmp_path / "e.json", tmp_path / "e.tsv", profile)
        payload = json.loads((tmp_path / "e.json").read_text(encoding="utf-8"))
        assert payload["counts"] == {OFF_AS_NOT: 1, NOT_AS_OFF: 1}
        assert payload[OFF_AS_NOT] == [{"id": "t0", "text": "نص\tاول"}]
        assert payload["profile"][NOT_AS_OFF]["size"] == 1
        lines = (tmp_path / "e.tsv").read_text(encoding="utf-8").splitlines()
        assert lines == ["set\tid\ttext", f"{OFF_AS_NOT}\tt0\tنص اول", f"{NOT_AS_OFF}\tt1\tب"]

    def test_run_from_report_file(self, tmp_path):
        run = make_run("x", {1})
        report = build_report(ModelSpec(arch="bigru", feature="aravec"))
        report["predictions"] = [r.to_dict() for r in run.records]
        write_report(report, tmp_path / "report.json")
        loaded = PredictionRun.from_report(tmp_path / "report.json")
        assert loaded.arch == "bigru" and loaded.feature == "aravec"
        assert loaded.run_id == str(tmp_path / "report.json")
        assert loaded.errors() == {"t1"}
