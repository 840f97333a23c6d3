#!/usr/bin/env python3
"""End-to-end tests of the salamnet command line on a small synthetic corpus."""
import json

import pytest

from scripts.corpus import load_tsv
from scripts.salamnet import MANIFEST_FILE, main

FAST = ["--epochs", "2", "--hidden", "8", "--buckets", "16", "--batch", "16"]


def run_cli(*argv):
    return main([str(a) for a in argv])


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    """Synthetic corpus plus an lr and a gru run trained on it."""
    root = tmp_path_factory.mktemp("cli")
    data = root / "syn.tsv"
    emb = root / "syn.w2v"
    assert run_cli(
        "synth", "--n", 60, "--seed", 3, "--ratio", 0.3, "--out", data,
        "--embeddings-out", emb, "--embedding-dim", 8,
    ) == 0  # fmt: skip
    runs = root / "runs"
    for arch in ("lr", "gru"):
        code = run_cli(
            "train", "--data", data, "--arch", arch, "--seed", 1,
            "--output-dir", runs, "--run-name", f"train-{arch}", *FAST,
        )  # fmt: skip
        assert code == 0
    return {"root": root, "data": data, "emb": emb, "runs": runs}


class TestSynthAndTrain:
    """Tests for the synth and train commands."""

    def test_synth_outputs(self, workspace):
        corpus = load_tsv(workspace["data"])
        assert len(corpus) == 60
        assert workspace["emb"].read_text(encoding="utf-8").split("\n")[0].endswith(" 8")

    def test_train_artifacts(self, workspace):
        run_dir = workspace["runs"] / "train-gru"
        assert {p.name for p in (run_dir / "gru-tfidf").iterdir()} == {
            "model.ckpt",
            "tfidf.tsv",
            "report.json",
        }
        report = json.loads((run_dir / "gru-tfidf" / "report.json").read_text(encoding="utf-8"))
        assert report["model"]["arch"] == "gru"
        assert len(report["predictions"]) == 12
        assert set(report["test"]["confusion"]) == {"OFF->OFF", "OFF->NOT", "NOT->OFF", "NOT->NOT"}

    def test_manifest(self, workspace):
        manifest = json.loads(
            (workspace["runs"] / "train-lr" / MANIFEST_FILE).read_text(encoding="utf-8")
        )
        assert manifest["command"] == "train" and manifest["seed"] == 1
        assert manifest["config"]["arch"] == "lr"
        assert len(manifest["config_hash"]) == 10
        assert len(manifest["inputs"]["data"]["sha256"]) == 64
        assert "stopwords" in manifest["inputs"]
        assert "lr-tfidf/model.ckpt" in manifest["outputs"]
        assert "lr-tfidf/report.json" in manifest["outputs"]

    def test_same_seed_same_checkpoint(self, workspace, tmp_path):
        code = run_cli(
            "train", "--data", workspace["data"], "--arch", "gru", "--seed", 1,
            "--output-dir", tmp_path, "--run-name", "again", *FAST,
        )  # fmt: skip
        assert code == 0
        first = workspace["runs"] / "train-gru" / "gru-tfidf" / "model.ckpt"
        assert (tmp_path / "again" / "gru-tfidf" / "model.ckpt").read_bytes() == first.read_bytes()

    def test_preprocess(self, workspace, tmp_path):
        out = tmp_path / "clean.tsv"
        code = run_cli(
            "preprocess", "--in", workspace["data"], "--out", out,
            "--output-dir", tmp_path, "--run-name", "prep",
        )  # fmt: skip
        assert code == 0
        cleaned = load_tsv(out, allow_empty_text=True)
        assert cleaned.ids == load_tsv(workspace["data"]).ids
        assert not any("#" in text for text in cleaned.texts)
        assert (tmp_path / "prep" / MANIFEST_FILE).exists()


class TestModelCommands:
    """Tests for evaluate, predict, cv and gridsearch."""

    def test_evaluate(self, workspace, tmp_path, capsys):
        code = run_cli(
            "evaluate", "--model-dir", workspace["runs"] / "train-lr" / "lr-tfidf",
            "--data", workspace["data"], "--output-dir", tmp_path, "--run-name", "ev",
        )  # fmt: skip
        assert code == 0
        report = json.loads((tmp_path / "ev" / "report.json").read_text(encoding="utf-8"))
        assert report["model"]["name"] == "lr-tfidf"
        assert len(report["predictions"]) == 12
        assert "EVALUATE" in capsys.readouterr().out

    def test_predict(self, workspace, tmp_path):
        unlabeled = tmp_path / "new.tsv"
        unlabeled.write_text("id\ttext\nu1\tشمس بحر\nu2\tغبي حقير\n", encoding="utf-8")
        code = run_cli(
            "predict", "--model-dir", workspace["runs"] / "train-gru" / "gru-tfidf",
            "--in", unlabeled, "--output-dir", tmp_path, "--run-name", "pr",
        )  # fmt: skip
        assert code == 0
        lines = (tmp_path / "pr" / "predictions.tsv").read_text(encoding="utf-8").splitlines()
        assert lines[0] == "id\tprobability\tlabel"
        assert [line.split("\t")[0] for line in lines[1:]] == ["u1", "u2"]
        for line in lines[1:]:
            _, prob, label = line.split("\t")
            assert label == ("OFF" if float(prob) >= 0.5 else "NOT")

    def test_cv(self, workspace, tmp_path):
        code = run_cli(
            "cv", "--data", workspace["data"], "--arch", "lr", "--k", 2, "--seed", 0,
            "--output-dir", tmp_path, "--run-name", "cv",
        )  # fmt: skip
        assert code == 0
        report = json.loads((tmp_path / "cv" / "lr-tfidf" / "cv.json").read_text(encoding="utf-8"))
        assert len(report["cv"]["folds"]) == 2
        assert set(report["cv"]["summary"]["macro_f1"]) == {"mean", "std"}

    def test_gridsearch(self, workspace, tmp_path):
        code = run_cli(
            "gridsearch", "--data", workspace["data"], "--arch", "gru",
            "--grid-dropouts", "0.25,0.5", "--grid-layers", "1", "--grid-hidden", "50",
            "--output-dir", tmp_path, "--run-name", "gs", *FAST,
        )  # fmt: skip
        assert code == 0
        lines = (tmp_path / "gs" / "gru-tfidf" / "grid.tsv").read_text(encoding="utf-8")
        assert len(lines.splitlines()) == 3
        best = json.loads((tmp_path / "gs" / "gru-tfidf" / "best_spec.json").read_text())
        assert best["hyper"]["hidden"] == 50 and best["hyper"]["dropout"] in (0.25, 0.5)


class TestAnalyze:
    """Tests for the analyze command."""

    def test_intersection_and_contrast(self, workspace, tmp_path):
        lr = workspace["runs"] / "train-lr" / "lr-tfidf" / "report.json"
        gru = workspace["runs"] / "train-gru" / "gru-tfidf" / "report.json"
        code = run_cli(
            "analyze", "--runs", lr, gru, "--family-a", lr, "--family-b", gru,
            "--data", workspace["data"], "--only-by", gru,
            "--output-dir", tmp_path, "--run-name", "an",
        )  # fmt: skip
        assert code == 0
        out = tmp_path / "an"
        common = json.loads((out / "misclassified_by_all.json").read_text(encoding="utf-8"))
        assert set(common["counts"]) == {"OFF->NOT", "NOT->OFF"}
        assert (out / "misclassified_by_all.tsv").read_text(encoding="utf-8").startswith("set\t")
        contrast = json.loads((out / "feature_family_contrast.json").read_text(encoding="utf-8"))
        assert contrast["majority_threshold"] == 0.5
        assert not set(contrast["wrong_in_all_a_right_in_most_b"]) & set(
            contrast["wrong_in_all_b_right_in_most_a"]
        )
        assert list(out.glob("misclassified_only_by_*.json"))

    def test_only_by_must_be_an_intersected_run(self, workspace, tmp_path, capsys):
        lr = workspace["runs"] / "train-lr" / "lr-tfidf" / "report.json"
        gru = workspace["runs"] / "train-gru" / "gru-tfidf" / "report.json"
        code = run_cli(
            "analyze", "--runs", lr, "--family-a", lr, "--family-b", gru, "--only-by", gru,
            "--output-dir", tmp_path, "--run-name", "an",
        )  # fmt: skip
        assert code == 1
        assert "--only-by" in capsys.readouterr().err

    def test_needs_runs(self, tmp_path):
        assert run_cli("analyze", "--output-dir", tmp_path) == 1


class TestExitCodes:
    """Tests for error reporting and exit codes."""

    def test_missing_input(self, tmp_path, capsys):
        code = run_cli("train", "--data", tmp_path / "nope.tsv", "--output-dir", tmp_path)
        assert code == 1
        assert "not found" in capsys.readouterr().err

    def test_bad_config_value(self, workspace, tmp_path):
        code = run_cli(
            "train", "--data", workspace["data"], "--dropout", 1.5, "--output-dir", tmp_path
        )
        assert code == 1

    def test_missing_config_file(self, workspace, tmp_path):
        code = run_cli("train", "--data", workspace["data"], "--config", tmp_path / "x.ini")
        assert code == 1

    def test_malformed_data(self, tmp_path, capsys):
        bad = tmp_path / "bad.tsv"
        bad.write_text("t1\tonly two fields\n", encoding="utf-8")
        assert run_cli("train", "--data", bad, "--arch", "lr", "--output-dir", tmp_path) == 2
        assert "line 1" in capsys.readouterr().err

    def test_bad_label(self, tmp_path):
        bad = tmp_path / "bad.tsv"
        bad.write_text("t1\tنص\tMAYBE\n", encoding="utf-8")
        assert run_cli("train", "--data", bad, "--arch", "lr", "--output-dir", tmp_path) == 2

    def test_bad_synth_arguments(self, tmp_path):
        assert run_cli("synth", "--n", 5, "--out", tmp_path / "s.tsv") == 1


@pytest.mark.slow
class TestAcceptance:
    """Full-size synthetic runs with the default hyperparameters."""

    @pytest.fixture(scope="class")
    def synthetic(self, tmp_path_factory):
        root = tmp_path_factory.mktemp("acceptance")
        data, emb = root / "syn.tsv", root / "syn.w2v"
        assert run_cli("synth", "--n", 2000, "--ratio", 0.19, "--seed", 7, "--out", data,
                       "--embeddings-out", emb) == 0  # fmt: skip
        return root, data, emb

    def test_every_architecture_learns_tfidf(self, synthetic):
        root, data, _ = synthetic
        for arch in ("lr", "all"):
            assert run_cli("train", "--data", data, "--arch", arch, "--output-dir", root,
                           "--run-name", f"tfidf-{arch}") == 0  # fmt: skip
        reports = sorted(root.glob("tfidf-*/*/report.json"))
        assert len(reports) == 6
        for path in reports:
            metrics = json.loads(path.read_text(encoding="utf-8"))["test"]["metrics"]
            assert metrics["macro_f1"] >= 0.95, path.parent.name

    def test_embedding_features_learn(self, synthetic):
        root, data, emb = synthetic
        assert run_cli("train", "--data", data, "--arch", "gru", "--features", "aravec",
                       "--embeddings", emb, "--output-dir", root,
                       "--run-name", "aravec") == 0  # fmt: skip
        report = json.loads((root / "aravec" / "gru-aravec" / "report.json").read_text())
        assert report["test"]["metrics"]["macro_f1"] >= 0.95

    def test_cv_is_reproducible(self, synthetic):
        root, data, _ = synthetic
        for name in ("cv-1", "cv-2"):
            assert run_cli("cv", "--data", data, "--arch", "lr", "--k", 10, "--seed", 3,
                           "--output-dir", root, "--run-name", name) == 0  # fmt: skip
        first = (root / "cv-1" / "lr-tfidf" / "cv.json").read_bytes()
        assert (root / "cv-2" / "lr-tfidf" / "cv.json").read_bytes() == first
