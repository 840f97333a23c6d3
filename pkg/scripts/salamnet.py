#!/usr/bin/env python3
"""SalamNET command-line entry point.

Usage:
  salamnet synth --n 2000 --seed 7 --out data/synthetic.tsv --embeddings-out data/synthetic.w2v
  salamnet preprocess --in data/synthetic.tsv --out data/synthetic.clean.tsv
  salamnet train --data data/synthetic.tsv --arch bigru --features tfidf --seed 42
  salamnet evaluate --model-dir runs/<run>/bigru-tfidf --data data/synthetic.tsv
  salamnet cv --data data/synthetic.tsv --arch all --k 10 --jobs 4
  salamnet gridsearch --data data/synthetic.tsv --arch gru
  salamnet predict --model-dir runs/<run>/bigru-tfidf --in tweets.tsv
  salamnet analyze --runs runs/a/bigru-tfidf/report.json runs/a/gru-tfidf/report.json

Every command except ``synth`` writes into ``<output_dir>/<timestamp>-<config hash>/`` (or
``<output_dir>/<run name>/``) and records the resolved config, the seed and the sha256 of
every input file in ``manifest.json``. Settings come from flags, then ``--config FILE``, then
``SALAMNET_*`` environment variables (or ``.env``), then defaults.

Exit codes: 0 success, 1 configuration error, 2 data error, 3 numeric error.
"""
import argparse
import hashlib
import json
import logging
import re
import sys
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from joblib import Parallel, delayed
from pydantic import ValidationError

from scripts.corpus import Corpus, load_tsv, read_texts, save_tsv, split_by_fractions
from scripts.corpus import upsample_minority
from scripts.error_analysis import (
    PredictionRun,
    attach_texts,
    feature_family_contrast,
    length_and_repetition_profile,
    misclassified_by_all,
    misclassified_only_by,
    write_error_report,
)
from scripts.errors import ConfigError, SalamNetError
from scripts.evaluate import (
    SplitResult,
    build_report,
    cross_validate,
    evaluate_split,
    write_report,
)
from scripts.features import EmbeddingTable, FeatureKind, Featurizer, SequenceBridge
from scripts.features import load_embeddings
from scripts.models import (
    Arch,
    GridSpec,
    ModelSpec,
    TrainedModel,
    encode,
    fit_model,
    grid_search,
    load_model,
    predict_texts,
    save_model,
    write_grid_tsv,
)
from scripts.preprocess import Pipeline
from scripts.scoring import format_metrics
from scripts.settings import RunConfig, build_config, check_inputs
from scripts.synthetic import DEFAULT_OFFENSIVE_RATIO, generate_synthetic
from scripts.synthetic import write_synthetic_embeddings

LOGGER = logging.getLogger(__name__)

MANIFEST_FILE = "manifest.json"
LEXICON_FIELDS = ("emoji_lexicon", "dialect_lexicon", "hypernym_lexicon", "stopwords")
INPUT_FIELDS = ("data", "test_data", "embeddings", "model_dir") + LEXICON_FIELDS
BANNER = "=" * 80


def _sha256(path: Path) -> str:
    path = Path(path)
    if path.is_dir():
        digest = hashlib.sha256()
        for child in sorted(p for p in path.rglob("*") if p.is_file()):
            digest.update(str(child.relative_to(path)).encode("utf-8"))
            digest.update(_sha256(child).encode("ascii"))
        return digest.hexdigest()
    digest = hashlib.sha256()
    with path.open("rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


@dataclass
class RunContext:
    """Output directory of one command plus the bookkeeping for its manifest."""

    command: str
    config: RunConfig
    run_dir: Path
    inputs: Dict[str, Path] = field(default_factory=dict)
    outputs: List[Path] = field(default_factory=list)

    @classmethod
    def create(cls, command: str, config: RunConfig, inputs: Dict[str, Path]) -> "RunContext":
        name = config.run_name or (
            f"{datetime.now().strftime('%Y%m%d-%H%M%S')}-{config.config_hash()}"
        )
        run_dir = config.output_dir / name
        run_dir.mkdir(parents=True, exist_ok=True)
        LOGGER.info("Run directory: %s", run_dir)
        return cls(command, config, run_dir, dict(inputs))

    def output(self, *parts: str) -> Path:
        path = self.run_dir.joinpath(*parts)
        path.parent.mkdir(parents=True, exist_ok=True)
        self.outputs.append(path)
        return path

    def add_output(self, path: Path) -> Path:
        self.outputs.append(Path(path))
        return Path(path)

    def _display(self, path: Path) -> str:
        try:
            return str(path.relative_to(self.run_dir))
        except ValueError:
            return str(path)

    def write_manifest(self) -> Path:
        manifest = {
            "command": self.command,
            "config": self.config.model_dump(mode="json"),
            "config_hash": self.config.config_hash(),
            "seed": self.config.seed,
            "inputs": {
                name: {"path": str(path), "sha256": _sha256(path)}
                for name, path in sorted(self.inputs.items())
            },
            "outputs": sorted({self._display(p) for p in self.outputs}),
        }
        path = self.run_dir / MANIFEST_FILE
        path.write_text(json.dumps(manifest, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
        return path


# --- shared helpers ---------------------------------------------------------------------


def _resolved(config: RunConfig, use_lexicons: bool) -> Tuple[RunConfig, Dict[str, Path]]:
    """Config with input paths resolved against data_dir, plus the inputs to hash."""
    updates = {name: config.resolve(getattr(config, name)) for name in INPUT_FIELDS}
    config = config.model_copy(update=updates)
    fields = [f for f in INPUT_FIELDS if use_lexicons or f not in LEXICON_FIELDS]
    inputs = {f: getattr(config, f) for f in fields if getattr(config, f) is not None}
    check_inputs(inputs.values())
    return config, inputs


def _require(config: RunConfig, name: str, command: str) -> Path:
    value = getattr(config, name)
    if value is None:
        flag = "--" + name.replace("_", "-")
        raise ConfigError(f"{command} needs {flag}")
    return value


def _pipeline(config: RunConfig) -> Optional[Pipeline]:
    return None if config.preprocessed else Pipeline(config.pipeline_config())


def _load(config: RunConfig, path: Path) -> Corpus:
    return load_tsv(path, allow_empty_text=config.preprocessed)


def _embeddings(config: RunConfig) -> Optional[EmbeddingTable]:
    if config.features is not FeatureKind.ARAVEC:
        return None
    return load_embeddings(_require(config, "embeddings", "aravec features"))


def _override_embeddings(config: RunConfig) -> Optional[EmbeddingTable]:
    """Embedding table replacing the path recorded in a checkpoint, if one was given."""
    return load_embeddings(config.embeddings) if config.embeddings is not None else None


def _splits(config: RunConfig, pipeline: Optional[Pipeline]) -> Tuple[Corpus, Corpus, Corpus]:
    corpus = _load(config, _require(config, "data", "this command"))
    splits = split_by_fractions(corpus, config.split_fractions)
    if pipeline is not None:
        splits = tuple(pipeline.preprocess_corpus(c) for c in splits)
    LOGGER.info("Split sizes: train=%d dev=%d test=%d", *(len(c) for c in splits))
    return splits


def _fan_out_jobs(config: RunConfig, n_tasks: int) -> Tuple[int, int]:
    """(outer, inner) job limits: parallelize across architectures when there are several."""
    return (config.jobs, 1) if n_tasks > 1 else (1, config.jobs)


def _print_banner(title: str) -> None:
    print(BANNER)
    print(title)
    print(BANNER)


# --- commands ---------------------------------------------------------------------------


def cmd_preprocess(config: RunConfig, args: argparse.Namespace) -> int:
    config, inputs = _resolved(config, use_lexicons=True)
    data = _require(config, "data", "preprocess")
    ctx = RunContext.create("preprocess", config, inputs)
    corpus = load_tsv(data)
    cleaned = Pipeline(config.pipeline_config()).preprocess_corpus(corpus)
    out = ctx.add_output(Path(args.out)) if args.out else ctx.output("preprocessed.tsv")
    save_tsv(cleaned, out)
    ctx.write_manifest()
    print(f"Preprocessed {len(cleaned)} tweets -> {out}")
    return 0


def _train_one(
    spec: ModelSpec,
    train: Corpus,
    dev: Corpus,
    test: Corpus,
    embeddings: Optional[EmbeddingTable],
    embeddings_path: Optional[Path],
) -> Tuple[TrainedModel, Optional[SplitResult]]:
    model = fit_model(spec, train, dev, embeddings, embeddings_path)
    result = evaluate_split(model, test) if len(test) else None
    return model, result


def cmd_train(config: RunConfig, args: argparse.Namespace) -> int:
    config, inputs = _resolved(config, use_lexicons=not config.preprocessed)
    _require(config, "data", "train")
    embeddings = _embeddings(config)
    ctx = RunContext.create("train", config, inputs)
    train, dev, test = _splits(config, _pipeline(config))
    if config.upsample:
        train = upsample_minority(train, config.seed)

    specs = [config.model_spec(arch) for arch in config.archs()]
    outer, _ = _fan_out_jobs(config, len(specs))
    outcomes = Parallel(n_jobs=outer)(
        delayed(_train_one)(spec, train, dev, test, embeddings, config.embeddings)
        for spec in specs
    )
    _print_banner(f"TRAIN  {len(train)} train / {len(dev)} dev / {len(test)} test")
    for spec, (model, result) in zip(specs, outcomes):
        model_dir = ctx.run_dir / spec.name
        save_model(model, model_dir)
        for path in sorted(model_dir.iterdir()):
            ctx.add_output(path)
        write_report(build_report(spec, test=result), ctx.output(spec.name, "report.json"))
        summary = format_metrics(result.metrics) if result is not None else "no test split"
        print(f"  {spec.name:16} {summary}")
    ctx.write_manifest()
    print(f"Artifacts written to {ctx.run_dir}")
    return 0


def cmd_evaluate(config: RunConfig, args: argparse.Namespace) -> int:
    config, inputs = _resolved(config, use_lexicons=not config.preprocessed)
    model_dir = _require(config, "model_dir", "evaluate")
    model = load_model(model_dir, embeddings=_override_embeddings(config))
    pipeline = _pipeline(config)
    if config.test_data is not None:
        test = _load(config, config.test_data)
        if pipeline is not None:
            test = pipeline.preprocess_corpus(test)
    elif config.data is not None:
        _, _, test = _splits(config, pipeline)
    else:
        raise ConfigError("evaluate needs --test-data or --data")
    ctx = RunContext.create("evaluate", config, inputs)
    result = evaluate_split(model, test)
    write_report(build_report(model.spec, test=result), ctx.output("report.json"))
    ctx.write_manifest()
    _print_banner(f"EVALUATE  {model.name} on {len(test)} tweets")
    print(f"  {format_metrics(result.metrics)}")
    print(f"  confusion: {result.confusion.to_dict()}")
    return 0


def cmd_cv(config: RunConfig, args: argparse.Namespace) -> int:
    config, inputs = _resolved(config, use_lexicons=not config.preprocessed)
    corpus = _load(config, _require(config, "data", "cv"))
    embeddings = _embeddings(config)
    ctx = RunContext.create("cv", config, inputs)
    pipeline = _pipeline(config)
    if pipeline is not None:
        corpus = pipeline.preprocess_corpus(corpus)

    specs = [config.model_spec(arch) for arch in config.archs()]
    outer, inner = _fan_out_jobs(config, len(specs))
    reports = Parallel(n_jobs=outer)(
        delayed(cross_validate)(
            spec,
            corpus,
            k=config.k,
            seed=config.seed,
            embeddings=embeddings,
            upsample=config.upsample,
            jobs=inner,
        )
        for spec in specs
    )
    _print_banner(f"CROSS-VALIDATION  k={config.k} seed={config.seed} on {len(corpus)} tweets")
    for spec, report in zip(specs, reports):
        write_report(build_report(spec, cv=report), ctx.output(spec.name, "cv.json"))
        f1 = report.summary["macro_f1"]
        print(f"  {spec.name:16} macro-F1 {f1['mean']:.4f} +/- {f1['std']:.4f}")
    ctx.write_manifest()
    print(f"Reports written to {ctx.run_dir}")
    return 0


def _grid_spec(args: argparse.Namespace) -> GridSpec:
    values = {}
    for name, cast in (("dropouts", float), ("layers", int), ("hidden", int)):
        raw = getattr(args, f"grid_{name}", None)
        if raw:
            values[name] = tuple(cast(v) for v in raw.split(",") if v.strip())
    return GridSpec(**values)


def cmd_gridsearch(config: RunConfig, args: argparse.Namespace) -> int:
    config, inputs = _resolved(config, use_lexicons=not config.preprocessed)
    _require(config, "data", "gridsearch")
    grid = _grid_spec(args)
    embeddings = _embeddings(config)
    ctx = RunContext.create("gridsearch", config, inputs)
    train, dev, _ = _splits(config, _pipeline(config))
    if config.upsample:
        train = upsample_minority(train, config.seed)

    _print_banner(f"GRID SEARCH  {len(grid.points())} points per architecture")
    for arch in config.archs():
        spec = config.model_spec(arch)
        featurizer = Featurizer.fit(
            spec.feature,
            train.texts,
            embeddings=embeddings,
            bridge=spec.hyper.bridge,
            buckets=spec.hyper.buckets,
            max_len=spec.hyper.max_len,
        )
        best, rows = grid_search(
            arch,
            grid,
            encode(featurizer, train, True),
            encode(featurizer, dev, True),
            base=spec,
            jobs=config.jobs,
        )
        write_grid_tsv(rows, ctx.output(spec.name, "grid.tsv"))
        ctx.output(spec.name, "best_spec.json").write_text(
            best.model_dump_json(indent=2) + "\n", encoding="utf-8"
        )
        hyper = best.hyper
        print(
            f"  {spec.name:16} best dropout={hyper.dropout} layers={hyper.layers} "
            f"hidden={hyper.hidden}"
        )
    ctx.write_manifest()
    print(f"Grid tables written to {ctx.run_dir}")
    return 0


def cmd_predict(config: RunConfig, args: argparse.Namespace) -> int:
    config, inputs = _resolved(config, use_lexicons=not config.preprocessed)
    model_dir = _require(config, "model_dir", "predict")
    data = _require(config, "data", "predict")
    model = load_model(model_dir, embeddings=_override_embeddings(config))
    rows = read_texts(data)
    pipeline = _pipeline(config)
    texts = [pipeline(text) if pipeline is not None else text for _, text in rows]
    ctx = RunContext.create("predict", config, inputs)
    out = ctx.output("predictions.tsv")
    with out.open("w", encoding="utf-8", newline="\n") as f:
        f.write("id\tprobability\tlabel\n")
        for (tweet_id, _), (prob, label) in zip(rows, predict_texts(model, texts)):
            f.write(f"{tweet_id}\t{prob:.6f}\t{label.value}\n")
    ctx.write_manifest()
    print(f"Wrote {len(rows)} predictions to {out}")
    return 0


def _slug(text: str) -> str:
    return re.sub(r"[^A-Za-z0-9._-]+", "_", text).strip("_") or "run"


def cmd_analyze(config: RunConfig, args: argparse.Namespace) -> int:
    config, inputs = _resolved(config, use_lexicons=False)
    raw_paths = list(args.runs or [])
    family_a_paths = list(args.family_a or [])
    family_b_paths = list(args.family_b or [])
    if not raw_paths and not (family_a_paths and family_b_paths):
        raise ConfigError("analyze needs --runs or both --family-a and --family-b")
    all_paths = list(dict.fromkeys(raw_paths + family_a_paths + family_b_paths))
    resolved = {p: config.resolve(Path(p)) for p in all_paths}
    check_inputs(resolved.values())
    for i, p in enumerate(all_paths):
        inputs[f"run{i}"] = resolved[p]
    runs = {p: PredictionRun.from_report(resolved[p], run_id=p) for p in all_paths}
    corpus = _load(config, config.data) if config.data is not None else None
    ctx = RunContext.create("analyze", config, inputs)

    def finish(report, stem: str, extra: Optional[Dict] = None) -> None:
        profile = None
        if corpus is not None:
            report = attach_texts(report, corpus)
            profile = length_and_repetition_profile(report, corpus)
        write_error_report(
            report, ctx.output(f"{stem}.json"), ctx.output(f"{stem}.tsv"), profile, extra
        )

    selected_paths = raw_paths or all_paths
    selected = [runs[p] for p in selected_paths]
    _print_banner(f"ERROR ANALYSIS  {len(selected)} runs")
    common = misclassified_by_all(selected)
    finish(common, "misclassified_by_all")
    print(f"  misclassified by all: {common.counts}")

    if args.only_by:
        if args.only_by not in selected_paths:
            raise ConfigError(f"--only-by {args.only_by!r} is not one of the analyzed runs")
        only = misclassified_only_by(selected, args.only_by)
        finish(only, f"misclassified_only_by_{_slug(args.only_by)}")
        print(f"  misclassified only by {args.only_by}: {only.counts}")

    family_a = [runs[p] for p in family_a_paths]
    family_b = [runs[p] for p in family_b_paths]
    if not family_a and not family_b:
        family_a = [r for r in selected if r.feature == FeatureKind.ARAVEC.value]
        family_b = [r for r in selected if r.feature == FeatureKind.TFIDF.value]
    if family_a and family_b:
        threshold = 0.5 if args.threshold is None else args.threshold
        a_only, b_only = feature_family_contrast(family_a, family_b, threshold)
        contrast = {
            "family_a": [r.run_id for r in family_a],
            "family_b": [r.run_id for r in family_b],
            "majority_threshold": threshold,
            "wrong_in_all_a_right_in_most_b": sorted(a_only),
            "wrong_in_all_b_right_in_most_a": sorted(b_only),
        }
        if corpus is not None:
            contrast["texts"] = {i: corpus[i].text for i in sorted(a_only | b_only)}
        ctx.output("feature_family_contrast.json").write_text(
            json.dumps(contrast, indent=2, ensure_ascii=False) + "\n", encoding="utf-8"
        )
        print(f"  family contrast: {len(a_only)} A-only misses, {len(b_only)} B-only misses")
    ctx.write_manifest()
    print(f"Reports written to {ctx.run_dir}")
    return 0


def cmd_synth(config: RunConfig, args: argparse.Namespace) -> int:
    ratio = DEFAULT_OFFENSIVE_RATIO if args.ratio is None else args.ratio
    corpus = generate_synthetic(args.n, config.seed, ratio, Path(args.out))
    print(f"Wrote {len(corpus)} synthetic tweets to {args.out}")
    if args.embeddings_out:
        path = write_synthetic_embeddings(
            Path(args.embeddings_out), args.embedding_dim, config.seed
        )
        print(f"Wrote synthetic embeddings to {path}")
    return 0


COMMANDS: Dict[str, Callable[[RunConfig, argparse.Namespace], int]] = {
    "preprocess": cmd_preprocess,
    "train": cmd_train,
    "evaluate": cmd_evaluate,
    "cv": cmd_cv,
    "gridsearch": cmd_gridsearch,
    "predict": cmd_predict,
    "analyze": cmd_analyze,
    "synth": cmd_synth,
}


# --- argument parsing -------------------------------------------------------------------


def _run_options() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", type=Path, help="INI config file ([paths]/[model]/[run] sections)")
    p.add_argument("--verbose", "-v", action="store_true", default=None, help="Debug logging")
    p.add_argument("--seed", type=int, help="Random seed (default 0)")
    p.add_argument("--jobs", type=int, help="Parallel jobs for folds, grid points, architectures")
    p.add_argument("--data-dir", type=Path, help="Base directory for relative input paths")
    p.add_argument("--output-dir", type=Path, help="Parent directory of run directories")
    p.add_argument("--run-name", help="Run directory name instead of <timestamp>-<config hash>")
    return p


def _data_options() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--data", "--in", dest="data", type=Path, help="Input TSV (id, text, label)")
    p.add_argument("--test-data", type=Path, help="Separate test TSV for evaluate")
    p.add_argument("--split", dest="split_fractions", help="TRAIN,DEV,TEST fractions (0.7,0.1,0.2)")
    p.add_argument("--upsample", action="store_true", default=None, help="Balance TRAIN only")
    p.add_argument("--preprocessed", action="store_true", default=None,
                   help="Input text is already preprocessed")
    p.add_argument("--steps", help="Comma-separated preprocessing steps to enable")
    p.add_argument("--emoji-lexicon", type=Path)
    p.add_argument("--dialect-lexicon", type=Path)
    p.add_argument("--hypernym-lexicon", type=Path)
    p.add_argument("--stopwords", type=Path)
    return p


def _model_options() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--arch", choices=[a.value for a in Arch] + ["all"])
    p.add_argument("--features", choices=[f.value for f in FeatureKind])
    p.add_argument("--embeddings", type=Path, help="word2vec text embedding file")
    p.add_argument("--model-dir", type=Path, help="Directory holding model.ckpt")
    p.add_argument("--epochs", type=int)
    p.add_argument("--dropout", type=float)
    p.add_argument("--hidden", type=int)
    p.add_argument("--layers", type=int, choices=[1, 2])
    p.add_argument("--layer-dropout", type=float)
    p.add_argument("--lr", type=float)
    p.add_argument("--batch", type=int)
    p.add_argument("--max-len", type=int)
    p.add_argument("--buckets", type=int)
    p.add_argument("--bridge", choices=[b.value for b in SequenceBridge])
    p.add_argument("-k", "--k", type=int, help="Cross-validation folds (default 10)")
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="salamnet",
        description="Arabic offensive-language detection experiments.",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  # Generate a synthetic corpus and train a Bi-GRU on it
  salamnet synth --n 2000 --seed 7 --out data/synthetic.tsv
  salamnet train --data data/synthetic.tsv --arch bigru --seed 42 --run-name demo

  # 10-fold CV of all five recurrent models with 4 workers
  salamnet cv --data data/synthetic.tsv --arch all --jobs 4
        """,
    )
    sub = parser.add_subparsers(dest="command", required=True)
    run, data, model = _run_options(), _data_options(), _model_options()

    p = sub.add_parser("preprocess", parents=[run, data], help="Run the normalization pipeline")
    p.add_argument("--out", help="Output TSV (default: <run dir>/preprocessed.tsv)")

    sub.add_parser("train", parents=[run, data, model], help="Train, save and test a model")
    sub.add_parser("evaluate", parents=[run, data, model], help="Score a saved model")
    sub.add_parser("cv", parents=[run, data, model], help="k-fold cross-validation")
    sub.add_parser("predict", parents=[run, data, model], help="Label unlabeled tweets")

    p = sub.add_parser("gridsearch", parents=[run, data, model], help="Dropout/layers/hidden grid")
    p.add_argument("--grid-dropouts", help="Comma list (default 0.25,0.5,0.75,0.99)")
    p.add_argument("--grid-layers", help="Comma list (default 1,2)")
    p.add_argument("--grid-hidden", help="Comma list (default 50,100,200,300)")

    p = sub.add_parser("analyze", parents=[run, data], help="Cross-model error analysis")
    p.add_argument("--runs", nargs="+", help="Report JSON files to intersect")
    p.add_argument("--family-a", nargs="+", help="Reports of the first feature family")
    p.add_argument("--family-b", nargs="+", help="Reports of the second feature family")
    p.add_argument("--threshold", type=float, help="Majority threshold for 'most' (default 0.5)")
    p.add_argument("--only-by", help="Report path whose exclusive errors to list")

    p = sub.add_parser("synth", parents=[run], help="Write a synthetic corpus")
    p.add_argument("--n", type=int, default=2000, help="Number of tweets (>= 20)")
    p.add_argument("--ratio", type=float, help="Offensive fraction (default 0.19)")
    p.add_argument("--out", required=True, help="Output TSV")
    p.add_argument("--embeddings-out", help="Also write a word2vec file for the vocabulary")
    p.add_argument("--embedding-dim", type=int, default=50)
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    overrides = {
        name: getattr(args, name) for name in RunConfig.model_fields if hasattr(args, name)
    }
    return build_config(args.config, overrides)


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    try:
        config = config_from_args(args)
        return COMMANDS[args.command](config, args)
    except SalamNetError as exc:
        print(f"Error: {exc}", file=sys.stderr)
        return exc.exit_code
    except ValidationError as exc:
        print(f"Error: invalid configuration: {exc}", file=sys.stderr)
        return ConfigError.exit_code
    except FileNotFoundError as exc:
        print(f"Error: file not found: {exc.filename}", file=sys.stderr)
        return ConfigError.exit_code


if __name__ == "__main__":
    sys.exit(main())
