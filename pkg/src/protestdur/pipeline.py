"""End-to-end run: ingest, preprocess, choose K, fit LDA, build features,
balance/split, train the three learners and score them.

A run is driven by a key-value config file (``key = value`` lines, ``#``
comments). Every artifact lands in one run directory, and the resolved
config written there reproduces the run.
"""

import configparser
import hashlib
import json
import logging
import platform
import sys
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from . import corpus, evaluation, features, lda, model_selection, sampling, trees
from ._util import derive_seed
from .errors import ConfigError, DataError, StageError

logger = logging.getLogger(__name__)

LEARNERS = ("single", "bagged", "forest")


def parse_k_range(text):
    """``"2..30"``, ``"2..12:2"`` (step) or ``"2,4,6"``."""
    text = text.strip()
    try:
        if ".." in text:
            span, _, step = text.partition(":")
            lo, hi = span.split("..")
            return list(range(int(lo), int(hi) + 1, int(step) if step else 1))
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad k range '{text}'") from exc


def _parse_bool(text):
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"expected a boolean, got '{text}'")


@dataclass
class RunConfig:
    input: str = None
    col_text: str = "reason"
    col_start: str = "start_date"
    col_end: str = "end_date"
    col_id: str = None
    date_format: str = None
    stopwords: str = None
    min_token_length: int = 3
    min_corpus_frequency: int = 5
    seed: int = 0
    k: int = None
    k_range: str = None
    sweep_folds: int = 10
    alpha: float = None
    beta: float = 0.1
    iterations: int = 1000
    burn_in: int = None
    fold_in_iterations: int = 100
    balance: str = "both_to_majority"
    paper_order: bool = False
    train_fraction: float = 0.7
    learners: tuple = LEARNERS
    bag_trees: int = 25
    forest_trees: int = 500
    mtry: int = 2
    min_leaf: int = 2
    max_depth: int = None
    cv_folds: int = 10
    cv_repeats: int = 5
    jobs: int = field(default=1, metadata={"affects_results": False})

    def set(self, key, value):
        """Set ``key`` from its text form; empty text resets optional keys to None."""
        key = key.strip().replace("-", "_")
        types = {f.name: f for f in fields(self)}
        if key not in types:
            raise ConfigError(f"unknown config key '{key}'")
        value = value.strip()
        default = types[key].default
        if value == "" or value.lower() == "none":
            setattr(self, key, None)
            return
        try:
            if key == "learners":
                parsed = tuple(v.strip() for v in value.split(",") if v.strip())
                bad = set(parsed) - set(LEARNERS)
                if bad:
                    raise ConfigError(f"unknown learners {sorted(bad)}")
            elif key in ("paper_order",):
                parsed = _parse_bool(value)
            elif key in ("alpha", "beta", "train_fraction"):
                parsed = float(value)
            elif isinstance(default, int) and not isinstance(default, bool) or key in (
                "k", "burn_in", "max_depth"
            ):
                parsed = int(value)
            else:
                parsed = value
        except ValueError as exc:
            raise ConfigError(f"bad value for '{key}': {value}") from exc
        setattr(self, key, parsed)

    def validate(self):
        if not self.input:
            raise ConfigError("config must name an 'input' CSV")
        if self.k is None and not self.k_range:
            raise ConfigError("config needs either 'k' or 'k_range'")
        if self.k_range:
            parse_k_range(self.k_range)
        try:
            sampling.BalanceStrategy(self.balance)
        except ValueError as exc:
            raise ConfigError(f"unknown balance strategy '{self.balance}'") from exc
        if not self.learners:
            raise ConfigError("no learners selected")
        return self

    def to_text(self, include_runtime=False):
        lines = []
        for f in fields(self):
            if not include_runtime and f.metadata.get("affects_results") is False:
                continue
            v = getattr(self, f.name)
            if isinstance(v, tuple):
                v = ",".join(v)
            elif isinstance(v, bool):
                v = "true" if v else "false"
            lines.append(f"{f.name} = {'' if v is None else v}")
        return "\n".join(lines) + "\n"

    def digest(self):
        return hashlib.sha256(self.to_text().encode("utf-8")).hexdigest()


def load_config(path, overrides=()):
    """Read a key-value config file; ``overrides`` are ``key=value`` strings
    applied afterwards. Relative ``input``/``stopwords`` paths resolve
    against the config file's directory."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#",))
    parser.optionxform = str
    try:
        parser.read_string("[run]\n" + text)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse config {path}: {exc}") from exc
    cfg = RunConfig()
    for key, value in parser["run"].items():
        cfg.set(key, value)
    for item in overrides:
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"override '{item}' is not key=value")
        cfg.set(key, value)
    base = Path(path).resolve().parent
    for key in ("input", "stopwords"):
        v = getattr(cfg, key)
        if v and not Path(v).is_absolute():
            setattr(cfg, key, str((base / v).resolve()))
    return cfg


def _write_json(path, obj):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=False)
        fh.write("\n")


def preprocess_config(cfg):
    stop = corpus.load_stopwords(cfg.stopwords) if cfg.stopwords else corpus.smart_stopwords()
    return corpus.PreprocessConfig(
        stopword_list=stop,
        min_token_length=cfg.min_token_length,
        min_corpus_frequency=cfg.min_corpus_frequency,
    )


class _Stages:
    def __init__(self):
        self.name = None

    def __call__(self, name):
        self.name = name
        logger.info("stage: %s", name)
        return self


def run_pipeline(cfg, out_dir):
    """Execute a full run into ``out_dir``; returns the metrics document."""
    cfg.validate()
    out = Path(out_dir)
    (out / "models").mkdir(parents=True, exist_ok=True)
    (out / "config.txt").write_text(cfg.to_text(), encoding="utf-8")
    stage = _Stages()
    try:
        return _run(cfg, out, stage)
    except (ConfigError, DataError) as exc:
        raise type(exc)(f"stage '{stage.name}': {exc}") from exc
    except Exception as exc:
        raise StageError(stage.name, exc) from exc


def _run(cfg, out, stage):
    seeds = {
        "master": cfg.seed,
        "sweep": derive_seed(cfg.seed, 1),
        "lda": derive_seed(cfg.seed, 2),
        "fold_in": derive_seed(cfg.seed, 3),
        "split": derive_seed(cfg.seed, 4),
        "learners": derive_seed(cfg.seed, 5),
        "cv": derive_seed(cfg.seed, 6),
    }

    stage("ingest")
    schema = {"text": cfg.col_text, "start": cfg.col_start, "end": cfg.col_end}
    if cfg.col_id:
        schema["id"] = cfg.col_id
    records, dropped = corpus.ingest_csv(cfg.input, schema, cfg.date_format)
    if not records:
        raise DataError("no usable rows in input")
    labels = [corpus.duration_days(r).cls for r in records]
    doc_ids = [r.id for r in records]

    stage("preprocess")
    pcfg = preprocess_config(cfg)
    docs = [corpus.preprocess(r.text, pcfg) for r in records]
    vocab = corpus.build_vocabulary(docs, pcfg)
    matrix = corpus.to_matrix(docs, vocab)
    n_short = sum(1 for c in labels if c == corpus.DurationClass.SHORT_LIVED)
    _write_json(out / "preprocess.json", {
        "format_version": 1,
        "kind": "preprocess_manifest",
        "config": pcfg.manifest(),
        "stopwords": sorted(pcfg.stopword_list),
        "records": len(records),
        "dropped_rows": dropped,
        "label_counts": {"short_lived": n_short, "extended": len(labels) - n_short},
        "vocab_size": vocab.size,
        "total_tokens": matrix.total_tokens,
        "empty_documents": int(matrix.empty_docs.sum()),
    })

    k = cfg.k
    hyper_template = lda.LdaHyperparams(
        K=2, alpha=cfg.alpha, beta=cfg.beta, train_iterations=cfg.iterations, burn_in=cfg.burn_in
    )
    if cfg.k_range:
        stage("topic_sweep")
        curve = model_selection.sweep_topics(
            matrix, parse_k_range(cfg.k_range), cfg.sweep_folds, hyper_template, seeds["sweep"],
            cfg.fold_in_iterations, alpha=cfg.alpha, jobs=cfg.jobs,
        )
        curve.write(out / "perplexity.csv", out / "perplexity.json")
        k = model_selection.select_k(curve)
        logger.info("selected K=%d", k)

    stage("lda")
    hyper = hyper_template.replace(K=k, alpha=cfg.alpha, seed=seeds["lda"])
    model = lda.fit_gibbs(matrix, hyper, vocab=vocab)
    _write_json(out / "lda_model.json", model.to_dict())
    summaries = lda.summarize_topics(model, top_n=min(10, vocab.size))
    _write_json(out / "topics.json", [
        {"topic": s.topic_id, "name": s.name, "top_words": [[t, p] for t, p in s.top_words]}
        for s in summaries
    ])

    stage("features")
    table = features.build_table(matrix, labels, model, cfg.fold_in_iterations, seeds["fold_in"],
                                 doc_ids=doc_ids, jobs=cfg.jobs)
    table.to_csv(out / "features.csv")

    stage("split")
    train, test, split_manifest = sampling.balance_and_split(
        table, cfg.balance, cfg.train_fraction, cfg.paper_order, seeds["split"]
    )
    train.to_csv(out / "train.csv")
    test.to_csv(out / "test.csv")
    _write_json(out / "split_manifest.json", split_manifest)

    stage("train")
    tree_cfg = trees.TreeConfig(cfg.min_leaf, cfg.max_depth)
    specs = {
        "single": evaluation.LearnerSpec(trees.EnsembleMode.SINGLE, config=tree_cfg),
        "bagged": evaluation.LearnerSpec(trees.EnsembleMode.BAGGED, cfg.bag_trees, config=tree_cfg),
        "forest": evaluation.LearnerSpec(trees.EnsembleMode.FOREST, cfg.forest_trees, cfg.mtry, tree_cfg),
    }
    fitted = {}
    for i, name in enumerate(cfg.learners):
        fitted[name] = specs[name].fit(train, derive_seed(seeds["learners"], i), cfg.jobs)
        _write_json(out / "models" / f"{name}.json", fitted[name].to_dict())

    stage("evaluate")
    holdout = {}
    for name, m in fitted.items():
        cm, rep = evaluation.evaluate_holdout(m, test)
        holdout[name] = (cm, rep)
    cv = {}
    if cfg.cv_repeats and cfg.cv_folds:
        for i, name in enumerate(cfg.learners):
            cv[name] = evaluation.cross_validate(
                train, specs[name], cfg.cv_folds, cfg.cv_repeats, derive_seed(seeds["cv"], i), cfg.jobs
            ).to_dict()
    metrics_doc = {
        "format_version": 1,
        "kind": "metric_report",
        "positive_class": "extended",
        "selected_k": k,
        "order": split_manifest["order"],
        "doc_id_overlap": split_manifest["doc_id_overlap"],
        "holdout": {
            name: {"confusion": {"tp": cm.tp, "fp": cm.fp, "tn": cm.tn, "fn": cm.fn}, "metrics": rep.as_dict()}
            for name, (cm, rep) in holdout.items()
        },
        "cross_validation": cv,
        "reference_values": evaluation.REFERENCE_VALUES,
    }
    _write_json(out / "metrics.json", metrics_doc)
    (out / "metrics.txt").write_text(
        evaluation.format_table({n: rep for n, (_, rep) in holdout.items()},
                                {n: evaluation.REFERENCE_VALUES[n] for n in holdout}),
        encoding="utf-8",
    )

    stage("manifest")
    from . import __version__, kernels

    _write_json(out / "manifest.json", {
        "format_version": 1,
        "kind": "run_manifest",
        "config_sha256": cfg.digest(),
        "config_file": "config.txt",
        "seeds": seeds,
        "selected_k": k,
        "fold_in_iterations": cfg.fold_in_iterations,
        "versions": {
            "protestdur": __version__,
            "python": platform.python_version(),
            "numpy": np.__version__,
        },
        "kernel_backend": kernels.BACKEND,
        "argv": sys.argv[1:],
    })
    return metrics_doc


# ----------------------------------------------------------------------
# prediction from a finished run


def predict_text(run_dir, text, learner=None):
    run = Path(run_dir)
    try:
        manifest = json.loads((run / "manifest.json").read_text(encoding="utf-8"))
        pre = json.loads((run / "preprocess.json").read_text(encoding="utf-8"))
        model = lda.LdaModel.from_dict(json.loads((run / "lda_model.json").read_text(encoding="utf-8")))
    except (OSError, ValueError, KeyError) as exc:
        raise DataError(f"{run} is not a complete run directory: {exc}") from exc
    if learner is None:
        available = [n for n in reversed(LEARNERS) if (run / "models" / f"{n}.json").exists()]
        if not available:
            raise DataError(f"no classifier models in {run / 'models'}")
        learner = available[0]
    path = run / "models" / f"{learner}.json"
    if not path.exists():
        raise DataError(f"no model for learner '{learner}' in {run / 'models'}")
    clf = trees.EnsembleModel.from_dict(json.loads(path.read_text(encoding="utf-8")))

    pc = pre["config"]
    pcfg = corpus.PreprocessConfig(
        lowercase=pc["lowercase"], strip_punctuation=pc["strip_punctuation"],
        strip_numbers=pc["strip_numbers"], stopword_list=frozenset(pre["stopwords"]),
        stem=pc["stem"], min_token_length=pc["min_token_length"],
        min_corpus_frequency=pc["min_corpus_frequency"],
    )
    tokens = corpus.preprocess(text, pcfg)
    row = corpus.to_matrix([tokens], model.vocab).rows[0]
    seed = manifest["seeds"]["fold_in"]
    mix = lda.infer_theta(model, row, manifest["fold_in_iterations"], lda.doc_seed(seed, row))
    names = {s.topic_id: s.name for s in lda.summarize_topics(model, 1)}
    top = features.top_topics(mix.theta)
    if mix.empty:
        counts = pre["label_counts"]
        cls = 1 if counts["extended"] > counts["short_lived"] else 0
        vote = None
    else:
        cls, vote = trees.predict(clf, top)
    return {
        "class": "extended" if cls == 1 else "short_lived",
        "vote_fraction": vote,
        "uninformative_input": bool(mix.empty),
        "top_topics": top,
        "top_topic_names": [names[t] for t in top],
        "learner": learner,
        "tokens_in_vocabulary": int(row[1].sum()),
    }
