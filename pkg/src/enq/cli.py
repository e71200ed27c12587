"""Single entry point wiring the pipeline subcommands.

Every subcommand is re-runnable: identical flags rewrite identical output
files, with no hidden state in between. Flags beat config-file values,
which beat built-in defaults.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import evaluation, features, kb, labeler, model, querylog, synthgen

EXIT_OK = 0
EXIT_UNEXPECTED = 1
EXIT_USAGE = 2
EXIT_FILE = 3
EXIT_DATA = 4

_EPILOG = """\
exit codes:
  0  success
  2  usage error (unknown subcommand, bad or missing flags)
  3  a referenced file or directory is missing or unreadable
  4  invalid data (malformed inputs, undersized datasets, bad model files)
  1  unexpected internal error
"""

_ALGO_ALIASES = {"linear": "linear", "svm": "linear",
                 "forest": "forest", "rf": "forest"}


def _read_config(path: str) -> dict[str, str]:
    values: dict[str, str] = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(),
                                  start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"config line {lineno}: expected key = value")
        key, _, value = line.partition("=")
        values[key.strip().replace("-", "_")] = value.strip().strip('"').strip("'")
    return values


class _Settings:
    """Flag > config file > fallback resolution."""

    def __init__(self, args: argparse.Namespace, config: dict[str, str]):
        self.args = args
        self.config = config

    def get(self, name: str, fallback, cast=str):
        value = getattr(self.args, name, None)
        if value is None and name in self.config:
            value = cast(self.config[name])
        if value is None:
            value = fallback
        return value

    @property
    def seed(self) -> int:
        value = getattr(self.args, "seed", None)
        if value is None and "seed" in self.config:
            value = int(self.config["seed"])
        if value is None:
            value = self.args.global_seed
        return 0 if value is None else int(value)

    @property
    def workers(self) -> int:
        value = self.args.workers
        if value is None and "workers" in self.config:
            value = int(self.config["workers"])
        if value is None:
            value = os.cpu_count() or 1
        return max(1, int(value))


def _normalization(settings: _Settings) -> querylog.NormalizationConfig:
    stopword_dir = settings.get("stopwords", None)
    if stopword_dir:
        return querylog.load_stopwords(stopword_dir)
    return querylog.default_config()


def _open_out(path: str):
    return open(path, "w", encoding="utf-8", newline="\n")


def _build_estimator(settings: _Settings):
    algo = _ALGO_ALIASES[settings.args.algo]
    if algo == "linear":
        return algo, model.LinearHingeClassifier(
            C=settings.get("c", 1.0, float),
            max_epochs=settings.get("epochs", 100, int),
            tol=settings.get("tolerance", 1e-6, float),
            seed=settings.seed)
    return algo, model.PresenceForestClassifier(
        n_trees=settings.get("trees", 20, int),
        max_depth=settings.get("max_depth", None, int),
        seed=settings.seed)


def _load_labeled_vectors(features_path: str, dataset_path: str):
    """Join the features file to the dataset file on joined terms."""
    with open(features_path, encoding="utf-8") as handle:
        by_terms = dict(features.read_features(handle))
    with open(dataset_path, encoding="utf-8") as handle:
        examples = list(labeler.read_dataset(handle))
    vectors, labels = [], []
    for example in examples:
        key = tuple(example.query.terms)
        if key not in by_terms:
            raise ValueError(f"no feature row for query {example.query.joined()!r}")
        vectors.append(by_terms[key])
        labels.append(example.label)
    return vectors, labels, examples


# --- subcommand handlers ---

def _cmd_ingest(settings: _Settings) -> int:
    args = settings.args
    config = _normalization(settings)
    with open(args.log, encoding="utf-8") as handle:
        records, malformed = querylog.parse_log(handle)
    rows = []
    dropped = 0
    for record in records:
        query = querylog.normalize(record.query, config)
        if not query.terms:
            dropped += 1
            continue
        rows.append((query, record.hostname, record.count))
    with _open_out(args.out) as out:
        written = querylog.write_normalized(rows, out)
    print(f"records={len(records)} malformed={malformed} "
          f"dropped-empty={dropped} written={written}")
    return EXIT_OK


def _cmd_label(settings: _Settings) -> int:
    args = settings.args
    config = labeler.LabelingConfig(
        min_positive_ratio=settings.get("tau_e", 1.0, float),
        max_negative_ratio=settings.get("tau_ne", 0.0, float),
        min_wiki_clicks=settings.get("min_clicks", 3, int),
        seed=settings.seed)
    with open(getattr(args, "in"), encoding="utf-8") as handle:
        profiles = labeler.aggregate(querylog.read_normalized(handle))
    dataset = labeler.build_dataset(profiles, config)
    with _open_out(args.out) as out:
        labeler.write_dataset(dataset, out)
    _, _, unlabeled = labeler.split_pools(profiles, config)
    side_path = f"{args.out}.unlabeled"
    with _open_out(side_path) as out:
        for profile in unlabeled:
            out.write(f"{profile.query.joined()}\t{profile.wiki_clicks}\t"
                      f"{profile.other_clicks}\n")
    positives = sum(1 for ex in dataset if ex.label == labeler.LABEL_ENCYCLOPEDIC)
    print(f"profiles={len(profiles)} examples={len(dataset)} "
          f"positives={positives} negatives={len(dataset) - positives} "
          f"unlabeled={len(unlabeled)}")
    return EXIT_OK


def _cmd_extract(settings: _Settings) -> int:
    args = settings.args
    snapshot = kb.load_snapshot(args.snapshot)
    with open(args.dataset, encoding="utf-8") as handle:
        examples = list(labeler.read_dataset(handle))
    queries = [example.query for example in examples]
    vectors = features.extract_many(queries, snapshot, workers=settings.workers)
    with _open_out(args.out) as out:
        features.write_features(zip(queries, vectors), out)
    print(f"queries={len(queries)} "
          f"distinct-features={len(set().union(*vectors)) if vectors else 0}")
    return EXIT_OK


def _cmd_train(settings: _Settings) -> int:
    args = settings.args
    vectors, labels, _ = _load_labeled_vectors(args.features, args.dataset)
    algo, estimator = _build_estimator(settings)
    estimator.fit(vectors, labels)
    model.save_model(estimator, args.out)
    print(f"algo={algo} examples={len(vectors)} "
          f"features={len(estimator.dictionary_)} out={args.out}")
    return EXIT_OK


def _cmd_predict(settings: _Settings) -> int:
    args = settings.args
    estimator = model.load_model(args.model)
    snapshot = kb.load_snapshot(args.snapshot)
    query = querylog.normalize(args.query, _normalization(settings))
    if not query.terms:
        raise ValueError("query normalizes to nothing")
    vector = features.extract(query, snapshot)
    print(estimator.predict([vector])[0])
    return EXIT_OK


def _format_report(report: evaluation.EvalReport, header: str) -> str:
    lines = [header]
    lines.append(f"  {'metric':<12}{'fold mean':>12}{'pooled':>12}")
    for name in ("accuracy", "precision", "recall", "f1"):
        fold = getattr(report, name)
        pooled = getattr(report.pooled, name)
        lines.append(f"  {name:<12}{fold:>12.4f}{pooled:>12.4f}")
    return "\n".join(lines)


def _cmd_evaluate(settings: _Settings) -> int:
    args = settings.args
    vectors, labels, _ = _load_labeled_vectors(args.features, args.dataset)
    algo, estimator = _build_estimator(settings)
    folds = settings.get("folds", 10, int)
    report = evaluation.cross_validate(vectors, labels, estimator, k=folds,
                                       seed=settings.seed,
                                       workers=settings.workers)
    print(_format_report(report, f"{algo} {folds}-fold cross-validation "
                                 f"over {len(vectors)} examples"))
    if args.out:
        with _open_out(args.out) as out:
            evaluation.write_report(report, out, extra={
                "algo": algo, "folds": folds, "seed": settings.seed,
                "examples": len(vectors)})
    return EXIT_OK


def _cmd_ablate(settings: _Settings) -> int:
    args = settings.args
    vectors, labels, _ = _load_labeled_vectors(args.features, args.dataset)
    algo, estimator = _build_estimator(settings)
    folds = settings.get("folds", 10, int)
    baseline = evaluation.cross_validate(vectors, labels, estimator, k=folds,
                                         seed=settings.seed,
                                         workers=settings.workers)
    groups = features.FEATURE_GROUPS if args.group in (None, "all") \
        else (args.group,)
    rows = [evaluation.ablate(vectors, labels, group, estimator, baseline,
                              k=folds, seed=settings.seed,
                              workers=settings.workers)
            for group in groups]
    print(f"{algo} ablation, full-feature f1={baseline.f1:.4f}")
    print(f"  {'removed group':<16}{'affected':>9}{'acc':>9}{'prec':>9}"
          f"{'rec':>9}{'f1':>9}")
    for row in rows:
        print(f"  {row.removed_group:<16}{row.affected_queries:>9}"
              f"{row.accuracy_diff:>+9.4f}{row.precision_diff:>+9.4f}"
              f"{row.recall_diff:>+9.4f}{row.f1_diff:>+9.4f}")
    if args.out:
        with _open_out(args.out) as out:
            evaluation.write_ablation(rows, out)
    return EXIT_OK


def _cmd_baseline(settings: _Settings) -> int:
    args = settings.args
    with open(args.serp, encoding="utf-8") as handle:
        serps = list(evaluation.read_serp(handle))
    with open(args.dataset, encoding="utf-8") as handle:
        examples = list(labeler.read_dataset(handle))
    scores, matrix, missing = evaluation.evaluate_baseline(serps, examples)
    print(f"rank-1 baseline over {matrix.total} queries "
          f"({missing} without cached results)")
    for name in ("accuracy", "precision", "recall", "f1"):
        print(f"  {name:<12}{getattr(scores, name):>12.4f}")
    if args.out:
        with _open_out(args.out) as out:
            out.write(f"examples\t{matrix.total}\n")
            out.write(f"missing\t{missing}\n")
            for name in ("accuracy", "precision", "recall", "f1"):
                out.write(f"{name}\t{getattr(scores, name)!r}\n")
    return EXIT_OK


def _cmd_synth(settings: _Settings) -> int:
    args = settings.args
    config = synthgen.SynthConfig(
        seed=settings.seed,
        n_encyclopedic=settings.get("enc", 200, int),
        n_other=settings.get("other", 200, int),
        n_mixed=settings.get("mixed", 50, int),
        kb_vocab_size=settings.get("vocab", 240, int))
    manifest = synthgen.generate(config, args.out)
    for name in sorted(manifest):
        print(f"{name}\t{manifest[name]}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="enq",
        description="Encyclopedic-intent query classification pipeline.",
        epilog=_EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--config", help="key=value defaults file")
    parser.add_argument("--workers", type=int, default=None,
                        help="parallelism bound (default: processor count)")
    parser.add_argument("--seed", dest="global_seed", type=int, default=None,
                        help="fallback seed for subcommands that take one")
    sub = parser.add_subparsers(dest="command", metavar="command", required=True)

    p = sub.add_parser("ingest", help="parse a click log into normalized records")
    p.add_argument("--log", required=True)
    p.add_argument("--stopwords", help="directory of <lang>.txt stopword files")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_ingest)

    p = sub.add_parser("label", help="build a balanced labeled dataset")
    p.add_argument("--in", required=True)
    p.add_argument("--tau-e", dest="tau_e", type=float, default=None,
                   help="lowest Wikipedia click ratio labeled encyclopedic (1.0)")
    p.add_argument("--tau-ne", dest="tau_ne", type=float, default=None,
                   help="highest ratio labeled non-encyclopedic (0.0)")
    p.add_argument("--min-clicks", dest="min_clicks", type=int, default=None,
                   help="minimum Wikipedia clicks for positives (3)")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_label)

    p = sub.add_parser("extract", help="project a dataset into feature vectors")
    p.add_argument("--dataset", required=True)
    p.add_argument("--snapshot", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_extract)

    def add_model_flags(p, with_folds=False):
        p.add_argument("--algo", choices=sorted(_ALGO_ALIASES), default="forest")
        p.add_argument("--trees", type=int, default=None, help="forest size (20)")
        p.add_argument("--max-depth", dest="max_depth", type=int, default=None)
        p.add_argument("--c", type=float, default=None,
                       help="linear hinge penalty (1.0)")
        p.add_argument("--epochs", type=int, default=None,
                       help="linear training epoch cap (100)")
        p.add_argument("--tolerance", type=float, default=None,
                       help="linear objective-improvement stop (1e-6)")
        if with_folds:
            p.add_argument("--folds", type=int, default=None,
                           help="cross-validation folds (10)")
        p.add_argument("--seed", type=int, default=None)

    p = sub.add_parser("train", help="fit a classifier and save it")
    p.add_argument("--features", required=True)
    p.add_argument("--dataset", required=True,
                   help="dataset TSV supplying the labels")
    add_model_flags(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("predict", help="classify one query string")
    p.add_argument("--model", required=True)
    p.add_argument("--query", required=True)
    p.add_argument("--snapshot", required=True)
    p.add_argument("--stopwords")
    p.set_defaults(func=_cmd_predict)

    p = sub.add_parser("evaluate", help="cross-validate a classifier")
    p.add_argument("--features", required=True)
    p.add_argument("--dataset", required=True)
    add_model_flags(p, with_folds=True)
    p.add_argument("--out", help="write metric TAB value report")
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("ablate", help="measure each feature group's impact")
    p.add_argument("--features", required=True)
    p.add_argument("--dataset", required=True)
    add_model_flags(p, with_folds=True)
    p.add_argument("--group", help="one group name, or 'all' (default)")
    p.add_argument("--out", help="write the ablation table as TSV")
    p.set_defaults(func=_cmd_ablate)

    p = sub.add_parser("baseline", help="score the cached-SERP rank-1 rule")
    p.add_argument("--serp", required=True)
    p.add_argument("--dataset", required=True)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_baseline)

    p = sub.add_parser("synth", help="generate a synthetic corpus and snapshot")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--enc", type=int, default=None,
                   help="encyclopedic query count (200)")
    p.add_argument("--other", type=int, default=None,
                   help="non-encyclopedic query count (200)")
    p.add_argument("--mixed", type=int, default=None,
                   help="mid-ratio query count (50)")
    p.add_argument("--vocab", type=int, default=None,
                   help="generated vocabulary size (240)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_synth)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    try:
        config = _read_config(args.config) if args.config else {}
        settings = _Settings(args, config)
        return args.func(settings)
    except (FileNotFoundError, IsADirectoryError, NotADirectoryError,
            PermissionError) as exc:
        print(f"enq: {exc}", file=sys.stderr)
        return EXIT_FILE
    except ValueError as exc:
        print(f"enq: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"enq: {exc}", file=sys.stderr)
        return EXIT_FILE
    except Exception as exc:  # pragma: no cover - last-resort diagnostics
        print(f"enq: unexpected error: {exc}", file=sys.stderr)
        return EXIT_UNEXPECTED


if __name__ == "__main__":
    sys.exit(main())
