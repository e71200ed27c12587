"""Cross-validation, metrics, feature-group ablation, and the SERP baseline.

Folds come from a seeded shuffle followed by contiguous near-equal splits,
so the same seed always reproduces the same experiment. Reported metrics
are the unweighted mean over folds; a pooled-matrix variant is kept
alongside for transparency.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
import random
from typing import IO, Iterable, Iterator, Sequence

from sklearn.base import clone

from .features import FEATURE_GROUPS, FeatureVector, group_of
from .labeler import LABEL_ENCYCLOPEDIC, LABEL_OTHER


@dataclass(frozen=True)
class ConfusionMatrix:
    """Binary counts with the encyclopedic class as positive."""

    tp: int = 0
    fp: int = 0
    tn: int = 0
    fn: int = 0

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    def __add__(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        return ConfusionMatrix(self.tp + other.tp, self.fp + other.fp,
                               self.tn + other.tn, self.fn + other.fn)


@dataclass(frozen=True)
class MetricSet:
    accuracy: float
    precision: float
    recall: float
    f1: float


def metrics(matrix: ConfusionMatrix) -> MetricSet:
    """Accuracy, precision, recall, and F1.

    Precision and recall fall back to 0 when their denominator is empty,
    which keeps F1 total.
    """
    total = matrix.total
    if total == 0:
        raise ValueError("empty confusion matrix")
    accuracy = (matrix.tp + matrix.tn) / total
    predicted_pos = matrix.tp + matrix.fp
    actual_pos = matrix.tp + matrix.fn
    precision = matrix.tp / predicted_pos if predicted_pos else 0.0
    recall = matrix.tp / actual_pos if actual_pos else 0.0
    f1 = (2.0 * precision * recall / (precision + recall)
          if precision + recall > 0 else 0.0)
    return MetricSet(accuracy=accuracy, precision=precision,
                     recall=recall, f1=f1)


def confusion(truth: Sequence[str], predicted: Sequence[str]) -> ConfusionMatrix:
    if len(truth) != len(predicted):
        raise ValueError("prediction length mismatch")
    tp = fp = tn = fn = 0
    for actual, guess in zip(truth, predicted):
        if actual == LABEL_ENCYCLOPEDIC:
            if guess == LABEL_ENCYCLOPEDIC:
                tp += 1
            else:
                fn += 1
        else:
            if guess == LABEL_ENCYCLOPEDIC:
                fp += 1
            else:
                tn += 1
    return ConfusionMatrix(tp=tp, fp=fp, tn=tn, fn=fn)


def kfold(items: Sequence, k: int = 10, seed: int = 0) -> list[tuple[list, list]]:
    """Seeded shuffle, then k contiguous near-equal folds.

    The first ``len(items) % k`` folds take one extra item. Every item lands
    in exactly one test split.
    """
    if k < 2:
        raise ValueError("k must be at least 2")
    if len(items) < k:
        raise ValueError(f"dataset of {len(items)} is smaller than k={k}")
    shuffled = list(items)
    random.Random(seed).shuffle(shuffled)
    n = len(shuffled)
    base, extra = divmod(n, k)
    splits = []
    start = 0
    for fold in range(k):
        size = base + (1 if fold < extra else 0)
        test = shuffled[start:start + size]
        train = shuffled[:start] + shuffled[start + size:]
        splits.append((train, test))
        start += size
    return splits


@dataclass(frozen=True)
class EvalReport:
    """Fold-averaged metrics plus the per-fold matrices behind them."""

    accuracy: float
    precision: float
    recall: float
    f1: float
    fold_matrices: tuple[ConfusionMatrix, ...]
    averaging: str = "fold-mean"
    pooled: MetricSet | None = None


def _run_fold(args) -> ConfusionMatrix:
    estimator, train, test = args
    model = clone(estimator)
    model.fit([vector for vector, _ in train], [lab for _, lab in train])
    predicted = model.predict([vector for vector, _ in test])
    return confusion([lab for _, lab in test], predicted)


def cross_validate(vectors: Sequence[FeatureVector], labels: Sequence[str],
                   estimator, k: int = 10, seed: int = 0,
                   workers: int = 1) -> EvalReport:
    """k-fold cross-validation of an unfitted estimator prototype.

    Each fold trains a fresh clone, so feature dictionaries are rebuilt from
    the fold's training split only. Folds are independent; with more than
    one worker they run in separate processes and are collected in fold
    order, so the report does not depend on scheduling.
    """
    if len(vectors) != len(labels):
        raise ValueError("vectors and labels differ in length")
    splits = kfold(list(zip(vectors, labels)), k=k, seed=seed)
    jobs = [(estimator, train, test) for train, test in splits]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            matrices = list(pool.map(_run_fold, jobs))
    else:
        matrices = [_run_fold(job) for job in jobs]
    per_fold = [metrics(m) for m in matrices]
    mean = lambda values: sum(values) / len(values)
    pooled_matrix = ConfusionMatrix()
    for m in matrices:
        pooled_matrix = pooled_matrix + m
    return EvalReport(
        accuracy=mean([m.accuracy for m in per_fold]),
        precision=mean([m.precision for m in per_fold]),
        recall=mean([m.recall for m in per_fold]),
        f1=mean([m.f1 for m in per_fold]),
        fold_matrices=tuple(matrices),
        pooled=metrics(pooled_matrix),
    )


@dataclass(frozen=True)
class AblationRow:
    """Metric shifts after stripping one feature group."""

    removed_group: str
    affected_queries: int
    accuracy_diff: float
    precision_diff: float
    recall_diff: float
    f1_diff: float


def strip_group(vectors: Iterable[FeatureVector], group: str) -> list[FeatureVector]:
    if group not in FEATURE_GROUPS:
        raise ValueError(f"unknown feature group {group!r}")
    return [frozenset(name for name in vector if group_of(name) != group)
            for vector in vectors]


def ablate(vectors: Sequence[FeatureVector], labels: Sequence[str], group: str,
           estimator, baseline: EvalReport, k: int = 10, seed: int = 0,
           workers: int = 1) -> AblationRow:
    """Re-run the identical cross-validation without one feature group.

    The baseline must come from the same vectors, estimator, k, and seed.
    Dictionaries are rebuilt inside each fold, so removed features cannot
    linger as dead indices.
    """
    affected = sum(1 for vector in vectors
                   if any(group_of(name) == group for name in vector))
    stripped = strip_group(vectors, group)
    report = cross_validate(stripped, labels, estimator, k=k, seed=seed,
                            workers=workers)
    return AblationRow(
        removed_group=group,
        affected_queries=affected,
        accuracy_diff=report.accuracy - baseline.accuracy,
        precision_diff=report.precision - baseline.precision,
        recall_diff=report.recall - baseline.recall,
        f1_diff=report.f1 - baseline.f1,
    )


@dataclass(frozen=True)
class SerpRecord:
    """Cached search results: normalized query terms and ranked hostnames."""

    terms: tuple[str, ...]
    ranked_hosts: tuple[str, ...]


def baseline_classify(serp: SerpRecord) -> str:
    """Encyclopedic iff the first-ranked hostname is a Wikipedia host."""
    if not serp.ranked_hosts:
        raise ValueError("SERP record has no hosts")
    first = serp.ranked_hosts[0].lower()
    if first == "wikipedia.org" or first.endswith(".wikipedia.org"):
        return LABEL_ENCYCLOPEDIC
    return LABEL_OTHER


def read_serp(lines: Iterable[str]) -> Iterator[SerpRecord]:
    for lineno, line in enumerate(lines, start=1):
        line = line.rstrip("\n")
        if not line:
            continue
        fields = line.split("\t")
        if len(fields) != 2:
            raise ValueError(f"SERP line {lineno}: expected 2 fields")
        joined, hosts = fields
        ranked = tuple(h.strip() for h in hosts.split(",") if h.strip())
        if not ranked:
            raise ValueError(f"SERP line {lineno}: no hosts")
        yield SerpRecord(terms=tuple(joined.split()), ranked_hosts=ranked)


def evaluate_baseline(serps: Iterable[SerpRecord],
                      examples: Iterable) -> tuple[MetricSet, ConfusionMatrix, int]:
    """Score the rank-1 rule against dataset labels, joining on terms.

    Returns the metrics, the confusion matrix, and how many dataset queries
    had no cached SERP (those are skipped).
    """
    by_terms = {serp.terms: serp for serp in serps}
    truth, predicted = [], []
    missing = 0
    for example in examples:
        serp = by_terms.get(tuple(example.query.terms))
        if serp is None:
            missing += 1
            continue
        truth.append(example.label)
        predicted.append(baseline_classify(serp))
    matrix = confusion(truth, predicted)
    return metrics(matrix), matrix, missing


# --- report files ---

def report_lines(report: EvalReport, extra: dict | None = None) -> list[str]:
    """metric TAB value lines; floats in repr form so files are stable."""
    lines = []
    for key, value in (extra or {}).items():
        lines.append(f"{key}\t{value}")
    lines.append(f"averaging\t{report.averaging}")
    for name in ("accuracy", "precision", "recall", "f1"):
        lines.append(f"{name}\t{getattr(report, name)!r}")
    if report.pooled is not None:
        for name in ("accuracy", "precision", "recall", "f1"):
            lines.append(f"pooled_{name}\t{getattr(report.pooled, name)!r}")
    return lines


def write_report(report: EvalReport, out: IO[str], extra: dict | None = None):
    for line in report_lines(report, extra):
        out.write(line + "\n")


def write_ablation(rows: Iterable[AblationRow], out: IO[str]):
    """Table-shaped TSV: group, affected queries, four metric deltas."""
    for row in rows:
        out.write(f"{row.removed_group}\t{row.affected_queries}\t"
                  f"{row.accuracy_diff!r}\t{row.precision_diff!r}\t"
                  f"{row.recall_diff!r}\t{row.f1_diff!r}\n")
