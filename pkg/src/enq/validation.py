"""Input checks shared by the estimators and the evaluation harness."""

from __future__ import annotations

from typing import Iterable, Sequence

from .labeler import LABELS


class DegenerateTrainingError(ValueError):
    """Raised when training data cannot support a two-class model."""


def as_vectors(X: Iterable[Iterable[str]]) -> list[frozenset[str]]:
    """Coerce feature-name iterables to frozensets, rejecting non-strings."""
    vectors = []
    for row in X:
        vector = frozenset(row)
        if any(not isinstance(name, str) for name in vector):
            raise TypeError("feature names must be strings")
        vectors.append(vector)
    return vectors


def check_labels(y: Sequence[str]) -> list[str]:
    labels = list(y)
    unknown = set(labels) - set(LABELS)
    if unknown:
        raise ValueError(f"unknown labels: {sorted(unknown)}")
    return labels


def check_training_data(X: Iterable[Iterable[str]],
                        y: Sequence[str]) -> tuple[list[frozenset[str]], list[str]]:
    """Validate a training split: aligned, non-empty, both classes present."""
    vectors = as_vectors(X)
    labels = check_labels(y)
    if len(vectors) != len(labels):
        raise ValueError(f"{len(vectors)} vectors but {len(labels)} labels")
    if not vectors:
        raise DegenerateTrainingError("empty training set")
    if len(set(labels)) < 2:
        raise DegenerateTrainingError("training set contains a single class")
    return vectors, labels
