"""Linear and forest classifiers over sparse binary feature vectors.

Both estimators follow the scikit-learn fit/predict conventions but take X
as a sequence of feature-name collections; a frozen per-fit
FeatureDictionary maps names to dense indices and silently drops names
unseen at training time. Both are deterministic given their seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Iterable, Sequence

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin

from .labeler import LABEL_ENCYCLOPEDIC, LABEL_OTHER
from .validation import as_vectors, check_training_data

_MIN_LEARNING_RATE = 1e-12


class FeatureDictionary:
    """Frozen bijection between feature names and contiguous indices."""

    def __init__(self, names: Iterable[str]):
        self.names = tuple(sorted(set(names)))
        self.index = {name: i for i, name in enumerate(self.names)}

    @classmethod
    def from_vectors(cls, vectors: Iterable[Iterable[str]]) -> "FeatureDictionary":
        seen = set()
        for vector in vectors:
            seen.update(vector)
        return cls(seen)

    def __len__(self) -> int:
        return len(self.names)

    def encode_indices(self, vector: Iterable[str]) -> np.ndarray:
        """Active dictionary indices for a vector; unknown names drop out."""
        found = {self.index[name] for name in vector if name in self.index}
        return np.fromiter(sorted(found), dtype=np.intp, count=len(found))

    def encode_matrix(self, vectors: Sequence[Iterable[str]]) -> np.ndarray:
        matrix = np.zeros((len(vectors), len(self.names)), dtype=bool)
        for row, vector in enumerate(vectors):
            matrix[row, self.encode_indices(vector)] = True
        return matrix


def _signs(labels: Sequence[str]) -> np.ndarray:
    return np.array([1.0 if lab == LABEL_ENCYCLOPEDIC else -1.0 for lab in labels])


class LinearHingeClassifier(BaseEstimator, ClassifierMixin):
    """Max-margin linear classifier trained by per-example subgradient steps.

    Minimizes 0.5*||w||^2 + C * sum(hinge). Each epoch visits the examples
    in a fresh seed-derived order; an epoch that fails to lower the
    objective is rolled back and the step size halved, so the recorded
    per-epoch objective never increases. Training stops once an epoch
    improves the objective by less than ``tol`` (or at ``max_epochs``).
    """

    def __init__(self, C: float = 1.0, max_epochs: int = 100, tol: float = 1e-6,
                 learning_rate: float = 1.0, seed: int = 0):
        self.C = C
        self.max_epochs = max_epochs
        self.tol = tol
        self.learning_rate = learning_rate
        self.seed = seed

    def fit(self, X, y):
        if self.C <= 0:
            raise ValueError("C must be positive")
        vectors, labels = check_training_data(X, y)
        self.dictionary_ = FeatureDictionary.from_vectors(vectors)
        rows = [self.dictionary_.encode_indices(v) for v in vectors]
        signs = _signs(labels)
        n = len(rows)
        dim = len(self.dictionary_)
        rng = np.random.default_rng(self.seed)

        weights = np.zeros(dim)
        bias = 0.0

        def objective(w: np.ndarray, b: float) -> float:
            scores = np.array([w[idx].sum() for idx in rows]) + b
            hinge = np.maximum(0.0, 1.0 - signs * scores).sum()
            return 0.5 * float(w @ w) + self.C * hinge

        history = [objective(weights, bias)]
        eta = float(self.learning_rate)
        for _ in range(self.max_epochs):
            order = rng.permutation(n)
            saved_weights = weights.copy()
            saved_bias = bias
            shrink = 1.0 - eta / n
            for i in order:
                idx = rows[i]
                sign = signs[i]
                margin = sign * (weights[idx].sum() + bias)
                weights *= shrink
                if margin < 1.0:
                    weights[idx] += eta * self.C * sign
                    bias += eta * self.C * sign
            value = objective(weights, bias)
            if value <= history[-1]:
                gain = history[-1] - value
                history.append(value)
                if gain < self.tol:
                    break
            else:
                weights = saved_weights
                bias = saved_bias
                eta *= 0.5
                if eta < _MIN_LEARNING_RATE:
                    break
        self.weights_ = weights
        self.bias_ = bias
        self.objective_history_ = history
        self.classes_ = np.array([LABEL_ENCYCLOPEDIC, LABEL_OTHER])
        return self

    def decision_function(self, X) -> np.ndarray:
        vectors = as_vectors(X)
        return np.array([self.weights_[self.dictionary_.encode_indices(v)].sum()
                         + self.bias_ for v in vectors])

    def predict(self, X) -> list[str]:
        """Positive score means encyclopedic; ties go to the negative class."""
        return [LABEL_ENCYCLOPEDIC if score > 0.0 else LABEL_OTHER
                for score in self.decision_function(X)]


@dataclass
class TreeNode:
    """Binary presence-test node; ``feature < 0`` marks a leaf."""

    feature: int = -1
    label: str | None = None
    absent: "TreeNode | None" = None
    present: "TreeNode | None" = None

    @property
    def is_leaf(self) -> bool:
        return self.feature < 0


def _majority(positives: int, total: int) -> str:
    return LABEL_ENCYCLOPEDIC if positives * 2 > total else LABEL_OTHER


def _grow_tree(matrix: np.ndarray, positive: np.ndarray, rng: np.random.Generator,
               max_depth: int | None, n_candidates: int, depth: int = 0) -> TreeNode:
    n, dim = matrix.shape
    n_pos = int(positive.sum())
    if n_pos in (0, n) or dim == 0 or (max_depth is not None and depth >= max_depth):
        return TreeNode(label=_majority(n_pos, n))

    # Walk a fresh feature permutation until n_candidates splittable
    # features have been scored; constants are skipped, so a split is found
    # whenever one exists at all.
    order = rng.permutation(dim)
    best_feature = -1
    best_impurity = math.inf
    scored = 0
    block_size = max(32, n_candidates)
    for start in range(0, dim, block_size):
        block = order[start:start + block_size]
        counts = matrix[:, block].sum(axis=0)
        pos_counts = matrix[positive][:, block].sum(axis=0)
        for offset, feature in enumerate(block):
            n_present = int(counts[offset])
            if n_present == 0 or n_present == n:
                continue
            pos_present = int(pos_counts[offset])
            n_absent = n - n_present
            pos_absent = n_pos - pos_present
            impurity = (n_present * _gini(pos_present, n_present)
                        + n_absent * _gini(pos_absent, n_absent)) / n
            if impurity < best_impurity:
                best_impurity = impurity
                best_feature = int(feature)
            scored += 1
            if scored >= n_candidates:
                break
        if scored >= n_candidates:
            break
    if best_feature < 0:
        return TreeNode(label=_majority(n_pos, n))

    mask = matrix[:, best_feature]
    absent = _grow_tree(matrix[~mask], positive[~mask], rng, max_depth,
                        n_candidates, depth + 1)
    present = _grow_tree(matrix[mask], positive[mask], rng, max_depth,
                         n_candidates, depth + 1)
    return TreeNode(feature=best_feature, absent=absent, present=present)


def _gini(positives: int, total: int) -> float:
    p = positives / total
    return 2.0 * p * (1.0 - p)


def _tree_predict(node: TreeNode, active: set[int]) -> str:
    while not node.is_leaf:
        node = node.present if node.feature in active else node.absent
    return node.label


class PresenceForestClassifier(BaseEstimator, ClassifierMixin):
    """Random forest of presence-test trees over binary features.

    Each tree grows on a bootstrap sample of the training set, choosing at
    every node the Gini-minimizing split among ceil(sqrt(d)) candidate
    features drawn from a per-node permutation, until leaves are pure (or
    ``max_depth`` is hit). Per-tree seeds derive from the master seed, so a
    forest is reproducible however the trees are scheduled.
    """

    def __init__(self, n_trees: int = 20, max_depth: int | None = None,
                 seed: int = 0):
        self.n_trees = n_trees
        self.max_depth = max_depth
        self.seed = seed

    def fit(self, X, y):
        if self.n_trees < 1:
            raise ValueError("n_trees must be at least 1")
        vectors, labels = check_training_data(X, y)
        self.dictionary_ = FeatureDictionary.from_vectors(vectors)
        matrix = self.dictionary_.encode_matrix(vectors)
        positive = np.array([lab == LABEL_ENCYCLOPEDIC for lab in labels])
        n, dim = matrix.shape
        n_candidates = max(1, math.isqrt(dim - 1) + 1) if dim else 1

        self.trees_ = []
        self.bootstrap_indices_ = []
        for seq in np.random.SeedSequence(self.seed).spawn(self.n_trees):
            rng = np.random.default_rng(seq)
            sample = rng.integers(0, n, size=n)
            tree = _grow_tree(matrix[sample], positive[sample], rng,
                              self.max_depth, n_candidates)
            self.trees_.append(tree)
            self.bootstrap_indices_.append(sample)
        self.classes_ = np.array([LABEL_ENCYCLOPEDIC, LABEL_OTHER])
        return self

    def predict(self, X) -> list[str]:
        """Majority vote across trees; an exact tie goes to the negative class."""
        vectors = as_vectors(X)
        labels = []
        for vector in vectors:
            active = set(self.dictionary_.encode_indices(vector).tolist())
            votes = sum(_tree_predict(tree, active) == LABEL_ENCYCLOPEDIC
                        for tree in self.trees_)
            labels.append(LABEL_ENCYCLOPEDIC if 2 * votes > len(self.trees_)
                          else LABEL_OTHER)
        return labels


# --- model file: versioned header, feature dictionary, model body ---

_MODEL_MAGIC = "enq-model"
_MODEL_VERSION = "v1"


def save_model(estimator, out: IO[str] | str | Path):
    if isinstance(out, (str, Path)):
        with open(out, "w", encoding="utf-8", newline="\n") as handle:
            save_model(estimator, handle)
        return
    if isinstance(estimator, LinearHingeClassifier):
        kind = "linear"
    elif isinstance(estimator, PresenceForestClassifier):
        kind = "forest"
    else:
        raise TypeError(f"cannot serialize {type(estimator).__name__}")
    names = estimator.dictionary_.names
    out.write(f"{_MODEL_MAGIC} {_MODEL_VERSION} {kind}\n")
    out.write(f"features {len(names)}\n")
    for i, name in enumerate(names):
        out.write(f"{i}\t{name}\n")
    if kind == "linear":
        out.write(f"weights {len(names)}\n")
        for i, value in enumerate(estimator.weights_):
            out.write(f"{i}\t{float(value)!r}\n")
        out.write(f"bias\t{float(estimator.bias_)!r}\n")
    else:
        out.write(f"trees {len(estimator.trees_)}\n")
        for tree in estimator.trees_:
            nodes = _preorder(tree)
            out.write(f"tree\t{len(nodes)}\n")
            for node in nodes:
                if node.is_leaf:
                    out.write(f"leaf\t{node.label}\n")
                else:
                    out.write(f"split\t{node.feature}\n")


def _preorder(root: TreeNode) -> list[TreeNode]:
    nodes = []
    stack = [root]
    while stack:
        node = stack.pop()
        nodes.append(node)
        if not node.is_leaf:
            stack.append(node.present)
            stack.append(node.absent)
    return nodes


def load_model(source: IO[str] | str | Path):
    if isinstance(source, (str, Path)):
        with open(source, "r", encoding="utf-8") as handle:
            return load_model(handle)
    lines = source.read().splitlines()
    cursor = 0

    def next_line() -> str:
        nonlocal cursor
        if cursor >= len(lines):
            raise ValueError("truncated model file")
        line = lines[cursor]
        cursor += 1
        return line

    header = next_line().split()
    if len(header) != 3 or header[0] != _MODEL_MAGIC or header[1] != _MODEL_VERSION:
        raise ValueError("not a recognized model file")
    kind = header[2]
    if kind not in ("linear", "forest"):
        raise ValueError(f"unknown model kind {kind!r}")

    tag, count = next_line().split()
    if tag != "features":
        raise ValueError("expected feature dictionary")
    names = []
    for i in range(int(count)):
        index, name = next_line().split("\t", 1)
        if int(index) != i:
            raise ValueError(f"feature index {index} out of order")
        names.append(name)
    dictionary = FeatureDictionary(names)
    if dictionary.names != tuple(names):
        raise ValueError("feature dictionary is not sorted and unique")

    if kind == "linear":
        tag, count = next_line().split()
        if tag != "weights" or int(count) != len(names):
            raise ValueError("weight section does not match dictionary")
        weights = np.zeros(len(names))
        for i in range(len(names)):
            index, value = next_line().split("\t", 1)
            weights[int(index)] = float(value)
        tag, value = next_line().split("\t", 1)
        if tag != "bias":
            raise ValueError("missing bias line")
        estimator = LinearHingeClassifier()
        estimator.dictionary_ = dictionary
        estimator.weights_ = weights
        estimator.bias_ = float(value)
        estimator.objective_history_ = []
        estimator.classes_ = np.array([LABEL_ENCYCLOPEDIC, LABEL_OTHER])
        return estimator

    tag, count = next_line().split()
    if tag != "trees":
        raise ValueError("expected tree section")
    trees = []
    for _ in range(int(count)):
        tag, n_nodes = next_line().split("\t", 1)
        if tag != "tree":
            raise ValueError("expected tree header")
        tree, consumed = _parse_tree(next_line)
        if consumed != int(n_nodes):
            raise ValueError("tree node count mismatch")
        trees.append(tree)
    estimator = PresenceForestClassifier(n_trees=len(trees))
    estimator.dictionary_ = dictionary
    estimator.trees_ = trees
    estimator.bootstrap_indices_ = []
    estimator.classes_ = np.array([LABEL_ENCYCLOPEDIC, LABEL_OTHER])
    return estimator


def _parse_tree(next_line) -> tuple[TreeNode, int]:
    kind, value = next_line().split("\t", 1)
    if kind == "leaf":
        if value not in (LABEL_ENCYCLOPEDIC, LABEL_OTHER):
            raise ValueError(f"unknown leaf label {value!r}")
        return TreeNode(label=value), 1
    if kind != "split":
        raise ValueError(f"unknown node kind {kind!r}")
    absent, n_absent = _parse_tree(next_line)
    present, n_present = _parse_tree(next_line)
    return TreeNode(feature=int(value), absent=absent, present=present), \
        1 + n_absent + n_present
