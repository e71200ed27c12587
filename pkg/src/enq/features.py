"""Sparse binary feature extraction for normalized queries.

Eight feature groups cover term-level patterns (dates, Latin forms,
geography, query morphology) and knowledge-base projections (directory
lexicon hits, title matches per page type and language, category-graph
expansion, ontology classes, entity matches). Feature names follow the
grammar ``group:detail`` and never contain whitespace, so a vector
serializes as space-separated sorted names.
"""

from __future__ import annotations

import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import IO, Iterable, Iterator, Mapping, Sequence

from sklearn.base import BaseEstimator, TransformerMixin

from ._similarity import BUCKET_LABELS, dice, score_bucket
from .kb import (CategoryGraph, EntityIndex, Gazetteer, KBSnapshot, Lexicon,
                 OntologyMap, TitleList, entity_search)
from .querylog import NormalizedQuery

FeatureVector = frozenset[str]

FEATURE_GROUPS = ("directories", "term-patterns", "wiki-articles",
                  "wiki-disambig", "wiki-categories", "wiki-graph",
                  "ontology", "entities")

_TITLE_GROUP_BY_TYPE = {"article": "wiki-articles",
                        "disambiguation": "wiki-disambig",
                        "category": "wiki-categories"}

_ROMAN_RE = re.compile(r"^(m{0,3})(cm|cd|d?c{0,3})(xc|xl|l?x{0,3})(ix|iv|v?i{0,3})$")
_ROMAN_VALUES = {"i": 1, "v": 5, "x": 10, "l": 50, "c": 100, "d": 500, "m": 1000}

YEAR_MIN, YEAR_MAX = 1000, 2099
LATIN_SUFFIX_MIN_LENGTH = 5
GRAPH_DEPTH = 4

_WS_RE = re.compile(r"\s+")


def _slug(text: str) -> str:
    """Whitespace inside KB-derived strings would break the feature TSV."""
    return _WS_RE.sub("-", text.strip())


def group_of(feature_name: str) -> str:
    """Map a feature name to its ablation group via the name prefix."""
    prefix, sep, detail = feature_name.partition(":")
    if sep:
        if prefix == "dir":
            return "directories"
        if prefix == "tp":
            return "term-patterns"
        if prefix == "graph":
            return "wiki-graph"
        if prefix == "ont":
            return "ontology"
        if prefix == "fb":
            return "entities"
        if prefix == "title":
            page_type = detail.split("-", 1)[0]
            if page_type in _TITLE_GROUP_BY_TYPE:
                return _TITLE_GROUP_BY_TYPE[page_type]
    raise ValueError(f"feature {feature_name!r} has no known group")


def roman_value(token: str) -> int | None:
    """Value of a canonical Roman numeral, else None."""
    if not token or not _ROMAN_RE.fullmatch(token):
        return None
    total = 0
    previous = 0
    for ch in reversed(token):
        value = _ROMAN_VALUES[ch]
        total += value if value >= previous else -value
        previous = max(previous, value)
    return total


def _is_year(token: str) -> bool:
    return token.isdigit() and YEAR_MIN <= int(token) <= YEAR_MAX


def term_pattern_features(query: NormalizedQuery, gazetteer: Gazetteer) -> set[str]:
    """Date, Latin-form, geographic, and morphology patterns.

    Exactly one length feature fires for a non-empty query. The Roman
    numeral "i" never counts as Latin (values below 2 are out), and suffix
    matches need at least 5 characters to skip short common words.
    """
    features: set[str] = set()
    terms = query.terms
    if any(gazetteer.is_month(t) or _is_year(t) for t in terms):
        features.add("tp:date")
    for term in terms:
        value = roman_value(term)
        if value is not None and 2 <= value <= 3999:
            features.add("tp:latin")
            break
        if len(term) >= LATIN_SUFFIX_MIN_LENGTH and \
                any(term.endswith(s) for s in gazetteer.latin_suffixes):
            features.add("tp:latin")
            break
    unigrams = ((t,) for t in terms)
    bigrams = (tuple(terms[i:i + 2]) for i in range(len(terms) - 1))
    if any(g in gazetteer.place_terms for g in unigrams) or \
            any(g in gazetteer.place_terms for g in bigrams):
        features.add("tp:geo")
    if query.has_question_mark:
        features.add("tp:question")
    if terms:
        n = len(terms)
        features.add(f"tp:len-{n}" if n <= 5 else "tp:len-5plus")
    return features


def directory_features(query: NormalizedQuery, lexicon: Lexicon) -> set[str]:
    """One feature per semantic category of each exact lexicon hit."""
    features = set()
    for term in query.terms:
        for category in lexicon.entries.get(term, ()):
            features.add(f"dir:{_slug(category)}")
    return features


@dataclass(frozen=True)
class ProjectionScore:
    """A positive projection score and the interval label features carry."""

    value: float
    bucket: str

    @classmethod
    def of(cls, value: float) -> "ProjectionScore":
        return cls(value=value, bucket=score_bucket(value))


@dataclass(frozen=True)
class TitleMatch:
    """Best-scoring article title, kept for graph and ontology features."""

    terms: tuple[str, ...]
    original: str
    language: str
    score: float


def title_projection_features(
        query: NormalizedQuery,
        title_lists: Mapping[tuple[str, str], TitleList]) -> tuple[set[str], TitleMatch | None]:
    """Per-list bucketed best Dice scores, plus the overall best article.

    Each of the nine lists contributes at most one feature,
    ``title:<type>-<LANG>-<bucket>``, giving a namespace of at most
    3 types x 3 languages x 6 buckets = 54 names. The returned article
    match (articles only, ties to the shorter then smaller title) seeds
    graph and ontology features.
    """
    if not query.terms:
        raise ValueError("query has no terms")
    features: set[str] = set()
    best_article: TitleMatch | None = None
    for (page_type, language), title_list in title_lists.items():
        found = title_list.best_match(query.terms)
        if found is None:
            continue
        score, key = found
        projection = ProjectionScore.of(score)
        features.add(f"title:{page_type}-{language.upper()}-{projection.bucket}")
        if page_type != "article":
            continue
        candidate = TitleMatch(terms=key, original=title_list.titles[key],
                               language=language, score=score)
        if best_article is None or _article_order(candidate) < _article_order(best_article):
            best_article = candidate
    return features, best_article


def _article_order(match: TitleMatch) -> tuple[float, int, str, str]:
    joined = " ".join(match.terms)
    return (-match.score, len(joined), joined, match.language)


def graph_features(best_title: TitleMatch | None, graph: CategoryGraph) -> set[str]:
    """Category strings up to four levels above the best article match."""
    if best_title is None:
        return set()
    categories = graph.expand(best_title.terms, GRAPH_DEPTH)
    return {f"graph:{_slug(c)}" for c in categories}


def ontology_features(best_title: TitleMatch | None, ontology: OntologyMap) -> set[str]:
    """Ontology classes of the best-matching article title."""
    if best_title is None:
        return set()
    classes = ontology.entries.get(best_title.terms, ())
    return {f"ont:{_slug(c)}" for c in classes}


def entity_features(query: NormalizedQuery, index: EntityIndex) -> set[str]:
    """A match flag plus the matched entity's top category."""
    match = entity_search(index, query)
    if match is None:
        return set()
    return {"fb:match", f"fb:cat:{_slug(match.top_category)}"}


def extract(query: NormalizedQuery, snapshot: KBSnapshot) -> FeatureVector:
    """Union of all eight feature groups for one query."""
    if not query.terms:
        raise ValueError("cannot extract features for an empty query")
    features = term_pattern_features(query, snapshot.gazetteer)
    features |= directory_features(query, snapshot.lexicon)
    title_features, best_article = title_projection_features(query, snapshot.title_lists)
    features |= title_features
    features |= graph_features(best_article, snapshot.graph)
    features |= ontology_features(best_article, snapshot.ontology)
    features |= entity_features(query, snapshot.entities)
    return frozenset(features)


def _extract_chunk(args: tuple[list[NormalizedQuery], KBSnapshot]) -> list[FeatureVector]:
    queries, snapshot = args
    return [extract(q, snapshot) for q in queries]


def extract_many(queries: Sequence[NormalizedQuery], snapshot: KBSnapshot,
                 workers: int = 1) -> list[FeatureVector]:
    """Extract in input order, optionally fanning out across processes.

    Extraction is pure per query, so the parallel result is identical to
    the serial one.
    """
    if workers <= 1 or len(queries) < 2 * workers:
        return [extract(q, snapshot) for q in queries]
    chunk_size = (len(queries) + workers - 1) // workers
    chunks = [(list(queries[i:i + chunk_size]), snapshot)
              for i in range(0, len(queries), chunk_size)]
    vectors: list[FeatureVector] = []
    with ProcessPoolExecutor(max_workers=workers) as pool:
        for part in pool.map(_extract_chunk, chunks):
            vectors.extend(part)
    return vectors


def title_feature_namespace() -> set[str]:
    """Every possible title projection feature name (54 of them)."""
    return {f"title:{page_type}-{language.upper()}-{bucket}"
            for page_type in _TITLE_GROUP_BY_TYPE
            for language in ("pt", "en", "es")
            for bucket in BUCKET_LABELS}


class QueryFeaturizer(BaseEstimator, TransformerMixin):
    """Stateless transformer from normalized queries to feature sets.

    Wraps :func:`extract` so the extraction step slots into estimator
    pipelines; ``fit`` is a no-op.
    """

    def __init__(self, snapshot: KBSnapshot, workers: int = 1):
        self.snapshot = snapshot
        self.workers = workers

    def fit(self, X, y=None):
        return self

    def transform(self, X: Sequence[NormalizedQuery]) -> list[FeatureVector]:
        return extract_many(X, self.snapshot, workers=self.workers)


# --- features TSV (joined-terms, space-separated sorted feature names) ---

def write_features(rows: Iterable[tuple[NormalizedQuery, FeatureVector]],
                   out: IO[str]) -> int:
    written = 0
    for query, vector in rows:
        out.write(f"{query.joined()}\t{' '.join(sorted(vector))}\n")
        written += 1
    return written


def read_features(lines: Iterable[str]) -> Iterator[tuple[tuple[str, ...], FeatureVector]]:
    for lineno, line in enumerate(lines, start=1):
        line = line.rstrip("\n")
        if not line:
            continue
        fields = line.split("\t")
        if len(fields) != 2:
            raise ValueError(f"features line {lineno}: expected 2 fields")
        joined, names = fields
        yield tuple(joined.split()), frozenset(names.split())
