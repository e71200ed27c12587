"""Knowledge-base snapshots: title lists, category graph, ontology,
entity index, lexicon, and gazetteers.

A snapshot is a directory of flat fixture files described by a
``snapshot.toml`` manifest of ``key = value`` lines. Everything textual is
normalized with the same pipeline as queries so projections compare like
with like. Snapshots are immutable once loaded and safe to share across
threads.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from ._similarity import dice
from .querylog import NormalizationConfig, NormalizedQuery, default_config, normalize

PAGE_TYPES = ("article", "disambiguation", "category")
KB_LANGUAGES = ("pt", "en", "es")

_MANIFEST_NAME = "snapshot.toml"

TermKey = tuple[str, ...]


class SnapshotError(ValueError):
    """Raised for missing or malformed snapshot files."""


@dataclass
class TitleList:
    """Normalized page titles of one (page type, language) pair.

    ``titles`` maps each normalized term tuple to the original title string
    (first occurrence wins); ``term_index`` is the inverted index used to
    restrict Dice scoring to titles sharing at least one query term.
    """

    page_type: str
    language: str
    titles: dict[TermKey, str] = field(default_factory=dict)
    term_index: dict[str, set[TermKey]] = field(default_factory=dict)

    def add(self, original: str, key: TermKey):
        if not key or key in self.titles:
            return
        self.titles[key] = original
        for term in set(key):
            self.term_index.setdefault(term, set()).add(key)

    def best_match(self, terms: Sequence[str]) -> tuple[float, TermKey] | None:
        """Highest Dice score against any title, or None when nothing
        overlaps. Ties break toward the shorter, then lexicographically
        smaller, joined title."""
        query_terms = set(terms)
        if not query_terms:
            return None
        candidates = set()
        for term in query_terms:
            candidates.update(self.term_index.get(term, ()))
        best: tuple[float, TermKey] | None = None
        for key in candidates:
            score = dice(terms, key)
            if best is None or _match_order(score, key) < _match_order(best[0], best[1]):
                best = (score, key)
        return best


def _match_order(score: float, key: TermKey) -> tuple[float, int, str]:
    joined = " ".join(key)
    return (-score, len(joined), joined)


@dataclass
class CategoryGraph:
    """Upward (child -> parents) category edges plus article memberships."""

    nodes: set[str] = field(default_factory=set)
    parent_edges: dict[str, set[str]] = field(default_factory=dict)
    article_categories: dict[TermKey, set[str]] = field(default_factory=dict)

    def expand(self, title_terms: Sequence[str], depth: int) -> set[str]:
        """Breadth-first upward closure from the article's categories.

        Level 1 is the article's direct categories; each further level adds
        their parents, up to ``depth`` levels. A visited set keeps cycles
        harmless.
        """
        if depth < 1:
            raise ValueError("depth must be at least 1")
        start = self.article_categories.get(tuple(title_terms))
        if not start:
            return set()
        visited = set(start)
        frontier = deque(start)
        for _ in range(depth - 1):
            next_frontier: deque[str] = deque()
            while frontier:
                node = frontier.popleft()
                for parent in self.parent_edges.get(node, ()):
                    if parent not in visited:
                        visited.add(parent)
                        next_frontier.append(parent)
            frontier = next_frontier
            if not frontier:
                break
        return visited


def expand_categories(graph: CategoryGraph, title_terms: Sequence[str],
                      depth: int) -> set[str]:
    """Category strings within ``depth`` levels above an article."""
    return graph.expand(title_terms, depth)


@dataclass
class OntologyMap:
    """Article title -> semantic classes such as "Person" or "Place"."""

    entries: dict[TermKey, set[str]] = field(default_factory=dict)


@dataclass
class EntityIndex:
    """Entity names with their repository top category (e.g. "/music/")."""

    entries: list[tuple[TermKey, str]] = field(default_factory=list)
    term_index: dict[str, set[int]] = field(default_factory=dict)

    def add(self, name: TermKey, top_category: str):
        position = len(self.entries)
        self.entries.append((name, top_category))
        for term in set(name):
            self.term_index.setdefault(term, set()).add(position)


@dataclass(frozen=True)
class EntityMatch:
    name: TermKey
    top_category: str
    score: float


def entity_search(index: EntityIndex, query: NormalizedQuery) -> EntityMatch | None:
    """Best term-overlap match in the entity index, or None.

    Ties break toward the shorter entity name, then the lexicographically
    smaller one. A zero-overlap query is a no-match, so any returned score
    lies in (0, 1].
    """
    if not query.terms:
        return None
    candidates = set()
    for term in set(query.terms):
        candidates.update(index.term_index.get(term, ()))
    best: EntityMatch | None = None
    for position in candidates:
        name, top_category = index.entries[position]
        score = dice(query.terms, name)
        if best is None or _match_order(score, name) < _match_order(best.score, best.name):
            best = EntityMatch(name=name, top_category=top_category, score=score)
    return best


@dataclass
class Lexicon:
    """Word -> semantic categories from web-directory style lists."""

    entries: dict[str, set[str]] = field(default_factory=dict)


@dataclass
class Gazetteer:
    """Month names per language, place names, and Latin suffixes."""

    months: dict[str, set[str]] = field(default_factory=dict)
    place_terms: set[TermKey] = field(default_factory=set)
    latin_suffixes: tuple[str, ...] = ()

    def is_month(self, token: str) -> bool:
        return any(token in names for names in self.months.values())


@dataclass
class KBSnapshot:
    """Immutable bundle of every KB resource the features need."""

    title_lists: dict[tuple[str, str], TitleList]
    graph: CategoryGraph
    ontology: OntologyMap
    entities: EntityIndex
    lexicon: Lexicon
    gazetteer: Gazetteer


def _parse_manifest(path: Path) -> dict[str, str]:
    entries: dict[str, str] = {}
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(),
                                  start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise SnapshotError(f"{path.name} line {lineno}: expected key = value")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip().strip('"').strip("'")
        if key in entries:
            raise SnapshotError(f"{path.name} line {lineno}: duplicate key {key!r}")
        entries[key] = value
    return entries


def _resolve(manifest: Mapping[str, str], key: str, root: Path) -> Path:
    if key not in manifest:
        raise SnapshotError(f"{key}: not found")
    path = root / manifest[key]
    if not path.is_file():
        raise SnapshotError(f"{key}: not found ({path})")
    return path


def _data_lines(path: Path) -> Iterable[tuple[int, str]]:
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(),
                                  start=1):
        if line.strip():
            yield lineno, line


def _split_tab(path: Path, lineno: int, line: str, n_fields: int) -> list[str]:
    fields = line.split("\t")
    if len(fields) != n_fields or any(not f.strip() for f in fields):
        raise SnapshotError(
            f"{path.name} line {lineno}: expected {n_fields} tab-separated fields")
    return [f.strip() for f in fields]


def load_snapshot(directory: str | Path,
                  config: NormalizationConfig | None = None) -> KBSnapshot:
    """Load and index a snapshot directory.

    ``config`` is the normalization applied to every textual key; it must
    match the one used on queries (the packaged default when omitted).
    """
    if config is None:
        config = default_config()
    root = Path(directory)
    manifest_path = root / _MANIFEST_NAME
    if not manifest_path.is_file():
        raise SnapshotError(f"{_MANIFEST_NAME}: not found in {root}")
    manifest = _parse_manifest(manifest_path)

    def norm_terms(text: str) -> TermKey:
        return normalize(text, config).terms

    title_lists: dict[tuple[str, str], TitleList] = {}
    for page_type in PAGE_TYPES:
        for language in KB_LANGUAGES:
            key = f"titles.{page_type}.{language}"
            path = _resolve(manifest, key, root)
            title_list = TitleList(page_type=page_type, language=language)
            for _, line in _data_lines(path):
                title_list.add(line.strip(), norm_terms(line))
            title_lists[(page_type, language)] = title_list

    graph = CategoryGraph()
    edges_path = _resolve(manifest, "graph.edges", root)
    for lineno, line in _data_lines(edges_path):
        child, parent = _split_tab(edges_path, lineno, line, 2)
        graph.nodes.update((child, parent))
        graph.parent_edges.setdefault(child, set()).add(parent)
    cats_path = _resolve(manifest, "graph.article_cats", root)
    for lineno, line in _data_lines(cats_path):
        article, category = _split_tab(cats_path, lineno, line, 2)
        key = norm_terms(article)
        if not key:
            raise SnapshotError(
                f"{cats_path.name} line {lineno}: article normalizes to nothing")
        graph.nodes.add(category)
        graph.article_categories.setdefault(key, set()).add(category)

    ontology = OntologyMap()
    ontology_path = _resolve(manifest, "ontology", root)
    for lineno, line in _data_lines(ontology_path):
        title, classes = _split_tab(ontology_path, lineno, line, 2)
        key = norm_terms(title)
        if not key:
            raise SnapshotError(
                f"{ontology_path.name} line {lineno}: title normalizes to nothing")
        names = {c.strip() for c in classes.split(",") if c.strip()}
        if not names:
            raise SnapshotError(f"{ontology_path.name} line {lineno}: no classes")
        ontology.entries.setdefault(key, set()).update(names)

    entities = EntityIndex()
    entities_path = _resolve(manifest, "entities", root)
    for lineno, line in _data_lines(entities_path):
        name, top_category = _split_tab(entities_path, lineno, line, 2)
        if not (top_category.startswith("/") and top_category.endswith("/")):
            raise SnapshotError(
                f"{entities_path.name} line {lineno}: top category must be /…/")
        key = norm_terms(name)
        if key:
            entities.add(key, top_category)

    lexicon = Lexicon()
    lexicon_path = _resolve(manifest, "lexicon", root)
    for lineno, line in _data_lines(lexicon_path):
        word, categories = _split_tab(lexicon_path, lineno, line, 2)
        names = {c.strip() for c in categories.split(",") if c.strip()}
        if not names:
            raise SnapshotError(f"{lexicon_path.name} line {lineno}: no categories")
        key = norm_terms(word)
        if len(key) == 1:
            lexicon.entries.setdefault(key[0], set()).update(names)

    months: dict[str, set[str]] = {}
    for language in KB_LANGUAGES:
        path = _resolve(manifest, f"gazetteer.months.{language}", root)
        names = set()
        for _, line in _data_lines(path):
            names.update(norm_terms(line))
        months[language] = names

    places: set[TermKey] = set()
    places_path = _resolve(manifest, "gazetteer.places", root)
    for _, line in _data_lines(places_path):
        key = norm_terms(line)
        if key:
            places.add(key)

    suffixes = []
    suffix_path = _resolve(manifest, "gazetteer.latin_suffixes", root)
    for _, line in _data_lines(suffix_path):
        suffix = line.strip().lower()
        if suffix:
            suffixes.append(suffix)
    if not suffixes:
        raise SnapshotError(f"{suffix_path.name}: no suffixes")

    gazetteer = Gazetteer(months=months, place_terms=places,
                          latin_suffixes=tuple(suffixes))
    return KBSnapshot(title_lists=title_lists, graph=graph, ontology=ontology,
                      entities=entities, lexicon=lexicon, gazetteer=gazetteer)
