"""Deterministic synthetic click logs and KB snapshots with known ground
truth.

The generated corpus is separable by construction: encyclopedic queries
click only on Wikipedia hosts and reappear verbatim as article titles in
the emitted snapshot, other queries click only elsewhere and share no
vocabulary with the KB, and mixed queries split their clicks evenly so the
default thresholds discard them. A handful of explicit wiki queries and
navigational queries are added on top to give the filters real work.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from pathlib import Path

from .querylog import default_config, is_wiki_query, normalize

_CONSONANTS = "bcdfglmnprstvz"
_VOWELS = "aeiou"
_ACCENTED = {"a": "á", "e": "é", "i": "í", "o": "ó", "u": "ú"}

_LANGUAGES = ("pt", "en", "es")
_WIKI_HOSTS = {"pt": "pt.wikipedia.org", "en": "en.wikipedia.org",
               "es": "es.wikipedia.org"}

_MONTHS = {
    "pt": ["janeiro", "fevereiro", "março", "abril", "maio", "junho", "julho",
           "agosto", "setembro", "outubro", "novembro", "dezembro"],
    "en": ["january", "february", "march", "april", "may", "june", "july",
           "august", "september", "october", "november", "december"],
    "es": ["enero", "febrero", "marzo", "abril", "mayo", "junio", "julio",
           "agosto", "septiembre", "octubre", "noviembre", "diciembre"],
}
_LATIN_SUFFIXES = ["atus", "arium", "icus", "idae", "ensis", "aurea"]
_ONTOLOGY_CLASSES = ["Person", "Place", "Work", "Species", "Event",
                     "Organisation"]
_ENTITY_CATEGORIES = ["/music/", "/people/", "/location/", "/film/",
                      "/biology/", "/sports/"]
_LEXICON_CATEGORIES = ["job", "organization", "nationality", "animal", "plant"]


@dataclass(frozen=True)
class SynthConfig:
    seed: int = 7
    n_encyclopedic: int = 200
    n_other: int = 200
    n_mixed: int = 50
    kb_vocab_size: int = 240

    def __post_init__(self):
        if min(self.n_encyclopedic, self.n_other, self.n_mixed) < 0:
            raise ValueError("query counts must be non-negative")
        if self.kb_vocab_size < 40:
            raise ValueError("kb_vocab_size must be at least 40")


def _make_word(rng: random.Random) -> str:
    n = rng.randint(2, 3)
    word = "".join(rng.choice(_CONSONANTS) + rng.choice(_VOWELS)
                   for _ in range(n))
    if rng.random() < 0.3:
        word += rng.choice("lmnrs")
    return word


def _build_vocab(rng: random.Random, size: int) -> list[str]:
    stopwords = default_config().active_stopwords
    wiki_strings = list(_WIKI_HOSTS.values()) + ["wikipedia.org"]
    words: list[str] = []
    seen = set()
    while len(words) < size:
        word = _make_word(rng)
        if word in seen or word in stopwords:
            continue
        if is_wiki_query(normalize(word)):
            continue
        if any(word in host for host in wiki_strings):
            continue
        seen.add(word)
        words.append(word)
    return words


def _surface(rng: random.Random, terms: list[str]) -> str:
    """Raw query string with light noise that normalization must undo."""
    words = list(terms)
    style = rng.random()
    if style < 0.15:
        words = [w.capitalize() for w in words]
    if rng.random() < 0.1:
        target = rng.randrange(len(words))
        word = words[target]
        for i, ch in enumerate(word):
            if ch in _ACCENTED:
                words[target] = word[:i] + _ACCENTED[ch] + word[i + 1:]
                break
    joiner = "+" if rng.random() < 0.15 else " "
    surface = joiner.join(words)
    if rng.random() < 0.08:
        surface += "?"
    return surface


def _pick_terms(rng: random.Random, vocab: list[str], length: int) -> list[str]:
    return rng.sample(vocab, length)


def generate(config: SynthConfig, out_dir: str | Path) -> dict[str, Path]:
    """Write the log, SERP cache, and snapshot; returns their paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    snapshot_dir = out / "snapshot"
    snapshot_dir.mkdir(exist_ok=True)

    rng = random.Random(config.seed)
    vocab = _build_vocab(rng, config.kb_vocab_size)
    n_enc_vocab = max(20, int(len(vocab) * 0.6))
    n_other_vocab = max(10, int(len(vocab) * 0.25))
    n_host_vocab = max(6, int(len(vocab) * 0.1))
    enc_vocab = vocab[:n_enc_vocab]
    other_vocab = vocab[n_enc_vocab:n_enc_vocab + n_other_vocab]
    host_vocab = vocab[n_enc_vocab + n_other_vocab:
                       n_enc_vocab + n_other_vocab + n_host_vocab]
    place_vocab = vocab[n_enc_vocab + n_other_vocab + n_host_vocab:]
    if len(place_vocab) < 4:
        place_vocab = other_vocab[-4:]

    hosts = [f"{w}.com" for w in host_vocab] + [f"{w}.pt" for w in host_vocab[:3]]

    places = [(w,) for w in place_vocab]
    for i in range(0, min(6, len(place_vocab) - 1), 2):
        places.append((place_vocab[i], place_vocab[i + 1]))

    seen_queries: set[tuple[str, ...]] = set()

    def unique_terms(pool: list[str], length: int) -> list[str]:
        for _ in range(200):
            terms = _pick_terms(rng, pool, length)
            if tuple(terms) not in seen_queries:
                seen_queries.add(tuple(terms))
                return terms
        raise RuntimeError("vocabulary too small for the requested corpus")

    # --- encyclopedic queries and the KB entries they project onto ---
    titles = {(page_type, lang): []
              for page_type in ("article", "disambiguation", "category")
              for lang in _LANGUAGES}
    graph_edges: list[tuple[str, str]] = []
    article_cats: list[tuple[str, str]] = []
    ontology_rows: list[tuple[str, str]] = []
    entity_rows: list[tuple[str, str]] = []

    enc_queries: list[list[str]] = []
    for i in range(config.n_encyclopedic):
        length = rng.choices([1, 2, 3, 4], weights=[15, 40, 30, 15])[0]
        terms = unique_terms(enc_vocab, length)
        roll = rng.random()
        if roll < 0.15:
            terms = terms + [str(rng.randint(1000, 2099))]
        elif roll < 0.25:
            terms = terms + [rng.choice(_MONTHS["en"])]
        elif roll < 0.35:
            terms = terms + [rng.choice(place_vocab)]
        enc_queries.append(terms)

        lang = _LANGUAGES[i % 3]
        title = " ".join(terms).title()
        titles[("article", lang)].append(title)
        if i % 4 == 0:
            titles[("disambiguation", lang)].append(terms[0].title())
        if i % 5 == 0:
            titles[("category", lang)].append(f"{terms[0].title()} Topics")

        head = terms[0]
        direct = f"{head}-studies"
        chain = [direct, f"branch-{i % 16}", f"division-{i % 8}",
                 f"realm-{i % 4}", "root-of-knowledge"]
        article_cats.append((title, direct))
        for child, parent in zip(chain, chain[1:]):
            graph_edges.append((child, parent))
        if i % 2 == 0:
            ontology_rows.append((title, rng.choice(_ONTOLOGY_CLASSES)))
        else:
            entity_rows.append((" ".join(terms), rng.choice(_ENTITY_CATEGORIES)))

    # A short cycle among upper graph levels; expansion must stay finite.
    graph_edges.append(("root-of-knowledge", "realm-0"))

    lexicon_rows = [(word, rng.choice(_LEXICON_CATEGORIES))
                    for word in enc_vocab[:20]]

    # --- other / mixed / filter-noise queries ---
    other_queries = [unique_terms(other_vocab, rng.choices(
        [1, 2, 3, 4], weights=[15, 40, 30, 15])[0])
        for _ in range(config.n_other)]
    mixed_queries = [unique_terms(other_vocab, rng.randint(2, 4))
                     for _ in range(config.n_mixed)]

    wiki_markers = ["wiki", "wikipedia", "wikpedia", "wekpedia"]
    n_wiki_extra = max(2, config.n_encyclopedic // 20) if config.n_encyclopedic else 0
    wiki_queries = []
    for _ in range(n_wiki_extra):
        terms = unique_terms(enc_vocab, rng.randint(1, 2)) + [rng.choice(wiki_markers)]
        wiki_queries.append(terms)

    n_nav_extra = max(2, config.n_other // 20) if config.n_other else 0
    nav_queries = []
    for _ in range(n_nav_extra):
        word = rng.choice(host_vocab)
        terms = [word] + unique_terms(other_vocab, 1)
        nav_queries.append((terms, f"{word}.com"))

    # --- click log ---
    def safe_hosts(terms: list[str], k: int) -> list[str]:
        usable = [h for h in hosts if not any(t in h for t in terms)]
        if len(usable) < k:
            raise RuntimeError("not enough clean hostnames")
        return rng.sample(usable, k)

    log_rows: list[tuple[str, str, int]] = []
    serp_rows: list[tuple[str, list[str]]] = []

    for i, terms in enumerate(enc_queries):
        surface = _surface(rng, terms)
        total = rng.randint(3, 9)
        wiki_host = _WIKI_HOSTS[_LANGUAGES[i % 3]]
        if total >= 5 and rng.random() < 0.4:
            split = rng.randint(1, total - 1)
            log_rows.append((surface, wiki_host, split))
            log_rows.append((surface, "wikipedia.org", total - split))
        else:
            log_rows.append((surface, wiki_host, total))
        serp_rows.append((" ".join(terms), [wiki_host] + safe_hosts(terms, 2)))

    for terms in other_queries:
        surface = _surface(rng, terms)
        chosen = safe_hosts(terms, rng.randint(1, 3))
        for host in sorted(chosen):
            log_rows.append((surface, host, rng.randint(1, 9)))
        serp_rows.append((" ".join(terms), chosen + ["en.wikipedia.org"]))

    for terms in mixed_queries:
        surface = _surface(rng, terms)
        count = rng.randint(2, 6)
        half_host = safe_hosts(terms, 1)[0]
        log_rows.append((surface, "en.wikipedia.org", count))
        log_rows.append((surface, half_host, count))
        serp_rows.append((" ".join(terms), [half_host, "en.wikipedia.org"]))

    for terms in wiki_queries:
        surface = " ".join(terms)
        log_rows.append((surface, "pt.wikipedia.org", rng.randint(3, 6)))
        serp_rows.append((" ".join(terms), ["pt.wikipedia.org"]))

    for terms, nav_host in nav_queries:
        surface = " ".join(terms)
        log_rows.append((surface, nav_host, rng.randint(2, 5)))
        serp_rows.append((" ".join(terms), [nav_host]))

    # --- write everything ---
    def write_lines(path: Path, lines: list[str]):
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as handle:
            for line in lines:
                handle.write(line + "\n")

    log_path = out / "clicks.tsv"
    write_lines(log_path, [f"{q}\t{h}\t{c}" for q, h, c in log_rows])

    serp_path = out / "serp.tsv"
    write_lines(serp_path, [f"{q}\t{','.join(hs)}" for q, hs in serp_rows])

    manifest_lines = []
    for (page_type, lang), rows in titles.items():
        name = f"titles_{page_type}_{lang}.txt"
        write_lines(snapshot_dir / name, sorted(set(rows)) or [f"Unused {lang.title()} {page_type.title()}"])
        manifest_lines.append(f"titles.{page_type}.{lang} = {name}")

    write_lines(snapshot_dir / "graph_edges.tsv",
                [f"{c}\t{p}" for c, p in sorted(set(graph_edges))])
    manifest_lines.append("graph.edges = graph_edges.tsv")
    write_lines(snapshot_dir / "article_cats.tsv",
                [f"{a}\t{c}" for a, c in sorted(set(article_cats))])
    manifest_lines.append("graph.article_cats = article_cats.tsv")

    write_lines(snapshot_dir / "ontology.tsv",
                [f"{t}\t{c}" for t, c in sorted(set(ontology_rows))]
                or ["Unused Title\tWork"])
    manifest_lines.append("ontology = ontology.tsv")
    write_lines(snapshot_dir / "entities.tsv",
                [f"{n}\t{c}" for n, c in sorted(set(entity_rows))]
                or ["unused entity\t/none/"])
    manifest_lines.append("entities = entities.tsv")
    write_lines(snapshot_dir / "lexicon.tsv",
                [f"{w}\t{c}" for w, c in sorted(set(lexicon_rows))])
    manifest_lines.append("lexicon = lexicon.tsv")

    for lang in _LANGUAGES:
        name = f"months_{lang}.txt"
        write_lines(snapshot_dir / name, _MONTHS[lang])
        manifest_lines.append(f"gazetteer.months.{lang} = {name}")
    write_lines(snapshot_dir / "places.txt",
                sorted(" ".join(p) for p in places))
    manifest_lines.append("gazetteer.places = places.txt")
    write_lines(snapshot_dir / "latin_suffixes.txt", _LATIN_SUFFIXES)
    manifest_lines.append("gazetteer.latin_suffixes = latin_suffixes.txt")

    write_lines(snapshot_dir / "snapshot.toml", manifest_lines)

    return {"log": log_path, "serp": serp_path, "snapshot": snapshot_dir}
