"""Click-through log parsing, query normalization, and query filters.

A log line is one ``query TAB hostname TAB count`` record. Queries are
normalized into lowercase accent-free tokens with stopwords removed, and
two filters flag queries we never want in training data: navigational
queries (a term reappears inside a clicked hostname) and queries that
explicitly ask for Wikipedia.
"""

from __future__ import annotations

import functools
import re
import unicodedata
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import IO, Iterable, Iterator

DEFAULT_LANGUAGES = ("pt", "es", "en")

_TOKEN_RE = re.compile(r"[a-z0-9]+")

# Tokens naming Wikipedia outright, plus anything within this edit
# distance of "wikipedia", mark a query as an explicit wiki query.
_WIKI_TOKEN = "wiki"
_WIKI_TARGET = "wikipedia"
_WIKI_MAX_EDITS = 3


@dataclass(frozen=True)
class RawLogRecord:
    """One ``<query, clicked hostname, click count>`` log entry."""

    query: str
    hostname: str
    count: int


@dataclass(frozen=True)
class NormalizedQuery:
    """A query reduced to ordered lowercase tokens.

    ``has_question_mark`` remembers whether the raw string contained a
    question mark; the character itself is stripped from the tokens.
    """

    terms: tuple[str, ...]
    has_question_mark: bool = False
    original: str = ""

    def joined(self) -> str:
        return " ".join(self.terms)


class NormalizationConfig:
    """Stopword sets for the active languages, all applied at once.

    The log mixes Portuguese, Spanish and English, so a token matching a
    stopword in any active language is dropped.
    """

    def __init__(self, stopword_sets: dict[str, frozenset[str]],
                 languages: tuple[str, ...] = DEFAULT_LANGUAGES):
        if not languages:
            raise ValueError("at least one language is required")
        for lang in languages:
            if not stopword_sets.get(lang):
                raise ValueError(f"empty or missing stopword set for {lang!r}")
        self.stopword_sets = dict(stopword_sets)
        self.languages = tuple(languages)
        self.active_stopwords = frozenset().union(
            *(stopword_sets[lang] for lang in languages))


def _strip_diacritics(text: str) -> str:
    decomposed = unicodedata.normalize("NFKD", text)
    return "".join(ch for ch in decomposed if not unicodedata.combining(ch))


def _clean_word(word: str) -> str:
    """Reduce a lexicon/stopword entry to the token form queries use."""
    return " ".join(_TOKEN_RE.findall(_strip_diacritics(word.lower())))


def _parse_stopword_lines(text: str) -> frozenset[str]:
    words = set()
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        words.update(_clean_word(line).split())
    return frozenset(words)


def load_stopwords(directory: str | Path,
                   languages: tuple[str, ...] = DEFAULT_LANGUAGES) -> NormalizationConfig:
    """Read ``<lang>.txt`` stopword files (one word per line, ``#`` comments)."""
    directory = Path(directory)
    sets = {lang: _parse_stopword_lines(
        (directory / f"{lang}.txt").read_text(encoding="utf-8"))
        for lang in languages}
    return NormalizationConfig(sets, languages)


@functools.lru_cache(maxsize=1)
def default_config() -> NormalizationConfig:
    """Packaged pt/es/en stopword lists."""
    sets = {}
    for lang in DEFAULT_LANGUAGES:
        text = resources.files("enq").joinpath(
            f"data/stopwords/{lang}.txt").read_text(encoding="utf-8")
        sets[lang] = _parse_stopword_lines(text)
    return NormalizationConfig(sets, DEFAULT_LANGUAGES)


def normalize(query: str, config: NormalizationConfig | None = None) -> NormalizedQuery:
    """Lowercase, strip accents and punctuation, drop stopwords.

    Question marks are the one piece of punctuation worth keeping: their
    presence is recorded on the result before they are stripped. Every
    other non-alphanumeric character acts as a token separator, so
    "beyoncé and jay-z" becomes ("beyonce", "jay", "z").
    """
    if config is None:
        config = default_config()
    lowered = query.lower()
    has_question_mark = "?" in lowered
    stripped = _strip_diacritics(lowered)
    terms = tuple(t for t in _TOKEN_RE.findall(stripped)
                  if t not in config.active_stopwords)
    return NormalizedQuery(terms=terms, has_question_mark=has_question_mark,
                           original=query)


def parse_log(lines: Iterable[str]) -> tuple[list[RawLogRecord], int]:
    """Parse a TAB-separated click log into records plus a malformed tally.

    A well-formed line is ``query TAB hostname TAB count`` with a positive
    integer count. Malformed lines are skipped and counted; blank lines are
    ignored outright.
    """
    records = []
    malformed = 0
    for line in lines:
        line = line.rstrip("\n").rstrip("\r")
        if not line:
            continue
        fields = line.split("\t")
        if len(fields) != 3:
            malformed += 1
            continue
        query, hostname, raw_count = fields
        hostname = hostname.strip().lower()
        try:
            count = int(raw_count)
        except ValueError:
            malformed += 1
            continue
        if count < 1 or not query.strip() or not hostname:
            malformed += 1
            continue
        records.append(RawLogRecord(query=query, hostname=hostname, count=count))
    return records, malformed


def is_navigational(query: NormalizedQuery, clicked_hosts: Iterable[str]) -> bool:
    """True when some query term occurs inside some clicked hostname.

    Substring containment, not token equality: "amazon" must match
    "amazon.com". The full hostname string is used, subdomains included.
    """
    hosts = [h.lower() for h in clicked_hosts]
    return any(term in host for term in query.terms for host in hosts)


def _edit_distance(a: str, b: str) -> int:
    if len(a) < len(b):
        a, b = b, a
    previous = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        current = [i]
        for j, cb in enumerate(b, start=1):
            current.append(min(previous[j] + 1,
                               current[j - 1] + 1,
                               previous[j - 1] + (ca != cb)))
        previous = current
    return previous[-1]


def is_wiki_query(query: NormalizedQuery) -> bool:
    """True for queries explicitly naming Wikipedia.

    Catches the exact token "wiki" and any token within 3 edits of
    "wikipedia", which covers the common misspellings ("wikpedia",
    "wekpedia", "weekpedia") at the cost of rare 9-letter lookalikes.
    """
    for term in query.terms:
        if term == _WIKI_TOKEN:
            return True
        if abs(len(term) - len(_WIKI_TARGET)) <= _WIKI_MAX_EDITS and \
                _edit_distance(term, _WIKI_TARGET) <= _WIKI_MAX_EDITS:
            return True
    return False


# --- normalized-record TSV (joined-terms, question-mark flag, host, count) ---

def write_normalized(rows: Iterable[tuple[NormalizedQuery, str, int]],
                     out: IO[str]) -> int:
    written = 0
    for query, hostname, count in rows:
        out.write(f"{query.joined()}\t{int(query.has_question_mark)}\t"
                  f"{hostname}\t{count}\n")
        written += 1
    return written


def read_normalized(lines: Iterable[str]) -> Iterator[tuple[NormalizedQuery, str, int]]:
    for lineno, line in enumerate(lines, start=1):
        line = line.rstrip("\n")
        if not line:
            continue
        fields = line.split("\t")
        if len(fields) != 4:
            raise ValueError(f"normalized record line {lineno}: expected 4 fields")
        joined, flag, hostname, count = fields
        query = NormalizedQuery(terms=tuple(joined.split()),
                                has_question_mark=flag == "1",
                                original=joined)
        yield query, hostname, int(count)
