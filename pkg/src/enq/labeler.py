"""Click aggregation, Wikipedia click-ratio labeling, and dataset assembly.

Every distinct normalized query gets a click profile counting clicks that
landed on Wikipedia versus everywhere else. The ratio between the two
labels a query encyclopedic (all clicks on Wikipedia under the default
thresholds), non-encyclopedic (none), or leaves it unlabeled in between.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import IO, Iterable, Iterator, Mapping

from .querylog import NormalizedQuery, is_navigational, is_wiki_query

LABEL_ENCYCLOPEDIC = "E"
LABEL_OTHER = "N"
LABELS = (LABEL_ENCYCLOPEDIC, LABEL_OTHER)

TermKey = tuple[str, ...]


class UndefinedRatioError(ValueError):
    """Raised for a click profile with zero total clicks."""


class InsufficientNegativesError(ValueError):
    """Raised when the eligible negative pool cannot balance the positives."""


def is_wiki_host(hostname: str) -> bool:
    """wikipedia.org and any of its subdomains count as Wikipedia."""
    hostname = hostname.lower()
    return hostname == "wikipedia.org" or hostname.endswith(".wikipedia.org")


@dataclass
class ClickProfile:
    """Per-query click tallies and the set of clicked hostnames."""

    query: NormalizedQuery
    wiki_clicks: int = 0
    other_clicks: int = 0
    hosts: set[str] = field(default_factory=set)

    @property
    def total_clicks(self) -> int:
        return self.wiki_clicks + self.other_clicks


@dataclass(frozen=True)
class LabelingConfig:
    """Thresholds and sampling knobs for automatic labeling.

    ``min_positive_ratio`` is the lowest Wikipedia click ratio still labeled
    encyclopedic; ``max_negative_ratio`` the highest still labeled
    non-encyclopedic. Queries in between stay unlabeled.
    """

    min_positive_ratio: float = 1.0
    max_negative_ratio: float = 0.0
    min_wiki_clicks: int = 3
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.min_positive_ratio <= 1.0:
            raise ValueError("min_positive_ratio must be in [0, 1]")
        if not 0.0 <= self.max_negative_ratio <= 1.0:
            raise ValueError("max_negative_ratio must be in [0, 1]")
        if self.max_negative_ratio >= self.min_positive_ratio:
            raise ValueError("max_negative_ratio must be below min_positive_ratio")
        if self.min_wiki_clicks < 1:
            raise ValueError("min_wiki_clicks must be positive")


@dataclass(frozen=True)
class LabeledQuery:
    query: NormalizedQuery
    label: str
    wiki_clicks: int

    def __post_init__(self):
        if self.label not in LABELS:
            raise ValueError(f"unknown label {self.label!r}")


def aggregate(records: Iterable[tuple[NormalizedQuery, str, int]]) -> dict[TermKey, ClickProfile]:
    """Sum clicks per distinct normalized term sequence.

    Raw variants that normalize to the same terms merge into one profile;
    the question-mark flag is kept if any variant carried one.
    """
    profiles: dict[TermKey, ClickProfile] = {}
    for query, hostname, count in records:
        key = tuple(query.terms)
        profile = profiles.get(key)
        if profile is None:
            profile = ClickProfile(query=query)
            profiles[key] = profile
        elif query.has_question_mark and not profile.query.has_question_mark:
            profile.query = NormalizedQuery(terms=profile.query.terms,
                                            has_question_mark=True,
                                            original=profile.query.original)
        hostname = hostname.lower()
        profile.hosts.add(hostname)
        if is_wiki_host(hostname):
            profile.wiki_clicks += count
        else:
            profile.other_clicks += count
    return profiles


def ratio(profile: ClickProfile) -> float:
    """Fraction of the query's clicks that landed on Wikipedia."""
    total = profile.total_clicks
    if total == 0:
        raise UndefinedRatioError("profile has no clicks")
    return profile.wiki_clicks / total


def label(profile: ClickProfile,
          config: LabelingConfig | None = None) -> LabeledQuery | None:
    """Apply the two-threshold criteria; None means unlabeled (filtered out)."""
    if config is None:
        config = LabelingConfig()
    r = ratio(profile)
    if r >= config.min_positive_ratio:
        return LabeledQuery(profile.query, LABEL_ENCYCLOPEDIC, profile.wiki_clicks)
    if r <= config.max_negative_ratio:
        return LabeledQuery(profile.query, LABEL_OTHER, profile.wiki_clicks)
    return None


def split_pools(profiles: Mapping[TermKey, ClickProfile],
                config: LabelingConfig) -> tuple[list[LabeledQuery], list[LabeledQuery], list[ClickProfile]]:
    """Partition profiles into eligible positives, eligible negatives, and
    unlabeled (mid-ratio) profiles.

    Positives must reach ``min_wiki_clicks`` and must not be explicit wiki
    queries; negatives must not be navigational. Profiles are visited in
    sorted term order so the pools are independent of aggregation order.
    """
    positives, negatives, unlabeled = [], [], []
    for key in sorted(profiles):
        profile = profiles[key]
        if not profile.query.terms:
            continue
        example = label(profile, config)
        if example is None:
            unlabeled.append(profile)
            continue
        if example.label == LABEL_ENCYCLOPEDIC:
            if example.wiki_clicks >= config.min_wiki_clicks and \
                    not is_wiki_query(example.query):
                positives.append(example)
        else:
            if not is_navigational(example.query, profile.hosts):
                negatives.append(example)
    return positives, negatives, unlabeled


def build_dataset(profiles: Mapping[TermKey, ClickProfile],
                  config: LabelingConfig | None = None) -> list[LabeledQuery]:
    """Assemble a balanced dataset: all eligible positives plus an equal
    number of negatives sampled uniformly without replacement.

    The output order is a deterministic shuffle driven by ``config.seed``.
    """
    if config is None:
        config = LabelingConfig()
    positives, negatives, _ = split_pools(profiles, config)
    if not positives:
        return []
    if len(negatives) < len(positives):
        raise InsufficientNegativesError(
            f"need {len(positives)} negatives, only {len(negatives)} eligible")
    rng = random.Random(config.seed)
    sampled = rng.sample(negatives, len(positives))
    dataset = positives + sampled
    rng.shuffle(dataset)
    return dataset


# --- dataset TSV (label, joined-terms, question-mark flag, wiki clicks) ---

def write_dataset(examples: Iterable[LabeledQuery], out: IO[str]) -> int:
    written = 0
    for example in examples:
        out.write(f"{example.label}\t{example.query.joined()}\t"
                  f"{int(example.query.has_question_mark)}\t{example.wiki_clicks}\n")
        written += 1
    return written


def read_dataset(lines: Iterable[str]) -> Iterator[LabeledQuery]:
    for lineno, line in enumerate(lines, start=1):
        line = line.rstrip("\n")
        if not line:
            continue
        fields = line.split("\t")
        if len(fields) != 4:
            raise ValueError(f"dataset line {lineno}: expected 4 fields")
        lab, joined, flag, wiki_clicks = fields
        query = NormalizedQuery(terms=tuple(joined.split()),
                                has_question_mark=flag == "1",
                                original=joined)
        yield LabeledQuery(query=query, label=lab, wiki_clicks=int(wiki_clicks))
