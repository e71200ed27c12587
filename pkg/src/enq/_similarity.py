"""Term-overlap similarity scoring shared by the KB lookups and features."""

from __future__ import annotations

from typing import Sequence

# Interval labels for projection scores, low to high. An exact match gets
# its own bucket so "-1.0" features single out perfect title matches;
# scores strictly between 0.8 and 1.0 fall in the "0.99" bucket.
BUCKET_LABELS = ("0.2", "0.4", "0.6", "0.8", "0.99", "1.0")


def dice(a: Sequence[str], b: Sequence[str]) -> float:
    """Dice coefficient over distinct terms: 2|A∩B| / (|A| + |B|).

    Duplicates collapse before counting. Raises on an empty side; callers
    must guard.
    """
    set_a = set(a)
    set_b = set(b)
    if not set_a or not set_b:
        raise ValueError("dice requires two non-empty term sequences")
    return 2.0 * len(set_a & set_b) / (len(set_a) + len(set_b))


def score_bucket(score: float) -> str:
    """Map a projection score in (0, 1] to its interval label."""
    if not 0.0 < score <= 1.0:
        raise ValueError(f"score {score!r} outside (0, 1]")
    if score == 1.0:
        return "1.0"
    if score > 0.8:
        return "0.99"
    if score > 0.6:
        return "0.8"
    if score > 0.4:
        return "0.6"
    if score > 0.2:
        return "0.4"
    return "0.2"
