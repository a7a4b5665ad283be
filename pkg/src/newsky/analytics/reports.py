"""Distribution reports: political-orientation shares and domain
rank-frequency tables."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional

from ..ratings import Orientation, RatingTable, Reliability

ORIENTATION_BUCKETS = (
    Orientation.LEFT,
    Orientation.LEAN_LEFT,
    Orientation.CENTER,
    Orientation.LEAN_RIGHT,
    Orientation.RIGHT,
)

RANK_CLASSES = ("reliable", "unreliable", "all")


@dataclass(frozen=True)
class RankFrequencyEntry:
    domain: str
    frequency: int
    rank: int


def rank_frequency(
    domain_counts: Mapping,
    table: RatingTable,
    klass: str = "all",
    limit: Optional[int] = None,
) -> list:
    """Domains ranked by descending link frequency.

    Ties break lexicographically by domain; ranks run 1..N with no gaps.
    klass filters to reliable or unreliable domains; "all" keeps every
    observed domain, rated or not.
    """
    if klass not in RANK_CLASSES:
        raise ValueError(f"class must be one of {RANK_CLASSES}")
    wanted = None
    if klass == "reliable":
        wanted = Reliability.RELIABLE
    elif klass == "unreliable":
        wanted = Reliability.UNRELIABLE
    rows = [
        (domain, count)
        for domain, count in domain_counts.items()
        if wanted is None or table.classify(domain).reliability is wanted
    ]
    rows.sort(key=lambda item: (-item[1], item[0]))
    if limit is not None:
        rows = rows[:limit]
    return [
        RankFrequencyEntry(domain=domain, frequency=count, rank=index)
        for index, (domain, count) in enumerate(rows, start=1)
    ]


def orientation_distribution(
    domain_counts: Mapping,
    table: RatingTable,
    lang: Optional[str] = None,
) -> dict:
    """Per reliability class, the percentage of links by orientation.

    Links from Unknown-orientation domains are excluded from the
    percentage base and reported under "unknown_links"; shares over the
    five buckets therefore sum to 100 (up to float rounding). When `lang`
    is given only links from domains tagged with that language in the
    score file are counted.
    """
    per_class = {
        "reliable": {"shares": {}, "base_links": 0, "unknown_links": 0},
        "unreliable": {"shares": {}, "base_links": 0, "unknown_links": 0},
    }
    counts = {
        "reliable": {bucket: 0 for bucket in ORIENTATION_BUCKETS},
        "unreliable": {bucket: 0 for bucket in ORIENTATION_BUCKETS},
    }
    for domain, count in domain_counts.items():
        rating = table.classify(domain)
        if rating.reliability is Reliability.RELIABLE:
            key = "reliable"
        elif rating.reliability is Reliability.UNRELIABLE:
            key = "unreliable"
        else:
            continue
        if lang is not None and rating.lang != lang:
            continue
        if rating.orientation is Orientation.UNKNOWN:
            per_class[key]["unknown_links"] += count
        else:
            counts[key][rating.orientation] += count
            per_class[key]["base_links"] += count
    for key, entry in per_class.items():
        base = entry["base_links"]
        entry["shares"] = {
            bucket.value: (100.0 * counts[key][bucket] / base) if base else 0.0
            for bucket in ORIENTATION_BUCKETS
        }
    return per_class


def export_rank_frequency_csv(entries, fh) -> None:
    fh.write("rank,domain,frequency\n")
    for entry in entries:
        fh.write(f"{entry.rank},{entry.domain},{entry.frequency}\n")


def export_orientation_csv(distribution: dict, fh) -> None:
    fh.write("reliability,orientation,share_pct,base_links,unknown_links\n")
    for key in ("reliable", "unreliable"):
        entry = distribution[key]
        for bucket in ORIENTATION_BUCKETS:
            share = entry["shares"][bucket.value]
            fh.write(
                f"{key},{bucket.value},{format(share, '.6g')},"
                f"{entry['base_links']},{entry['unknown_links']}\n"
            )
