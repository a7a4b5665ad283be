"""Source rating tables: reliability by score threshold, political
orientation by a strict three-tier merge of vendor files.

Classification happens at query time against an immutable snapshot, so a
ratings refresh reclassifies history without touching stored rows.
"""

from __future__ import annotations

import csv
import enum
import logging
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

from . import parsing

log = logging.getLogger(__name__)

RELIABILITY_THRESHOLD = 60.0


class SchemaError(ValueError):
    """Rating file header does not match the documented CSV schema."""


class Reliability(enum.Enum):
    RELIABLE = "reliable"
    UNRELIABLE = "unreliable"
    UNRATED = "unrated"


class Orientation(enum.Enum):
    LEFT = "left"
    LEAN_LEFT = "lean_left"
    CENTER = "center"
    LEAN_RIGHT = "lean_right"
    RIGHT = "right"
    UNKNOWN = "unknown"


class OrientationSource(enum.Enum):
    MBFC = "mbfc"
    ALLSIDES = "allsides"
    NEWSGUARD_TIER = "newsguard_tier"
    NONE = "none"


# tier order: lower wins
_TIER_RANK = {
    OrientationSource.MBFC: 0,
    OrientationSource.ALLSIDES: 1,
    OrientationSource.NEWSGUARD_TIER: 2,
}

# Vendor label harmonization into the five buckets. Keys are casefolded
# with whitespace, hyphens and underscores collapsed to single spaces.
ORIENTATION_ALIASES = {
    "left": Orientation.LEFT,
    "far left": Orientation.LEFT,
    "extreme left": Orientation.LEFT,
    "lean left": Orientation.LEAN_LEFT,
    "leans left": Orientation.LEAN_LEFT,
    "left center": Orientation.LEAN_LEFT,
    "center left": Orientation.LEAN_LEFT,
    "skews left": Orientation.LEAN_LEFT,
    "center": Orientation.CENTER,
    "centre": Orientation.CENTER,
    "least biased": Orientation.CENTER,
    "middle": Orientation.CENTER,
    "balanced": Orientation.CENTER,
    "lean right": Orientation.LEAN_RIGHT,
    "leans right": Orientation.LEAN_RIGHT,
    "right center": Orientation.LEAN_RIGHT,
    "center right": Orientation.LEAN_RIGHT,
    "skews right": Orientation.LEAN_RIGHT,
    "right": Orientation.RIGHT,
    "far right": Orientation.RIGHT,
    "extreme right": Orientation.RIGHT,
}


def reliability_for(score: Optional[float]) -> Reliability:
    if score is None:
        return Reliability.UNRATED
    if score >= RELIABILITY_THRESHOLD:
        return Reliability.RELIABLE
    return Reliability.UNRELIABLE


def parse_orientation_label(label: str) -> Optional[Orientation]:
    key = " ".join(label.casefold().replace("-", " ").replace("_", " ").split())
    return ORIENTATION_ALIASES.get(key)


@dataclass(frozen=True)
class SourceRating:
    domain: str
    score: Optional[float]
    reliability: Reliability
    orientation: Orientation
    orientation_source: OrientationSource
    lang: Optional[str] = None


def _unrated(domain: str) -> SourceRating:
    return SourceRating(
        domain=domain,
        score=None,
        reliability=Reliability.UNRATED,
        orientation=Orientation.UNKNOWN,
        orientation_source=OrientationSource.NONE,
    )


class RatingTable:
    """Immutable domain → SourceRating snapshot."""

    def __init__(self, ratings: dict):
        self._ratings = dict(ratings)

    def __len__(self) -> int:
        return len(self._ratings)

    def __contains__(self, domain: str) -> bool:
        return domain in self._ratings

    def classify(self, domain: str) -> SourceRating:
        """Exact lookup with one registrable-domain fallback; a miss is
        Unrated/Unknown, never an error."""
        hit = self._ratings.get(domain)
        if hit is not None:
            return hit
        from . import psl

        parent = psl.registrable_domain(domain)
        if parent != domain:
            hit = self._ratings.get(parent)
            if hit is not None:
                return hit
        return _unrated(domain)

    def domains(self) -> Iterable[str]:
        return self._ratings.keys()

    @classmethod
    def empty(cls) -> "RatingTable":
        return cls({})

    @classmethod
    def from_sources(
        cls,
        score_rows: Sequence[tuple],
        orientation_sources: Sequence[tuple],
    ) -> "RatingTable":
        """Build a snapshot from parsed rows.

        score_rows: (domain, score | None, lang | None) tuples.
        orientation_sources: (OrientationSource, rows) pairs in any order,
        rows being (domain, Orientation) tuples. Tier rank alone decides
        conflicts, so permuting the pairs never changes the result.
        """
        scores: dict = {}
        langs: dict = {}
        for domain, score, lang in score_rows:
            scores[domain] = score
            if lang:
                langs[domain] = lang

        chosen: dict = {}  # domain -> (tier_rank, Orientation, source)
        for source, rows in sorted(
            orientation_sources, key=lambda pair: _TIER_RANK[pair[0]]
        ):
            rank = _TIER_RANK[source]
            for domain, orientation in rows:
                if domain not in chosen or rank < chosen[domain][0]:
                    chosen[domain] = (rank, orientation, source)

        ratings = {}
        for domain in scores.keys() | chosen.keys():
            score = scores.get(domain)
            picked = chosen.get(domain)
            ratings[domain] = SourceRating(
                domain=domain,
                score=score,
                reliability=reliability_for(score),
                orientation=picked[1] if picked else Orientation.UNKNOWN,
                orientation_source=picked[2] if picked else OrientationSource.NONE,
                lang=langs.get(domain),
            )
        return cls(ratings)


def _read_csv(path: Union[str, Path], required: Sequence[str]) -> list:
    path = Path(path)
    with path.open("r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames
        if header is None:
            raise SchemaError(f"{path}: empty file, header row required")
        normalized = [col.strip().lower() for col in header]
        missing = [col for col in required if col not in normalized]
        if missing:
            raise SchemaError(f"{path}: header {header!r} missing column(s) {missing}")
        rows = []
        for row in reader:
            rows.append({(k or "").strip().lower(): (v or "").strip() for k, v in row.items()})
        return rows


def _normalize_cell(raw_domain: str, path, line_hint: str) -> Optional[str]:
    try:
        return parsing.normalize_domain(raw_domain)
    except parsing.UnparseableUrl:
        log.warning("%s: skipping row with unusable domain %r (%s)", path, raw_domain, line_hint)
        return None


def read_score_file(path: Union[str, Path]) -> list:
    """Parse `domain,score[,lang]` rows into (domain, score|None, lang|None)."""
    out: dict = {}
    for idx, row in enumerate(_read_csv(path, ["domain", "score"]), start=2):
        domain = _normalize_cell(row.get("domain", ""), path, f"line {idx}")
        if domain is None:
            continue
        raw_score = row.get("score", "")
        score: Optional[float]
        if raw_score == "":
            score = None
        else:
            try:
                score = float(raw_score)
            except ValueError:
                log.warning("%s line %d: non-numeric score %r, row skipped", path, idx, raw_score)
                continue
            if not 0.0 <= score <= 100.0:
                log.warning("%s line %d: score %s outside [0,100], row skipped", path, idx, score)
                continue
        if domain in out:
            log.warning("%s line %d: duplicate domain %s, last occurrence wins", path, idx, domain)
        out[domain] = (domain, score, row.get("lang") or None)
    return list(out.values())


def read_orientation_file(path: Union[str, Path]) -> list:
    """Parse `domain,orientation` rows into (domain, Orientation)."""
    out: dict = {}
    for idx, row in enumerate(_read_csv(path, ["domain", "orientation"]), start=2):
        domain = _normalize_cell(row.get("domain", ""), path, f"line {idx}")
        if domain is None:
            continue
        label = row.get("orientation", "")
        orientation = parse_orientation_label(label)
        if orientation is None:
            log.warning("%s line %d: unrecognized orientation %r, row skipped", path, idx, label)
            continue
        if domain in out:
            log.warning("%s line %d: duplicate domain %s, last occurrence wins", path, idx, domain)
        out[domain] = (domain, orientation)
    return list(out.values())


def load_ratings(
    score_file: Union[str, Path],
    mbfc_file: Optional[Union[str, Path]] = None,
    allsides_file: Optional[Union[str, Path]] = None,
    newsguard_orientation_file: Optional[Union[str, Path]] = None,
) -> RatingTable:
    sources = []
    if mbfc_file is not None:
        sources.append((OrientationSource.MBFC, read_orientation_file(mbfc_file)))
    if allsides_file is not None:
        sources.append((OrientationSource.ALLSIDES, read_orientation_file(allsides_file)))
    if newsguard_orientation_file is not None:
        sources.append(
            (OrientationSource.NEWSGUARD_TIER, read_orientation_file(newsguard_orientation_file))
        )
    return RatingTable.from_sources(read_score_file(score_file), sources)


class RatingsManager:
    """Holds the live snapshot and swaps it when any source file changes.

    Readers grab `.table` (a plain attribute read) and keep using that
    snapshot for the whole operation; they never block on a reload.
    """

    def __init__(
        self,
        score_file: Union[str, Path],
        mbfc_file: Optional[Union[str, Path]] = None,
        allsides_file: Optional[Union[str, Path]] = None,
        newsguard_orientation_file: Optional[Union[str, Path]] = None,
    ):
        self._paths = {
            "score_file": Path(score_file),
            "mbfc_file": Path(mbfc_file) if mbfc_file else None,
            "allsides_file": Path(allsides_file) if allsides_file else None,
            "newsguard_orientation_file": (
                Path(newsguard_orientation_file) if newsguard_orientation_file else None
            ),
        }
        self._lock = threading.Lock()
        self._stamps = self._current_stamps()
        self._table = load_ratings(**self._paths)

    def _current_stamps(self) -> tuple:
        stamps = []
        for path in self._paths.values():
            if path is None:
                stamps.append(None)
            else:
                try:
                    stamps.append(path.stat().st_mtime_ns)
                except OSError:
                    stamps.append(None)
        return tuple(stamps)

    @property
    def table(self) -> RatingTable:
        return self._table

    def maybe_reload(self) -> bool:
        """Reload if any source file changed; returns True on swap."""
        stamps = self._current_stamps()
        if stamps == self._stamps:
            return False
        with self._lock:
            stamps = self._current_stamps()
            if stamps == self._stamps:
                return False
            try:
                table = load_ratings(**self._paths)
            except (OSError, SchemaError) as exc:
                log.error("ratings reload failed, keeping previous snapshot: %s", exc)
                self._stamps = stamps
                return False
            self._table = table
            self._stamps = stamps
            log.info("ratings reloaded: %d domains", len(table))
            return True


class StaticRatings:
    """Manager-shaped wrapper around a fixed table, for tests and replays."""

    def __init__(self, table: RatingTable):
        self.table = table

    def maybe_reload(self) -> bool:
        return False
