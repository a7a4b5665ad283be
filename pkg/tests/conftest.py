"""Shared fixtures and replay-line builders for the test suite."""

from __future__ import annotations

import json
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))  # oracles import

from newsky.ratings import Orientation, OrientationSource, RatingTable
from newsky.store import Store

FIXTURES = Path(__file__).parent / "fixtures"

REPLAY_10K = FIXTURES / "replay_10k.jsonl"
RATINGS_10K = FIXTURES / "ratings_10k.csv"
MBFC_10K = FIXTURES / "mbfc_10k.csv"
ALLSIDES_10K = FIXTURES / "allsides_10k.csv"
RATIO_3DAY = FIXTURES / "ratio_3day.jsonl"
RATINGS_RATIO = FIXTURES / "ratings_ratio.csv"
TABLE_RANKING = FIXTURES / "table_ranking.jsonl"
RATINGS_TABLE = FIXTURES / "ratings_table.csv"
LIVE_GOLDEN = FIXTURES / "live_golden.bin"


def load_manifest(name: str) -> dict:
    return json.loads((FIXTURES / name).read_text(encoding="utf-8"))


# --- replay line builders -----------------------------------------------------


def post_line(cursor, actor="did:plc:poster", created_at="2024-06-01T10:00:00Z",
              links=(), tags=(), text="", langs=("en",), embed_uris=()):
    record = {
        "text": text,
        "langs": list(langs),
        "facets": [{"type": "link", "value": u} for u in links]
        + [{"type": "tag", "value": t} for t in tags],
        "embed_uris": list(embed_uris),
    }
    return json.dumps({"cursor": cursor, "kind": "post", "actor": actor,
                       "created_at": created_at, "record": record})


def engagement_line(kind, cursor, subject_uri, actor="did:plc:fan",
                    created_at="2024-06-01T11:00:00Z", cid="bafytest"):
    return json.dumps({"cursor": cursor, "kind": kind, "actor": actor,
                       "created_at": created_at,
                       "subject": {"uri": subject_uri, "cid": cid}})


def other_line(cursor, actor="did:plc:misc", created_at="2024-06-01T12:00:00Z"):
    return json.dumps({"cursor": cursor, "kind": "other", "actor": actor,
                       "created_at": created_at})


def write_replay(path: Path, lines) -> Path:
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def uri_for(actor: str, cursor: int) -> str:
    """AT-URI the pipeline synthesizes for a replay post line."""
    return f"at://{actor}/app.bsky.feed.post/{cursor}"


# --- common fixtures ------------------------------------------------------------


@pytest.fixture
def store(tmp_path) -> Store:
    s = Store(tmp_path / "test.db")
    yield s
    s.close()


def make_table(scores=None, orientations=None) -> RatingTable:
    """scores: {domain: score or (score, lang)}; orientations:
    {domain: Orientation} entered through the MBFC tier."""
    score_rows = []
    for domain, value in (scores or {}).items():
        if isinstance(value, tuple):
            score, lang = value
        else:
            score, lang = value, None
        score_rows.append((domain, score, lang))
    sources = []
    if orientations:
        sources.append((OrientationSource.MBFC, list(orientations.items())))
    return RatingTable.from_sources(score_rows, sources)


@pytest.fixture
def basic_table() -> RatingTable:
    return make_table(
        scores={
            "goodnews.test": (92.5, "en"),
            "solid.test": (75.0, "en"),
            "edge.test": (60.0, "en"),
            "tabloid.test": (59.0, "de"),
            "junknews.test": (20.0, "en"),
        },
        orientations={
            "goodnews.test": Orientation.LEAN_LEFT,
            "solid.test": Orientation.CENTER,
            "tabloid.test": Orientation.RIGHT,
            "junknews.test": Orientation.LEFT,
        },
    )
