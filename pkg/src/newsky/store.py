"""Embedded store for observations, engagements, post records, resolver
cache entries and job outputs, plus the prevalence time-series queries.

One sqlite file in WAL mode: a single writer (the ingest pipeline) and any
number of readers, each seeing a consistent snapshot. Reliability is never
stored; every query classifies domains against the rating snapshot it is
handed, so a ratings refresh reclassifies all of history.
"""

from __future__ import annotations

import json
import sqlite3
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

from . import timeutil
from .ratings import RatingTable, Reliability

KINDS = ("post", "repost", "like")
GRANULARITIES = ("hour", "day")
DEDUP_MODES = ("per_link", "per_post")

DEFAULT_MAX_BUCKETS = 50_000


class StorageFull(Exception):
    """The underlying database cannot grow any further."""


class RangeTooLarge(ValueError):
    """Query window spans more buckets than the configured maximum."""

    def __init__(self, requested: int, max_buckets: int):
        super().__init__(f"window spans {requested} buckets, maximum is {max_buckets}")
        self.requested = requested
        self.max_buckets = max_buckets


@dataclass(frozen=True)
class NewsLinkObservation:
    """One sighting of a news link: a post carrying it, or a repost/like of
    such a post (with the engagement's own actor and timestamp)."""

    event_cursor: int
    event_kind: str  # post | repost | like
    actor_id: str
    observed_at: int  # epoch seconds, UTC
    raw_url: str
    domain: str
    post_uri: str  # origin post
    hashtags: tuple = ()

    def __post_init__(self):
        if self.event_kind not in KINDS:
            raise ValueError(f"unknown event kind {self.event_kind!r}")


@dataclass(frozen=True)
class Engagement:
    """One repost/like edge from an engaging actor to an origin post."""

    event_cursor: int
    kind: str  # repost | like
    actor_id: str
    subject_uri: str
    subject_actor: str
    observed_at: int
    has_news_links: bool


@dataclass(frozen=True)
class StoredPost:
    """Origin post retained for text analytics, hashtag grouping and
    engagement-time link replay."""

    post_uri: str
    actor_id: str
    created_at: int
    text: str
    lang: Optional[str]
    hashtags: tuple = ()
    urls: tuple = ()  # (raw_url, domain) pairs

    @property
    def domains(self) -> tuple:
        return tuple(domain for _, domain in self.urls)


@dataclass
class PrevalenceBucket:
    bucket_start: int
    total_links: int = 0
    total_rated: int = 0
    reliable: int = 0
    unreliable: int = 0


_SCHEMA = """
CREATE TABLE IF NOT EXISTS observations (
    id INTEGER PRIMARY KEY,
    event_cursor INTEGER NOT NULL,
    kind TEXT NOT NULL,
    actor_id TEXT NOT NULL,
    observed_at INTEGER NOT NULL,
    raw_url TEXT NOT NULL,
    domain TEXT NOT NULL,
    post_uri TEXT NOT NULL,
    hashtags TEXT NOT NULL DEFAULT '[]'
);
CREATE INDEX IF NOT EXISTS idx_obs_time ON observations (observed_at, kind);
CREATE UNIQUE INDEX IF NOT EXISTS idx_obs_event_url ON observations (event_cursor, raw_url);

CREATE TABLE IF NOT EXISTS engagements (
    event_cursor INTEGER PRIMARY KEY,
    kind TEXT NOT NULL,
    actor_id TEXT NOT NULL,
    subject_uri TEXT NOT NULL,
    subject_actor TEXT NOT NULL,
    observed_at INTEGER NOT NULL,
    has_news_links INTEGER NOT NULL
);
CREATE INDEX IF NOT EXISTS idx_eng_time ON engagements (observed_at);

CREATE TABLE IF NOT EXISTS posts (
    post_uri TEXT PRIMARY KEY,
    actor_id TEXT NOT NULL,
    created_at INTEGER NOT NULL,
    text TEXT NOT NULL,
    lang TEXT,
    hashtags TEXT NOT NULL DEFAULT '[]',
    urls TEXT NOT NULL DEFAULT '[]'
);
CREATE INDEX IF NOT EXISTS idx_posts_actor ON posts (actor_id, created_at);

CREATE TABLE IF NOT EXISTS resolutions (
    target_uri TEXT PRIMARY KEY,
    outcome TEXT NOT NULL,
    payload TEXT,
    fetched_at INTEGER NOT NULL
);
CREATE INDEX IF NOT EXISTS idx_res_fetched ON resolutions (fetched_at);

CREATE TABLE IF NOT EXISTS jobs (
    job_type TEXT NOT NULL,
    window_from INTEGER NOT NULL,
    window_to INTEGER NOT NULL,
    params TEXT NOT NULL DEFAULT '{}',
    created_at INTEGER NOT NULL,
    payload TEXT NOT NULL,
    PRIMARY KEY (job_type, window_from, window_to, params)
);

CREATE TABLE IF NOT EXISTS meta (
    key TEXT PRIMARY KEY,
    value TEXT NOT NULL
);
"""


def _validate_kinds(kinds: Optional[Sequence[str]]) -> tuple:
    if kinds is None:
        return KINDS
    out = tuple(kinds)
    for kind in out:
        if kind not in KINDS:
            raise ValueError(f"unknown event kind {kind!r}")
    if not out:
        raise ValueError("kinds filter must not be empty")
    return out


def bucket_range(from_ts: int, to_ts: int, granularity: str) -> tuple:
    """Snap a half-open window outward to bucket boundaries.

    Returns (first_bucket, n_buckets, step). An empty window yields zero
    buckets.
    """
    if granularity not in GRANULARITIES:
        raise ValueError(f"granularity must be one of {GRANULARITIES}")
    if to_ts < from_ts:
        raise ValueError("window end precedes window start")
    step = timeutil.bucket_step(granularity)
    first = timeutil.floor_bucket(from_ts, granularity)
    if to_ts == from_ts:
        return first, 0, step
    n = (to_ts - first + step - 1) // step
    return first, n, step


class Store:
    def __init__(self, path: Union[str, Path], max_buckets: int = DEFAULT_MAX_BUCKETS):
        self.path = Path(path)
        self.max_buckets = max_buckets
        self._local = threading.local()
        self._write_lock = threading.Lock()
        conn = self._conn()
        with self._write_lock:
            conn.executescript(_SCHEMA)

    def _conn(self) -> sqlite3.Connection:
        conn = getattr(self._local, "conn", None)
        if conn is None:
            conn = sqlite3.connect(self.path, isolation_level=None, timeout=30.0)
            conn.execute("PRAGMA journal_mode=WAL")
            conn.execute("PRAGMA synchronous=NORMAL")
            conn.execute("PRAGMA foreign_keys=OFF")
            self._local.conn = conn
        return conn

    def close(self) -> None:
        conn = getattr(self._local, "conn", None)
        if conn is not None:
            conn.close()
            self._local.conn = None

    # writes --------------------------------------------------------------

    def record(self, obs: NewsLinkObservation) -> None:
        self.record_observations([obs])

    def record_observations(self, batch: Iterable[NewsLinkObservation]) -> None:
        rows = [
            (o.event_cursor, o.event_kind, o.actor_id, o.observed_at,
             o.raw_url, o.domain, o.post_uri, json.dumps(list(o.hashtags)))
            for o in batch
        ]
        if not rows:
            return
        # keyed on (event_cursor, raw_url) so a rewound ingest re-serving old
        # events overwrites its own rows instead of double-counting them
        self._write_many(
            "INSERT OR REPLACE INTO observations"
            " (event_cursor, kind, actor_id, observed_at, raw_url, domain, post_uri, hashtags)"
            " VALUES (?, ?, ?, ?, ?, ?, ?, ?)",
            rows,
        )

    def record_engagements(self, batch: Iterable[Engagement]) -> None:
        rows = [
            (e.event_cursor, e.kind, e.actor_id, e.subject_uri,
             e.subject_actor, e.observed_at, int(e.has_news_links))
            for e in batch
        ]
        if not rows:
            return
        self._write_many(
            "INSERT OR REPLACE INTO engagements"
            " (event_cursor, kind, actor_id, subject_uri, subject_actor, observed_at, has_news_links)"
            " VALUES (?, ?, ?, ?, ?, ?, ?)",
            rows,
        )

    def upsert_posts(self, batch: Iterable[StoredPost]) -> None:
        rows = [
            (p.post_uri, p.actor_id, p.created_at, p.text, p.lang,
             json.dumps(list(p.hashtags)), json.dumps([list(pair) for pair in p.urls]))
            for p in batch
        ]
        if not rows:
            return
        self._write_many(
            "INSERT OR REPLACE INTO posts"
            " (post_uri, actor_id, created_at, text, lang, hashtags, urls)"
            " VALUES (?, ?, ?, ?, ?, ?, ?)",
            rows,
        )

    def _write_many(self, sql: str, rows: list) -> None:
        conn = self._conn()
        with self._write_lock:
            try:
                conn.execute("BEGIN")
                conn.executemany(sql, rows)
                conn.execute("COMMIT")
            except sqlite3.OperationalError as exc:
                conn.execute("ROLLBACK")
                if "full" in str(exc).lower():
                    raise StorageFull(str(exc)) from exc
                raise

    def prune_older_than(self, cutoff_ts: int) -> int:
        conn = self._conn()
        with self._write_lock:
            cur = conn.execute("DELETE FROM observations WHERE observed_at < ?", (cutoff_ts,))
            n = cur.rowcount
            n += conn.execute("DELETE FROM engagements WHERE observed_at < ?", (cutoff_ts,)).rowcount
        return n

    # prevalence ------------------------------------------------------------

    def query_absolute(
        self,
        from_ts: int,
        to_ts: int,
        granularity: str,
        table: RatingTable,
        dedup: str = "per_link",
        kinds: Optional[Sequence[str]] = None,
    ) -> list:
        if dedup not in DEDUP_MODES:
            raise ValueError(f"dedup must be one of {DEDUP_MODES}")
        kinds = _validate_kinds(kinds)
        first, n_buckets, step = bucket_range(from_ts, to_ts, granularity)
        if n_buckets > self.max_buckets:
            raise RangeTooLarge(n_buckets, self.max_buckets)
        buckets = {
            first + i * step: PrevalenceBucket(bucket_start=first + i * step)
            for i in range(n_buckets)
        }
        if not buckets:
            return []

        counter = "COUNT(*)" if dedup == "per_link" else "COUNT(DISTINCT event_cursor)"
        marks = ",".join("?" * len(kinds))
        sql = (
            f"SELECT (observed_at / ?) * ? AS bucket, domain, {counter}"
            f" FROM observations"
            f" WHERE observed_at >= ? AND observed_at < ? AND kind IN ({marks})"
            f" GROUP BY bucket, domain"
        )
        end = first + n_buckets * step
        cls_cache: dict = {}
        for bucket_start, domain, count in self._conn().execute(
            sql, (step, step, first, end, *kinds)
        ):
            rel = cls_cache.get(domain)
            if rel is None:
                rel = table.classify(domain).reliability
                cls_cache[domain] = rel
            bucket = buckets[bucket_start]
            bucket.total_links += count
            if rel is Reliability.RELIABLE:
                bucket.total_rated += count
                bucket.reliable += count
            elif rel is Reliability.UNRELIABLE:
                bucket.total_rated += count
                bucket.unreliable += count
        return [buckets[key] for key in sorted(buckets)]

    def query_relative(
        self,
        from_ts: int,
        to_ts: int,
        granularity: str,
        table: RatingTable,
        dedup: str = "per_link",
        kinds: Optional[Sequence[str]] = None,
    ) -> list:
        out = []
        for bucket in self.query_absolute(from_ts, to_ts, granularity, table, dedup, kinds):
            ratio = bucket.unreliable / bucket.total_rated if bucket.total_rated else None
            out.append((bucket.bucket_start, ratio))
        return out

    # analytics feeds ---------------------------------------------------------

    def domain_counts(
        self,
        from_ts: int,
        to_ts: int,
        dedup: str = "per_link",
        kinds: Optional[Sequence[str]] = None,
    ) -> dict:
        """domain → link count over the half-open window."""
        if dedup not in DEDUP_MODES:
            raise ValueError(f"dedup must be one of {DEDUP_MODES}")
        kinds = _validate_kinds(kinds)
        counter = "COUNT(*)" if dedup == "per_link" else "COUNT(DISTINCT event_cursor)"
        marks = ",".join("?" * len(kinds))
        sql = (
            f"SELECT domain, {counter} FROM observations"
            f" WHERE observed_at >= ? AND observed_at < ? AND kind IN ({marks})"
            f" GROUP BY domain"
        )
        return dict(self._conn().execute(sql, (from_ts, to_ts, *kinds)))

    def tagged_posts(self, from_ts: int, to_ts: int) -> list:
        """Origin posts in the window carrying hashtags, as
        (hashtags tuple, domains frozenset) pairs. Only kind=post
        observations contribute; engagements never re-count a post."""
        sql = (
            "SELECT event_cursor, hashtags, domain FROM observations"
            " WHERE observed_at >= ? AND observed_at < ? AND kind = 'post'"
            " ORDER BY event_cursor"
        )
        per_event: dict = {}
        for cursor, tags_json, domain in self._conn().execute(sql, (from_ts, to_ts)):
            entry = per_event.get(cursor)
            if entry is None:
                entry = per_event[cursor] = (tuple(json.loads(tags_json)), set())
            entry[1].add(domain)
        return [
            (tags, frozenset(domains))
            for tags, domains in per_event.values()
            if tags
        ]

    def engagement_edges(
        self, from_ts: int, to_ts: int, news_only: bool = True
    ) -> dict:
        """Undirected actor pair → interaction multiplicity. Self-loops
        (actors engaging with their own posts) are dropped."""
        sql = (
            "SELECT actor_id, subject_actor, COUNT(*) FROM engagements"
            " WHERE observed_at >= ? AND observed_at < ?"
        )
        if news_only:
            sql += " AND has_news_links = 1"
        sql += " GROUP BY actor_id, subject_actor"
        edges: dict = {}
        for a, b, count in self._conn().execute(sql, (from_ts, to_ts)):
            if a == b:
                continue
            key = (a, b) if a < b else (b, a)
            edges[key] = edges.get(key, 0) + count
        return edges

    def actor_texts(self, actors: Iterable[str], from_ts: int, to_ts: int) -> dict:
        """actor → list of (text, lang) pairs: their stored posts created in
        the window plus the origin texts of posts they reposted in the
        window."""
        out = {actor: [] for actor in actors}
        if not out:
            return out
        conn = self._conn()
        marks = ",".join("?" * len(out))
        actor_list = list(out)
        for actor, text, lang in conn.execute(
            f"SELECT actor_id, text, lang FROM posts"
            f" WHERE created_at >= ? AND created_at < ? AND actor_id IN ({marks})"
            f" ORDER BY created_at, post_uri",
            (from_ts, to_ts, *actor_list),
        ):
            out[actor].append((text, lang))
        for actor, text, lang in conn.execute(
            f"SELECT e.actor_id, p.text, p.lang FROM engagements e"
            f" JOIN posts p ON p.post_uri = e.subject_uri"
            f" WHERE e.kind = 'repost' AND e.observed_at >= ? AND e.observed_at < ?"
            f" AND e.actor_id IN ({marks})"
            f" ORDER BY e.event_cursor",
            (from_ts, to_ts, *actor_list),
        ):
            out[actor].append((text, lang))
        return out

    def get_post(self, post_uri: str) -> Optional[StoredPost]:
        row = self._conn().execute(
            "SELECT post_uri, actor_id, created_at, text, lang, hashtags, urls"
            " FROM posts WHERE post_uri = ?",
            (post_uri,),
        ).fetchone()
        if row is None:
            return None
        return StoredPost(
            post_uri=row[0], actor_id=row[1], created_at=row[2], text=row[3],
            lang=row[4], hashtags=tuple(json.loads(row[5])),
            urls=tuple((raw, dom) for raw, dom in json.loads(row[6])),
        )

    def post_langs(self, post_uris: Iterable[str]) -> dict:
        uris = list(post_uris)
        if not uris:
            return {}
        marks = ",".join("?" * len(uris))
        return dict(self._conn().execute(
            f"SELECT post_uri, lang FROM posts WHERE post_uri IN ({marks})", uris
        ))

    # resolver cache ---------------------------------------------------------

    def get_resolution(self, target_uri: str) -> Optional[tuple]:
        row = self._conn().execute(
            "SELECT outcome, payload, fetched_at FROM resolutions WHERE target_uri = ?",
            (target_uri,),
        ).fetchone()
        if row is None:
            return None
        outcome, payload, fetched_at = row
        return outcome, json.loads(payload) if payload else None, fetched_at

    def put_resolution(self, target_uri: str, outcome: str,
                       payload: Optional[dict], fetched_at: int) -> None:
        self._write_many(
            "INSERT OR REPLACE INTO resolutions (target_uri, outcome, payload, fetched_at)"
            " VALUES (?, ?, ?, ?)",
            [(target_uri, outcome, json.dumps(payload) if payload is not None else None, fetched_at)],
        )

    def load_resolutions(self, limit: int) -> list:
        """Most recent entries first, for warming the in-memory cache."""
        return [
            (uri, outcome, json.loads(payload) if payload else None, fetched_at)
            for uri, outcome, payload, fetched_at in self._conn().execute(
                "SELECT target_uri, outcome, payload, fetched_at FROM resolutions"
                " ORDER BY fetched_at DESC LIMIT ?",
                (limit,),
            )
        ]

    def trim_resolutions(self, capacity: int) -> int:
        conn = self._conn()
        with self._write_lock:
            cur = conn.execute(
                "DELETE FROM resolutions WHERE target_uri IN ("
                " SELECT target_uri FROM resolutions ORDER BY fetched_at DESC"
                " LIMIT -1 OFFSET ?)",
                (capacity,),
            )
            return cur.rowcount

    # jobs and meta ------------------------------------------------------------

    def save_job(self, job_type: str, window_from: int, window_to: int,
                 params: dict, payload: dict, created_at: int) -> None:
        self._write_many(
            "INSERT OR REPLACE INTO jobs"
            " (job_type, window_from, window_to, params, created_at, payload)"
            " VALUES (?, ?, ?, ?, ?, ?)",
            [(job_type, window_from, window_to,
              json.dumps(params, sort_keys=True), created_at, json.dumps(payload))],
        )

    def load_job(self, job_type: str, window_from: int, window_to: int,
                 params: Optional[dict] = None) -> Optional[dict]:
        """Exact-window match first; with params=None, the most recent job
        of that type and window regardless of params."""
        conn = self._conn()
        if params is not None:
            row = conn.execute(
                "SELECT payload FROM jobs WHERE job_type=? AND window_from=? AND window_to=?"
                " AND params=?",
                (job_type, window_from, window_to, json.dumps(params, sort_keys=True)),
            ).fetchone()
        else:
            row = conn.execute(
                "SELECT payload FROM jobs WHERE job_type=? AND window_from=? AND window_to=?"
                " ORDER BY created_at DESC LIMIT 1",
                (job_type, window_from, window_to),
            ).fetchone()
        return json.loads(row[0]) if row else None

    def get_meta(self, key: str) -> Optional[str]:
        row = self._conn().execute("SELECT value FROM meta WHERE key = ?", (key,)).fetchone()
        return row[0] if row else None

    def set_meta(self, key: str, value: str) -> None:
        self._write_many(
            "INSERT OR REPLACE INTO meta (key, value) VALUES (?, ?)", [(key, value)]
        )

    # health -------------------------------------------------------------------

    def counts(self) -> dict:
        conn = self._conn()
        return {
            "observations": conn.execute("SELECT COUNT(*) FROM observations").fetchone()[0],
            "engagements": conn.execute("SELECT COUNT(*) FROM engagements").fetchone()[0],
            "posts": conn.execute("SELECT COUNT(*) FROM posts").fetchone()[0],
            "resolutions": conn.execute("SELECT COUNT(*) FROM resolutions").fetchone()[0],
        }


def export_prevalence_csv(buckets: Sequence[PrevalenceBucket], fh) -> None:
    fh.write("bucket_start,total_links,total_rated,reliable,unreliable\n")
    for b in buckets:
        fh.write(
            f"{timeutil.format_rfc3339(b.bucket_start)},{b.total_links},"
            f"{b.total_rated},{b.reliable},{b.unreliable}\n"
        )
