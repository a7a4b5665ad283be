"""Strong-ref resolution: fetch origin post records for reposts/likes.

Batched GETs against the record-fetch endpoint, a capped in-memory LRU
persisted through the store, single-flight dedup of concurrent misses and
a token-bucket rate limit. Origin posts already sitting in the store
(ingested from the firehose themselves) answer without an upstream call.
Resolved entries never expire; NotFound holds for a day; Failed expires
quickly so the next sighting retries.
"""

from __future__ import annotations

import enum
import logging
import threading
import time
from collections import OrderedDict
from dataclasses import dataclass
from typing import Callable, Iterable, Optional, Sequence

import httpx

from . import parsing
from .ingest.events import StrongRef
from .ingest.wire import normalize_post_record
from .store import Store
from .timeutil import parse_rfc3339

log = logging.getLogger(__name__)

GETPOSTS_PATH = "/xrpc/app.bsky.feed.getPosts"

DEFAULT_BATCH_LIMIT = 25
DEFAULT_CACHE_CAPACITY = 500_000
DEFAULT_RATE_PER_SEC = 10.0
DEFAULT_RETRIES = 3
NOT_FOUND_TTL = 24 * 3600.0
FAILED_TTL = 300.0


class Outcome(enum.Enum):
    RESOLVED = "resolved"
    NOT_FOUND = "notfound"
    FAILED = "failed"


@dataclass(frozen=True)
class ResolvedPost:
    """Origin post content in the shape downstream consumers need."""

    post_uri: str
    actor_id: str
    created_at: int
    text: str
    lang: Optional[str]
    hashtags: tuple
    urls: tuple  # (raw_url, domain) pairs

    def to_payload(self) -> dict:
        return {
            "post_uri": self.post_uri,
            "actor_id": self.actor_id,
            "created_at": self.created_at,
            "text": self.text,
            "lang": self.lang,
            "hashtags": list(self.hashtags),
            "urls": [list(pair) for pair in self.urls],
        }

    @classmethod
    def from_payload(cls, payload: dict) -> "ResolvedPost":
        return cls(
            post_uri=payload["post_uri"],
            actor_id=payload["actor_id"],
            created_at=payload["created_at"],
            text=payload.get("text", ""),
            lang=payload.get("lang"),
            hashtags=tuple(payload.get("hashtags") or ()),
            urls=tuple((raw, dom) for raw, dom in payload.get("urls") or ()),
        )


@dataclass(frozen=True)
class Resolution:
    outcome: Outcome
    post: Optional[ResolvedPost] = None


def _resolved_from_stored(stored) -> ResolvedPost:
    return ResolvedPost(
        post_uri=stored.post_uri,
        actor_id=stored.actor_id,
        created_at=stored.created_at,
        text=stored.text,
        lang=stored.lang,
        hashtags=stored.hashtags,
        urls=stored.urls,
    )


@dataclass
class ResolverMetrics:
    upstream_calls: int = 0
    cache_hits: int = 0
    resolved: int = 0
    not_found: int = 0
    failed: int = 0
    retries: int = 0


class TokenBucket:
    def __init__(self, rate_per_sec: float, clock: Callable[[], float] = time.monotonic,
                 sleep: Callable[[float], None] = time.sleep):
        self.rate = max(rate_per_sec, 0.001)
        self.capacity = max(1.0, self.rate)
        self._tokens = self.capacity
        self._stamp = clock()
        self._clock = clock
        self._sleep = sleep
        self._lock = threading.Lock()

    def acquire(self) -> None:
        while True:
            with self._lock:
                now = self._clock()
                self._tokens = min(self.capacity, self._tokens + (now - self._stamp) * self.rate)
                self._stamp = now
                if self._tokens >= 1.0:
                    self._tokens -= 1.0
                    return
                wait = (1.0 - self._tokens) / self.rate
            self._sleep(wait)


class Resolver:
    def __init__(
        self,
        base_url: str,
        store: Optional[Store] = None,
        *,
        batch_limit: int = DEFAULT_BATCH_LIMIT,
        cache_capacity: int = DEFAULT_CACHE_CAPACITY,
        rate_per_sec: float = DEFAULT_RATE_PER_SEC,
        retries: int = DEFAULT_RETRIES,
        retry_base_delay: float = 0.2,
        not_found_ttl: float = NOT_FOUND_TTL,
        failed_ttl: float = FAILED_TTL,
        transport: Optional[httpx.BaseTransport] = None,
        clock: Callable[[], float] = time.time,
        sleep: Callable[[float], None] = time.sleep,
    ):
        self.metrics = ResolverMetrics()
        self._store = store
        self._batch_limit = batch_limit
        self._capacity = cache_capacity
        self._retries = retries
        self._retry_base_delay = retry_base_delay
        self._not_found_ttl = not_found_ttl
        self._failed_ttl = failed_ttl
        self._clock = clock
        self._sleep = sleep
        self._bucket = TokenBucket(rate_per_sec, sleep=sleep)
        self._client = httpx.Client(base_url=base_url, timeout=10.0, transport=transport)
        self._lock = threading.Lock()
        self._cache: OrderedDict = OrderedDict()  # uri -> (Resolution, fetched_at)
        self._inflight: dict = {}  # uri -> threading.Event
        if store is not None:
            self._warm(store)

    def close(self) -> None:
        self._client.close()

    def __enter__(self) -> "Resolver":
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()

    # cache ----------------------------------------------------------------

    def _warm(self, store: Store) -> None:
        entries = store.load_resolutions(self._capacity)
        # oldest first so the most recent end up most recently used
        for uri, outcome, payload, fetched_at in reversed(entries):
            try:
                res = Resolution(
                    outcome=Outcome(outcome),
                    post=ResolvedPost.from_payload(payload) if payload else None,
                )
            except (KeyError, ValueError):
                continue
            self._cache[uri] = (res, fetched_at)
        if entries:
            log.info("resolver cache warmed with %d entries", len(entries))

    def _cache_get(self, uri: str, now: float) -> Optional[Resolution]:
        entry = self._cache.get(uri)
        if entry is None:
            return None
        res, fetched_at = entry
        if res.outcome is Outcome.NOT_FOUND and now - fetched_at > self._not_found_ttl:
            del self._cache[uri]
            return None
        if res.outcome is Outcome.FAILED and now - fetched_at > self._failed_ttl:
            del self._cache[uri]
            return None
        self._cache.move_to_end(uri)
        return res

    def _cache_put_memory(self, uri: str, res: Resolution, now: float) -> None:
        self._cache[uri] = (res, now)
        self._cache.move_to_end(uri)
        while len(self._cache) > self._capacity:
            self._cache.popitem(last=False)

    def _cache_put(self, uri: str, res: Resolution, now: float) -> None:
        self._cache_put_memory(uri, res, now)
        # Failed entries are short-lived; only durable outcomes hit disk.
        if self._store is not None and res.outcome is not Outcome.FAILED:
            payload = res.post.to_payload() if res.post else None
            self._store.put_resolution(uri, res.outcome.value, payload, int(now))

    # resolution -------------------------------------------------------------

    def resolve(self, refs: Sequence[StrongRef]) -> dict:
        """Resolve refs to origin posts; returns target_uri → Resolution.

        Any batch size is accepted; upstream calls are chunked to the
        endpoint limit. Concurrent calls for the same URI share one fetch.
        """
        uris: list[str] = []
        seen: set = set()
        for ref in refs:
            if ref.target_uri not in seen:
                seen.add(ref.target_uri)
                uris.append(ref.target_uri)

        results: dict = {}
        to_fetch: list[str] = []
        waiting: list = []
        now = self._clock()
        with self._lock:
            for uri in uris:
                cached = self._cache_get(uri, now)
                if cached is not None:
                    self.metrics.cache_hits += 1
                    results[uri] = cached
                    continue
                if self._store is not None:
                    # the origin post may have come through the firehose
                    # already; the local copy is authoritative, skip upstream
                    stored = self._store.get_post(uri)
                    if stored is not None:
                        res = Resolution(Outcome.RESOLVED, _resolved_from_stored(stored))
                        self._cache_put_memory(uri, res, now)
                        self.metrics.cache_hits += 1
                        results[uri] = res
                        continue
                gate = self._inflight.get(uri)
                if gate is not None:
                    waiting.append((uri, gate))
                    continue
                gate = threading.Event()
                self._inflight[uri] = gate
                to_fetch.append(uri)

        if to_fetch:
            try:
                for start in range(0, len(to_fetch), self._batch_limit):
                    chunk = to_fetch[start:start + self._batch_limit]
                    for uri, res in self._fetch_chunk(chunk).items():
                        results[uri] = res
            finally:
                with self._lock:
                    for uri in to_fetch:
                        gate = self._inflight.pop(uri, None)
                        if gate is not None:
                            gate.set()
                        if uri not in results:
                            # fetch aborted mid-way; report without caching
                            results[uri] = Resolution(Outcome.FAILED)

        for uri, gate in waiting:
            gate.wait(timeout=60.0)
            with self._lock:
                cached = self._cache_get(uri, self._clock())
            results[uri] = cached if cached is not None else Resolution(Outcome.FAILED)

        return results

    def resolve_one(self, ref: StrongRef) -> Resolution:
        return self.resolve([ref])[ref.target_uri]

    def _fetch_chunk(self, uris: list) -> dict:
        posts, ok = self._request_with_retries(uris)
        now = self._clock()
        out: dict = {}
        with self._lock:
            if not ok:
                for uri in uris:
                    res = Resolution(Outcome.FAILED)
                    self.metrics.failed += 1
                    self._cache_put(uri, res, now)
                    out[uri] = res
                return out
            for uri in uris:
                post = posts.get(uri)
                if post is None:
                    res = Resolution(Outcome.NOT_FOUND)
                    self.metrics.not_found += 1
                else:
                    res = Resolution(Outcome.RESOLVED, post)
                    self.metrics.resolved += 1
                self._cache_put(uri, res, now)
                out[uri] = res
        return out

    def _request_with_retries(self, uris: list) -> tuple:
        """Returns (uri → ResolvedPost map, reachable flag)."""
        for attempt in range(self._retries + 1):
            if attempt:
                self.metrics.retries += 1
                self._sleep(self._retry_base_delay * (2 ** (attempt - 1)))
            self._bucket.acquire()
            self.metrics.upstream_calls += 1
            try:
                response = self._client.get(GETPOSTS_PATH, params=[("uris", u) for u in uris])
            except httpx.HTTPError as exc:
                log.warning("record fetch failed (%s), attempt %d", exc, attempt + 1)
                continue
            if response.status_code >= 500:
                log.warning("record fetch got %d, attempt %d", response.status_code, attempt + 1)
                continue
            if response.status_code != 200:
                log.warning("record fetch rejected with %d for %d uris",
                            response.status_code, len(uris))
                return {}, False
            try:
                body = response.json()
            except ValueError:
                continue
            return self._parse_posts(body), True
        return {}, False

    def _parse_posts(self, body: dict) -> dict:
        out: dict = {}
        for view in body.get("posts") or []:
            if not isinstance(view, dict):
                continue
            uri = view.get("uri")
            author = view.get("author") or {}
            did = author.get("did") if isinstance(author, dict) else None
            record = view.get("record")
            if not (isinstance(uri, str) and isinstance(did, str) and isinstance(record, dict)):
                continue
            canonical = normalize_post_record(record)
            urls, hashtags, lang = parsing.parse_record(canonical)
            created_raw = record.get("createdAt")
            try:
                created_at = parse_rfc3339(created_raw) if isinstance(created_raw, str) else 0
            except ValueError:
                created_at = 0
            out[uri] = ResolvedPost(
                post_uri=uri,
                actor_id=did,
                created_at=created_at,
                text=canonical["text"],
                lang=lang,
                hashtags=tuple(hashtags),
                urls=tuple(urls),
            )
        return out


class LocalResolver:
    """Resolver facade answering from stored posts only; used for replay
    ingestion where every origin post is expected in the same file."""

    def __init__(self, store: Store):
        self._store = store
        self.metrics = ResolverMetrics()

    def resolve(self, refs: Sequence[StrongRef]) -> dict:
        out = {}
        for ref in refs:
            stored = self._store.get_post(ref.target_uri)
            if stored is None:
                self.metrics.not_found += 1
                out[ref.target_uri] = Resolution(Outcome.NOT_FOUND)
            else:
                self.metrics.resolved += 1
                out[ref.target_uri] = Resolution(Outcome.RESOLVED, _resolved_from_stored(stored))
        return out

    def close(self) -> None:
        pass
