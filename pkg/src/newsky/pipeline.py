"""Ingest pipeline: drain a firehose stream, parse posts, resolve
engagement subjects, and persist observations, engagements and post
records in batched transactions.

Timestamps: a link observation carries the timestamp of the event that
produced it, so a like contributes at like time, not at the origin post's
creation time.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from typing import Optional

from . import parsing
from .ingest import IngestMetrics
from .ingest.events import EventKind, FirehoseEvent
from .resolver import Outcome
from .store import Engagement, NewsLinkObservation, Store, StoredPost

log = logging.getLogger(__name__)

DEFAULT_FLUSH_EVERY = 200

META_LAST_CURSOR = "ingest.last_cursor"
META_LAST_EVENT_AT = "ingest.last_event_at"
META_COUNTERS = "ingest.counters"


@dataclass
class PipelineStats:
    events: int = 0
    posts: int = 0
    engagements: int = 0
    observations: int = 0
    posts_stored: int = 0
    unresolved_engagements: int = 0
    last_cursor: Optional[int] = None
    last_event_at: Optional[int] = None


class Pipeline:
    def __init__(self, store: Store, resolver, flush_every: int = DEFAULT_FLUSH_EVERY):
        self.store = store
        self.resolver = resolver
        self.flush_every = max(1, flush_every)
        self.stats = PipelineStats()
        # persisted counters accumulate across sessions
        self._baseline = load_counters(store)

    def run(self, stream) -> PipelineStats:
        """Drain the stream to exhaustion (or until it is closed)."""
        pending: list = []
        try:
            for event in stream:
                pending.append(event)
                if len(pending) >= self.flush_every:
                    self.flush(pending, stream.metrics)
                    pending.clear()
        finally:
            self.flush(pending, stream.metrics)
        return self.stats

    def flush(self, events: list, metrics: Optional[IngestMetrics] = None) -> None:
        """Persist one batch. Origin posts land before engagements are
        resolved, so same-batch engagements of fresh posts resolve locally."""
        observations: list = []
        posts: list = []
        engagement_events: list = []

        for event in events:
            self.stats.events += 1
            self.stats.last_cursor = event.cursor
            if self.stats.last_event_at is None or event.created_at > self.stats.last_event_at:
                self.stats.last_event_at = event.created_at
            if event.kind is EventKind.POST:
                self._handle_post(event, observations, posts)
            elif event.kind in (EventKind.REPOST, EventKind.LIKE):
                engagement_events.append(event)

        self.store.upsert_posts(posts)
        self.store.record_observations(observations)
        self.stats.observations += len(observations)
        self.stats.posts_stored += len(posts)

        if engagement_events:
            self._handle_engagements(engagement_events)
        self._persist_metrics(metrics)

    def _handle_post(self, event: FirehoseEvent, observations: list, posts: list) -> None:
        self.stats.posts += 1
        parsed = parsing.parse_post(event)
        if not parsed.urls:
            return
        posts.append(StoredPost(
            post_uri=parsed.post_uri,
            actor_id=parsed.actor_id,
            created_at=parsed.created_at,
            text=(event.record or {}).get("text") or "",
            lang=parsed.lang,
            hashtags=tuple(parsed.hashtags),
            urls=tuple(parsed.urls),
        ))
        for raw_url, domain in parsed.urls:
            observations.append(NewsLinkObservation(
                event_cursor=event.cursor,
                event_kind="post",
                actor_id=parsed.actor_id,
                observed_at=parsed.created_at,
                raw_url=raw_url,
                domain=domain,
                post_uri=parsed.post_uri,
                hashtags=tuple(parsed.hashtags),
            ))

    def _handle_engagements(self, events: list) -> None:
        refs = [event.subject_ref for event in events]
        outcomes = self.resolver.resolve(refs)

        observations: list = []
        engagements: list = []
        origin_posts: dict = {}
        for event in events:
            self.stats.engagements += 1
            uri = event.subject_ref.target_uri
            resolution = outcomes.get(uri)
            post = resolution.post if resolution is not None else None
            if resolution is None or resolution.outcome is Outcome.FAILED:
                self.stats.unresolved_engagements += 1
            has_news_links = bool(post and post.urls)
            subject_actor = (post.actor_id if post else None) or parsing.actor_of_uri(uri) or ""
            engagements.append(Engagement(
                event_cursor=event.cursor,
                kind=event.kind.value,
                actor_id=event.actor_id,
                subject_uri=uri,
                subject_actor=subject_actor,
                observed_at=event.created_at,
                has_news_links=has_news_links,
            ))
            if not has_news_links:
                continue
            origin_posts[post.post_uri] = post
            for raw_url, domain in post.urls:
                observations.append(NewsLinkObservation(
                    event_cursor=event.cursor,
                    event_kind=event.kind.value,
                    actor_id=event.actor_id,
                    observed_at=event.created_at,
                    raw_url=raw_url,
                    domain=domain,
                    post_uri=post.post_uri,
                    hashtags=post.hashtags,
                ))

        self.store.upsert_posts([
            StoredPost(
                post_uri=post.post_uri,
                actor_id=post.actor_id,
                created_at=post.created_at,
                text=post.text,
                lang=post.lang,
                hashtags=post.hashtags,
                urls=post.urls,
            )
            for post in origin_posts.values()
            if self.store.get_post(post.post_uri) is None
        ])
        self.store.record_engagements(engagements)
        self.store.record_observations(observations)
        self.stats.observations += len(observations)

    def _persist_metrics(self, metrics: Optional[IngestMetrics]) -> None:
        if self.stats.last_cursor is not None:
            self.store.set_meta(META_LAST_CURSOR, str(self.stats.last_cursor))
        if self.stats.last_event_at is not None:
            self.store.set_meta(META_LAST_EVENT_AT, str(self.stats.last_event_at))
        session = {
            "events_delivered": metrics.events_delivered if metrics else self.stats.events,
            "decode_errors": metrics.decode_errors if metrics else 0,
            "cursor_gaps": metrics.cursor_gaps if metrics else 0,
            "reconnects": metrics.reconnects if metrics else 0,
            "duplicates_dropped": metrics.duplicates_dropped if metrics else 0,
            "observations": self.stats.observations,
            "posts": self.stats.posts,
            "engagements": self.stats.engagements,
            "unresolved_engagements": self.stats.unresolved_engagements,
        }
        counters = {
            key: self._baseline.get(key, 0) + value for key, value in session.items()
        }
        self.store.set_meta(META_COUNTERS, json.dumps(counters, sort_keys=True))


def load_counters(store: Store) -> dict:
    raw = store.get_meta(META_COUNTERS)
    return json.loads(raw) if raw else {}


def last_cursor(store: Store) -> Optional[int]:
    raw = store.get_meta(META_LAST_CURSOR)
    return int(raw) if raw else None


def last_event_at(store: Store) -> Optional[int]:
    raw = store.get_meta(META_LAST_EVENT_AT)
    return int(raw) if raw else None
