"""Ingest pipeline: replay files through to stored observations,
engagements, posts and persisted counters."""

import json

from conftest import (
    FIXTURES,
    engagement_line,
    load_manifest,
    post_line,
    uri_for,
    write_replay,
)
from newsky.ingest.stream import ReplaySource, connect
from newsky.pipeline import (
    META_COUNTERS,
    META_LAST_CURSOR,
    META_LAST_EVENT_AT,
    Pipeline,
    last_cursor,
    last_event_at,
    load_counters,
)
from newsky.resolver import LocalResolver
from newsky.store import Store

T0 = 1717200000  # 2024-06-01T00:00:00Z


def run_replay(store, path, flush_every=200, resume_cursor=None):
    pipeline = Pipeline(store, LocalResolver(store), flush_every=flush_every)
    with connect(ReplaySource(path, resume_cursor=resume_cursor)) as stream:
        stats = pipeline.run(stream)
    return stats


def small_replay(tmp_path):
    poster = "did:plc:poster"
    return write_replay(tmp_path / "small.jsonl", [
        post_line(1, actor=poster, links=["https://bbc.com/story1"],
                  tags=("Breaking",), text="read this #Breaking",
                  created_at="2024-06-01T00:10:00Z"),
        post_line(2, actor=poster, text="no links here",
                  created_at="2024-06-01T00:11:00Z"),
        engagement_line("like", 3, uri_for(poster, 1),
                        created_at="2024-06-01T01:00:00Z"),
        engagement_line("repost", 4, uri_for(poster, 2), actor="did:plc:echo",
                        created_at="2024-06-01T01:05:00Z"),
        engagement_line("like", 5, uri_for("did:plc:ghost", 999),
                        created_at="2024-06-01T01:10:00Z"),
    ])


def test_small_replay_end_to_end(store, tmp_path):
    stats = run_replay(store, small_replay(tmp_path))
    assert stats.events == 5
    assert stats.posts == 2
    assert stats.engagements == 3
    # post link + like-of-linked-post link
    assert stats.observations == 2
    assert stats.posts_stored == 1  # linkless post is not retained
    assert stats.last_cursor == 5

    counts = store.counts()
    assert counts == {"observations": 2, "engagements": 3, "posts": 1,
                      "resolutions": 0}
    domains = store.domain_counts(T0, T0 + 7200)
    assert domains == {"bbc.com": 2}


def test_engagement_observation_uses_engagement_time(store, tmp_path):
    run_replay(store, small_replay(tmp_path))
    by_kind = store.domain_counts(T0, T0 + 3600, kinds=["post"])
    assert by_kind == {"bbc.com": 1}
    like_hour = store.domain_counts(T0 + 3600, T0 + 7200, kinds=["like"])
    assert like_hour == {"bbc.com": 1}


def test_engagement_rows_cover_linkless_and_missing_subjects(store, tmp_path):
    run_replay(store, small_replay(tmp_path))
    edges = store.engagement_edges(T0, T0 + DAY_SECONDS, news_only=False)
    assert edges == {("did:plc:echo", "did:plc:poster"): 1,
                     ("did:plc:fan", "did:plc:ghost"): 1,
                     ("did:plc:fan", "did:plc:poster"): 1}
    news_edges = store.engagement_edges(T0, T0 + DAY_SECONDS)
    assert news_edges == {("did:plc:fan", "did:plc:poster"): 1}


DAY_SECONDS = 86400


def test_missing_subject_counts_unresolved(store, tmp_path):
    stats = run_replay(store, small_replay(tmp_path))
    # ghost subject: LocalResolver reports NotFound, which is a resolved
    # outcome, not a transient failure
    assert stats.unresolved_engagements == 0
    ghost = uri_for("did:plc:ghost", 999)
    row = [e for e in iter_engagements(store) if e[3] == ghost]
    assert len(row) == 1
    assert row[0][6] == 0  # has_news_links false


def iter_engagements(store):
    return list(store._conn().execute(
        "SELECT event_cursor, kind, actor_id, subject_uri, subject_actor,"
        " observed_at, has_news_links FROM engagements ORDER BY event_cursor"))


def test_stored_post_carries_text_and_tags(store, tmp_path):
    run_replay(store, small_replay(tmp_path))
    poster_uri = uri_for("did:plc:poster", 1)
    post = store.get_post(poster_uri)
    assert post.text == "read this #Breaking"
    assert post.hashtags == ("breaking",)
    assert post.urls == (("https://bbc.com/story1", "bbc.com"),)
    assert post.lang == "en"


def test_meta_and_counters_persisted(store, tmp_path):
    run_replay(store, small_replay(tmp_path))
    assert last_cursor(store) == 5
    assert last_event_at(store) == T0 + 4200  # 01:10:00Z
    counters = load_counters(store)
    assert counters["events_delivered"] == 5
    assert counters["observations"] == 2
    assert counters["engagements"] == 3
    assert counters["decode_errors"] == 0


def test_counters_accumulate_across_sessions(store, tmp_path):
    path = small_replay(tmp_path)
    run_replay(store, path)
    first = load_counters(store)
    # resume from the end: nothing delivered, only the dedup counter moves
    stats = run_replay(store, path, resume_cursor=5)
    assert stats.events == 0
    after_resume = load_counters(store)
    assert after_resume["duplicates_dropped"] == first["duplicates_dropped"] + 5
    unchanged = {k: v for k, v in after_resume.items() if k != "duplicates_dropped"}
    assert unchanged == {k: v for k, v in first.items() if k != "duplicates_dropped"}
    # a second full pass doubles the event counter (dup rows are
    # engagement-idempotent, observations append)
    run_replay(store, path)
    second = load_counters(store)
    assert second["events_delivered"] == 2 * first["events_delivered"]
    assert second["engagements"] == 2 * first["engagements"]


def test_resume_after_interrupt_is_idempotent(store, tmp_path):
    path = small_replay(tmp_path)
    run_replay(store, path)
    baseline = store.counts()
    stats = run_replay(store, path, resume_cursor=last_cursor(store))
    assert stats.events == 0
    assert store.counts() == baseline
    assert last_cursor(store) == 5


def test_small_flush_batches_match_large(tmp_path):
    path = small_replay(tmp_path)
    a = Store(tmp_path / "a.db")
    b = Store(tmp_path / "b.db")
    try:
        run_replay(a, path, flush_every=1)
        run_replay(b, path, flush_every=1000)
        assert a.counts() == b.counts()
        assert a.domain_counts(T0, T0 + DAY_SECONDS) == b.domain_counts(
            T0, T0 + DAY_SECONDS)
    finally:
        a.close()
        b.close()


def test_same_batch_engagement_resolves_locally(store, tmp_path):
    # like lands in the same flush as its origin post
    path = write_replay(tmp_path / "batch.jsonl", [
        post_line(1, links=["https://npr.org/x"]),
        engagement_line("like", 2, uri_for("did:plc:poster", 1)),
    ])
    stats = run_replay(store, path, flush_every=10)
    assert stats.observations == 2
    assert stats.unresolved_engagements == 0


def test_bundled_corpus_stats_match_manifest(tmp_path):
    manifest = load_manifest("replay_10k.manifest.json")
    store = Store(tmp_path / "tenk.db")
    try:
        stats = run_replay(store, FIXTURES / "replay_10k.jsonl")
        assert stats.events == manifest["total_events"]
        assert stats.posts == manifest["events_by_kind"]["post"]
        assert stats.engagements == (manifest["events_by_kind"]["repost"]
                                     + manifest["events_by_kind"]["like"])
        assert stats.observations == manifest["observations_total"]
        assert stats.posts_stored == manifest["posts_with_links"]
        assert stats.last_cursor == manifest["last_cursor"]
        assert last_cursor(store) == manifest["last_cursor"]
        counters = load_counters(store)
        assert counters["events_delivered"] == manifest["total_events"]
        assert counters["unresolved_engagements"] == 0
    finally:
        store.close()
