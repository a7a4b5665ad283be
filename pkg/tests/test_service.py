"""REST API: response payloads against direct store queries, strict query
validation, cache headers and byte-identical reads."""

import json

import pytest
from fastapi.testclient import TestClient

from conftest import make_table
from newsky.analytics import jobs as jobs_mod
from newsky.config import Config
from newsky.pipeline import META_COUNTERS, META_LAST_CURSOR, META_LAST_EVENT_AT
from newsky.ratings import Orientation, StaticRatings
from newsky.service.app import create_app
from newsky.store import Engagement, NewsLinkObservation, Store, StoredPost
from newsky.timeutil import DAY, HOUR, format_rfc3339

T0 = 1717200000  # 2024-06-01T00:00:00Z
ISO0 = "2024-06-01T00:00:00Z"
ISO3H = "2024-06-01T03:00:00Z"
ISO_DAY = "2024-06-02T00:00:00Z"
WINDOW = f"{ISO0}/{ISO_DAY}"

TABLE = make_table(
    {"goodnews.test": (92.5, "en"), "solid.test": 75.0, "junknews.test": (20.0, "en"),
     "german.test": (90.0, "de")},
    {"goodnews.test": Orientation.LEAN_LEFT, "junknews.test": Orientation.LEFT,
     "german.test": Orientation.CENTER})


def obs(cursor, domain, at, kind="post", tags=(), actor="did:plc:a"):
    return NewsLinkObservation(
        event_cursor=cursor, event_kind=kind, actor_id=actor, observed_at=at,
        raw_url=f"https://{domain}/{cursor}", domain=domain,
        post_uri=f"at://{actor}/app.bsky.feed.post/{cursor}", hashtags=tuple(tags))


def seed_store(store):
    rows = [
        obs(1, "goodnews.test", T0 + 60),
        obs(2, "goodnews.test", T0 + 120),
        obs(3, "goodnews.test", T0 + 180, kind="like"),
        obs(4, "junknews.test", T0 + 240),
        obs(5, "nobody-rated.me", T0 + 300),
        obs(6, "nobody-rated.me", T0 + 2 * HOUR + 10),
        obs(7, "german.test", T0 + 360),
        # tag triangle: (a,b) balanced, (b,c) unreliable-only, (a,c) unreliable
        obs(10, "junknews.test", T0 + 400, tags=("a", "b")),
        obs(11, "goodnews.test", T0 + 410, tags=("a", "b")),
        obs(12, "junknews.test", T0 + 420, tags=("b", "c")),
        obs(13, "junknews.test", T0 + 430, tags=("b", "c")),
        obs(14, "junknews.test", T0 + 440, tags=("a", "c")),
    ]
    # hour 3: exact 98 reliable / 2 unreliable split
    rows += [obs(100 + i, "goodnews.test", T0 + 3 * HOUR + i) for i in range(98)]
    rows += [obs(300, "junknews.test", T0 + 3 * HOUR + 200),
             obs(301, "junknews.test", T0 + 3 * HOUR + 201)]
    store.record_observations(rows)

    # two engagement triangles for the audiences job
    def post_for(actor, n, text):
        return StoredPost(post_uri=f"at://{actor}/app.bsky.feed.post/{n}",
                          actor_id=actor, created_at=T0 + 500, text=text,
                          lang="en", hashtags=(), urls=(("https://bbc.com/x", "bbc.com"),))

    solar = ["did:plc:u1", "did:plc:u2", "did:plc:u3"]
    sports = ["did:plc:v1", "did:plc:v2", "did:plc:v3"]
    posts = [post_for(actor, i, "solar panels energy grid storage")
             for i, actor in enumerate(solar)]
    posts += [post_for(actor, i + 10, "football match goal referee")
              for i, actor in enumerate(sports)]
    store.upsert_posts(posts)
    engagements = []
    cursor = 1000
    for group in (solar, sports):
        for a in group:
            for b in group:
                if a < b:
                    cursor += 1
                    engagements.append(Engagement(
                        event_cursor=cursor, kind="like", actor_id=a,
                        subject_uri=f"at://{b}/app.bsky.feed.post/0",
                        subject_actor=b, observed_at=T0 + 600,
                        has_news_links=True))
    store.record_engagements(engagements)

    store.set_meta(META_LAST_CURSOR, "301")
    store.set_meta(META_LAST_EVENT_AT, str(T0 + 3 * HOUR + 201))
    store.set_meta(META_COUNTERS, json.dumps({
        "events_delivered": 120, "decode_errors": 3, "cursor_gaps": 1,
        "reconnects": 2, "duplicates_dropped": 4}))


@pytest.fixture(scope="module")
def service(tmp_path_factory):
    store = Store(tmp_path_factory.mktemp("svc") / "svc.db")
    seed_store(store)
    payload = jobs_mod.audiences_job(store, T0, T0 + DAY, seed=42, top_words=20)
    store.save_job(jobs_mod.AUDIENCES_JOB, T0, T0 + DAY, {"seed": 42},
                   payload, created_at=T0 + 700)
    app = create_app(Config(), store, StaticRatings(TABLE))
    with TestClient(app) as client:
        yield client, store
    store.close()


@pytest.fixture(scope="module")
def client(service):
    return service[0]


def test_prevalence_absolute_matches_store(service):
    client, store = service
    response = client.get("/v1/prevalence",
                          params={"from": ISO0, "to": ISO3H, "granularity": "hour"})
    assert response.status_code == 200
    body = response.json()
    expected = store.query_absolute(T0, T0 + 3 * HOUR, "hour", TABLE)
    assert len(body) == 3
    for got, want in zip(body, expected):
        assert got == {"bucket": format_rfc3339(want.bucket_start),
                       "total_links": want.total_links,
                       "total_rated": want.total_rated,
                       "reliable": want.reliable,
                       "unreliable": want.unreliable}


def test_prevalence_relative_with_null_gap(client):
    response = client.get("/v1/prevalence", params={
        "mode": "relative", "from": ISO0,
        "to": "2024-06-01T04:00:00Z", "granularity": "hour"})
    body = response.json()
    assert [point["bucket"] for point in body] == [
        "2024-06-01T00:00:00Z", "2024-06-01T01:00:00Z",
        "2024-06-01T02:00:00Z", "2024-06-01T03:00:00Z"]
    assert body[1]["ratio"] is None  # empty hour
    assert body[2]["ratio"] is None  # unrated-only hour
    assert body[3]["ratio"] == 0.02  # 2 of 100 rated links


def test_prevalence_cache_header_and_identical_bytes(client):
    url = f"/v1/prevalence?from={ISO0}&to={ISO3H}"
    first = client.get(url)
    second = client.get(url)
    assert first.headers["cache-control"] == "max-age=60"
    assert first.content == second.content


def test_prevalence_dedup_and_kinds_params(service):
    client, store = service
    response = client.get("/v1/prevalence", params={
        "from": ISO0, "to": ISO3H, "kinds": "post,repost", "dedup": "per_post"})
    expected = store.query_absolute(T0, T0 + 3 * HOUR, "hour", TABLE,
                                    dedup="per_post", kinds=("post", "repost"))
    assert [b["total_links"] for b in response.json()] == [
        b.total_links for b in expected]


@pytest.mark.parametrize("params,fragment", [
    ({"to": ISO3H}, "from and to are required"),
    ({"from": ISO0, "to": "yesterday"}, "RFC 3339"),
    ({"from": ISO3H, "to": ISO0}, "precedes"),
    ({"from": ISO0, "to": ISO3H, "mode": "both"}, "mode"),
    ({"from": ISO0, "to": ISO3H, "granularity": "week"}, "granularity"),
    ({"from": ISO0, "to": ISO3H, "dedup": "per_actor"}, "dedup"),
    ({"from": ISO0, "to": ISO3H, "kinds": "post,share"}, "kinds"),
    ({"from": ISO0, "to": ISO3H, "kinds": ","}, "kinds"),
])
def test_prevalence_rejects_bad_params(client, params, fragment):
    response = client.get("/v1/prevalence", params=params)
    assert response.status_code == 400
    assert fragment in response.json()["detail"]


@pytest.mark.parametrize("path,params", [
    ("/v1/prevalence", {"from": ISO0, "to": ISO3H}),
    ("/v1/prevalence/export", {"from": ISO0, "to": ISO3H}),
    ("/v1/domains/top", {}),
    ("/v1/hashtag-graph", {"window": WINDOW}),
    ("/v1/audiences", {"window": WINDOW}),
    ("/v1/orientation", {"window": WINDOW}),
    ("/v1/health", {}),
])
def test_unknown_query_parameter_rejected_everywhere(client, path, params):
    ok = client.get(path, params=params)
    assert ok.status_code == 200, path
    bad = client.get(path, params={**params, "bogus": "1"})
    assert bad.status_code == 400, path
    assert "bogus" in bad.json()["detail"]


def test_range_too_large_is_416(client):
    response = client.get("/v1/prevalence", params={
        "from": "2000-01-01T00:00:00Z", "to": "2020-01-01T00:00:00Z",
        "granularity": "hour"})
    assert response.status_code == 416
    assert "buckets" in response.json()["detail"]


def test_prevalence_export_csv(service):
    client, store = service
    response = client.get("/v1/prevalence/export",
                          params={"from": ISO0, "to": ISO3H})
    assert response.status_code == 200
    assert response.headers["content-type"].startswith("text/csv")
    lines = response.text.splitlines()
    assert lines[0] == "bucket_start,total_links,total_rated,reliable,unreliable"
    expected = store.query_absolute(T0, T0 + 3 * HOUR, "hour", TABLE)
    assert len(lines) == 1 + len(expected)
    first = expected[0]
    assert lines[1] == (f"{format_rfc3339(first.bucket_start)},{first.total_links},"
                        f"{first.total_rated},{first.reliable},{first.unreliable}")


def test_domains_top(client):
    response = client.get("/v1/domains/top", params={
        "from": ISO0, "to": ISO_DAY, "class": "unreliable", "limit": 5})
    rows = response.json()
    assert rows[0]["domain"] == "junknews.test"
    assert rows[0]["rank"] == 1
    all_rows = client.get("/v1/domains/top", params={"limit": 3}).json()
    assert [row["rank"] for row in all_rows] == [1, 2, 3]
    assert all_rows[0]["domain"] == "goodnews.test"
    assert client.get("/v1/domains/top", params={"limit": 0}).status_code == 400
    assert client.get("/v1/domains/top",
                      params={"class": "rated"}).status_code == 400


def test_hashtag_graph_payload_and_k_filter(client):
    response = client.get("/v1/hashtag-graph", params={"window": WINDOW})
    assert response.status_code == 200
    payload = response.json()
    assert payload["k"] == 0
    assert [node["tag"] for node in payload["nodes"]] == ["a", "b", "c"]
    edges = {(e["source"], e["target"]): e for e in payload["edges"]}
    assert edges[("a", "b")]["weight"] == 0.0
    assert edges[("a", "b")]["w_ut"] == 1
    assert edges[("b", "c")]["weight"] == 1.0
    assert edges[("a", "c")]["weight"] == 1.0
    cored = client.get("/v1/hashtag-graph",
                       params={"window": WINDOW, "k": 2}).json()
    assert [node["tag"] for node in cored["nodes"]] == ["a", "b", "c"]
    empty = client.get("/v1/hashtag-graph",
                       params={"window": WINDOW, "k": 3}).json()
    assert empty["nodes"] == [] and empty["edges"] == []


def test_hashtag_graph_min_cooccurrence(client):
    response = client.get("/v1/hashtag-graph", params={
        "window": WINDOW, "min_cooccurrence": 2})
    payload = response.json()
    assert {(e["source"], e["target"]) for e in payload["edges"]} == {
        ("a", "b"), ("b", "c")}


@pytest.mark.parametrize("params,fragment", [
    ({}, "window parameter is required"),
    ({"window": ISO0}, "window must be"),
    ({"window": f"{ISO_DAY}/{ISO0}"}, "precedes"),
    ({"window": f"{ISO0}/{ISO0}"}, "window is empty"),
    ({"window": WINDOW, "k": -1}, "k must be"),
    ({"window": WINDOW, "min_cooccurrence": 0}, "min_cooccurrence"),
])
def test_hashtag_graph_rejects_bad_params(client, params, fragment):
    response = client.get("/v1/hashtag-graph", params=params)
    assert response.status_code == 400
    assert fragment in response.json()["detail"]


def test_audiences_served_from_saved_job(client):
    response = client.get("/v1/audiences", params={"window": WINDOW})
    assert response.status_code == 200
    payload = response.json()
    assert payload["window_from"] == ISO0
    assert payload["window_to"] == ISO_DAY
    assert payload["seed"] == 42
    assert payload["node_count"] == 6
    assert payload["edge_count"] == 6
    assert len(payload["communities"]) == 2
    sizes = [c["size"] for c in payload["communities"]]
    assert sizes == [3, 3]
    words = {w["word"] for c in payload["communities"] for w in c["top_words"]}
    assert "solar" in words and "football" in words


def test_audiences_top_words_truncation(client):
    response = client.get("/v1/audiences",
                          params={"window": WINDOW, "top_words": 1})
    payload = response.json()
    assert all(len(c["top_words"]) == 1 for c in payload["communities"])
    assert client.get("/v1/audiences", params={
        "window": WINDOW, "top_words": 0}).status_code == 400


def test_audiences_unrun_window_is_409(client):
    response = client.get("/v1/audiences", params={
        "window": f"{ISO0}/{ISO3H}"})
    assert response.status_code == 409
    assert "not been run" in response.json()["detail"]


def test_orientation_endpoint(client):
    response = client.get("/v1/orientation", params={"window": WINDOW})
    assert response.status_code == 200
    payload = response.json()
    reliable = payload["reliable"]
    # goodnews 99+2+1 lean-left links, german 1 center link
    assert reliable["base_links"] == 103
    assert reliable["shares"]["lean_left"] == pytest.approx(100 * 102 / 103)
    assert reliable["shares"]["center"] == pytest.approx(100 * 1 / 103)
    assert payload["unreliable"]["shares"]["left"] == 100.0
    german_only = client.get("/v1/orientation", params={
        "window": WINDOW, "lang": "de"}).json()
    assert german_only["reliable"]["base_links"] == 1
    assert german_only["reliable"]["shares"]["center"] == 100.0


def test_health_payload(client):
    response = client.get("/v1/health")
    assert response.status_code == 200
    payload = response.json()
    assert payload["status"] == "ok"
    ingest = payload["ingest"]
    assert ingest["last_cursor"] == 301
    assert ingest["events_delivered"] == 120
    assert ingest["decode_error_count"] == 3
    assert ingest["cursor_gaps"] == 1
    assert ingest["reconnects"] == 2
    assert ingest["duplicates_dropped"] == 4
    assert ingest["lag_seconds"] > 0
    assert payload["store"]["observations"] > 0
    assert payload["store"]["engagements"] == 6
    assert payload["rated_domains"] == 4


def test_health_lag_none_without_ingest(tmp_path):
    store = Store(tmp_path / "fresh.db")
    try:
        app = create_app(Config(), store, StaticRatings(TABLE))
        with TestClient(app) as client:
            payload = client.get("/v1/health").json()
        assert payload["ingest"]["lag_seconds"] is None
        assert payload["ingest"]["last_cursor"] is None
        assert payload["store"]["observations"] == 0
    finally:
        store.close()


def test_openapi_served_under_prefix(client):
    response = client.get("/v1/openapi.json")
    assert response.status_code == 200
    paths = response.json()["paths"]
    assert "/v1/prevalence" in paths
    assert "/v1/health" in paths
