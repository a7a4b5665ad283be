"""Read-side REST API over the store and the current ratings snapshot.

Contract rules enforced here: every endpoint rejects unknown query
parameters with 400, window math is half-open, and responses for
identical requests against unchanged data are byte-identical.
"""

from __future__ import annotations

import time
from typing import Optional

from fastapi import Depends, FastAPI, HTTPException, Request, Response

from .. import pipeline, timeutil
from ..analytics import jobs as jobs_mod
from ..analytics.graph import graph_payload, k_core
from ..analytics.reports import orientation_distribution, rank_frequency
from ..config import Config
from ..store import DEDUP_MODES, GRANULARITIES, KINDS, RangeTooLarge, Store
from ..ratings import RatingTable
from . import schemas

API_PREFIX = "/v1"


def _bad_request(message: str) -> HTTPException:
    return HTTPException(status_code=400, detail=message)


def strict_params(*allowed: str):
    allowed_set = set(allowed)

    def checker(request: Request) -> None:
        unknown = [key for key in request.query_params if key not in allowed_set]
        if unknown:
            raise _bad_request(f"unknown query parameter(s): {', '.join(sorted(unknown))}")

    return Depends(checker)


def _parse_ts(value: str, name: str) -> int:
    try:
        return timeutil.parse_rfc3339(value)
    except ValueError:
        raise _bad_request(f"{name} is not a valid RFC 3339 timestamp: {value!r}") from None


def _parse_window(value: Optional[str]) -> tuple:
    """`window` is "<from>/<to>", both RFC 3339, half-open."""
    if value is None:
        raise _bad_request("window parameter is required (from/to, RFC 3339)")
    parts = value.split("/")
    if len(parts) != 2:
        raise _bad_request("window must be <from>/<to>")
    from_ts = _parse_ts(parts[0], "window start")
    to_ts = _parse_ts(parts[1], "window end")
    if to_ts < from_ts:
        raise _bad_request("window end precedes window start")
    return from_ts, to_ts


def _parse_kinds(value: Optional[str]) -> Optional[tuple]:
    if value is None:
        return None
    kinds = tuple(part.strip() for part in value.split(",") if part.strip())
    bad = [kind for kind in kinds if kind not in KINDS]
    if bad or not kinds:
        raise _bad_request(f"kinds must be a comma-separated subset of {','.join(KINDS)}")
    return kinds


def create_app(config: Config, store: Store, ratings_manager) -> FastAPI:
    app = FastAPI(
        title="newsky",
        version="0.1.0",
        openapi_url=f"{API_PREFIX}/openapi.json",
        docs_url=f"{API_PREFIX}/docs",
        redoc_url=None,
    )
    app.state.config = config
    app.state.store = store
    app.state.ratings = ratings_manager
    cache_header = f"max-age={config.cache_max_age}"

    def current_table() -> RatingTable:
        ratings_manager.maybe_reload()
        return ratings_manager.table

    @app.get(f"{API_PREFIX}/prevalence", dependencies=[
        strict_params("mode", "granularity", "from", "to", "kinds", "dedup")])
    def prevalence(
        request: Request,
        response: Response,
        mode: str = "absolute",
        granularity: str = "hour",
        dedup: str = "per_link",
    ):
        if mode not in ("absolute", "relative"):
            raise _bad_request("mode must be absolute or relative")
        if granularity not in GRANULARITIES:
            raise _bad_request(f"granularity must be one of {','.join(GRANULARITIES)}")
        if dedup not in DEDUP_MODES:
            raise _bad_request(f"dedup must be one of {','.join(DEDUP_MODES)}")
        raw_from = request.query_params.get("from")
        raw_to = request.query_params.get("to")
        if raw_from is None or raw_to is None:
            raise _bad_request("from and to are required (RFC 3339)")
        from_ts = _parse_ts(raw_from, "from")
        to_ts = _parse_ts(raw_to, "to")
        if to_ts < from_ts:
            raise _bad_request("to precedes from")
        kinds = _parse_kinds(request.query_params.get("kinds"))
        table = current_table()
        try:
            if mode == "relative":
                series = store.query_relative(from_ts, to_ts, granularity, table, dedup, kinds)
                body = [
                    schemas.RelativePoint(bucket=timeutil.format_rfc3339(bucket), ratio=ratio)
                    for bucket, ratio in series
                ]
            else:
                buckets = store.query_absolute(from_ts, to_ts, granularity, table, dedup, kinds)
                body = [
                    schemas.AbsoluteBucket(
                        bucket=timeutil.format_rfc3339(b.bucket_start),
                        total_links=b.total_links,
                        total_rated=b.total_rated,
                        reliable=b.reliable,
                        unreliable=b.unreliable,
                    )
                    for b in buckets
                ]
        except RangeTooLarge as exc:
            raise HTTPException(status_code=416, detail=str(exc)) from None
        response.headers["Cache-Control"] = cache_header
        return body

    @app.get(f"{API_PREFIX}/prevalence/export",
             dependencies=[strict_params("granularity", "from", "to", "kinds", "dedup")])
    def prevalence_export(
        request: Request,
        granularity: str = "hour",
        dedup: str = "per_link",
    ):
        if granularity not in GRANULARITIES:
            raise _bad_request(f"granularity must be one of {','.join(GRANULARITIES)}")
        if dedup not in DEDUP_MODES:
            raise _bad_request(f"dedup must be one of {','.join(DEDUP_MODES)}")
        raw_from = request.query_params.get("from")
        raw_to = request.query_params.get("to")
        if raw_from is None or raw_to is None:
            raise _bad_request("from and to are required (RFC 3339)")
        from_ts = _parse_ts(raw_from, "from")
        to_ts = _parse_ts(raw_to, "to")
        if to_ts < from_ts:
            raise _bad_request("to precedes from")
        kinds = _parse_kinds(request.query_params.get("kinds"))
        try:
            buckets = store.query_absolute(from_ts, to_ts, granularity, current_table(), dedup, kinds)
        except RangeTooLarge as exc:
            raise HTTPException(status_code=416, detail=str(exc)) from None
        lines = ["bucket_start,total_links,total_rated,reliable,unreliable"]
        lines += [
            f"{timeutil.format_rfc3339(b.bucket_start)},{b.total_links},"
            f"{b.total_rated},{b.reliable},{b.unreliable}"
            for b in buckets
        ]
        return Response("\n".join(lines) + "\n", media_type="text/csv",
                        headers={"Cache-Control": cache_header})

    @app.get(f"{API_PREFIX}/domains/top", response_model=list[schemas.RankRow],
             dependencies=[strict_params("class", "limit", "from", "to", "kinds", "dedup")])
    def domains_top(request: Request, limit: int = 10, dedup: str = "per_link"):
        klass = request.query_params.get("class", "all")
        if klass not in ("reliable", "unreliable", "all"):
            raise _bad_request("class must be reliable, unreliable or all")
        if not 1 <= limit <= 1000:
            raise _bad_request("limit must be between 1 and 1000")
        if dedup not in DEDUP_MODES:
            raise _bad_request(f"dedup must be one of {','.join(DEDUP_MODES)}")
        raw_from = request.query_params.get("from")
        raw_to = request.query_params.get("to")
        from_ts = _parse_ts(raw_from, "from") if raw_from else 0
        to_ts = _parse_ts(raw_to, "to") if raw_to else 2**62
        kinds = _parse_kinds(request.query_params.get("kinds"))
        table = current_table()
        counts = store.domain_counts(from_ts, to_ts, dedup, kinds)
        entries = rank_frequency(counts, table, klass, limit)
        return [
            schemas.RankRow(rank=e.rank, domain=e.domain, frequency=e.frequency)
            for e in entries
        ]

    @app.get(f"{API_PREFIX}/hashtag-graph", response_model=schemas.GraphPayload,
             dependencies=[strict_params("k", "window", "min_cooccurrence")])
    def hashtag_graph(request: Request, k: int = 0, min_cooccurrence: int = 1):
        if k < 0:
            raise _bad_request("k must be >= 0")
        if min_cooccurrence < 1:
            raise _bad_request("min_cooccurrence must be >= 1")
        from_ts, to_ts = _parse_window(request.query_params.get("window"))
        table = current_table()
        try:
            graph = jobs_mod.hashtag_graph_job(
                store, table, from_ts, to_ts,
                min_cooccurrence=min_cooccurrence,
                mixed_counts_as=app.state.config.mixed_counts_as,
            )
        except jobs_mod.EmptyWindow:
            raise _bad_request("window is empty") from None
        payload = graph_payload(k_core(graph, k))
        return schemas.GraphPayload(k=k, **payload)

    @app.get(f"{API_PREFIX}/audiences", response_model=schemas.AudiencesPayload,
             dependencies=[strict_params("window", "top_words")])
    def audiences(request: Request, top_words: int = 20):
        if not 1 <= top_words <= 200:
            raise _bad_request("top_words must be between 1 and 200")
        from_ts, to_ts = _parse_window(request.query_params.get("window"))
        payload = store.load_job(jobs_mod.AUDIENCES_JOB, from_ts, to_ts)
        if payload is None:
            raise HTTPException(
                status_code=409,
                detail="audiences job has not been run for this window",
            )
        communities = [
            schemas.Community(
                community_id=c["community_id"],
                size=c["size"],
                top_words=[schemas.CommunityWord(**w) for w in c["top_words"][:top_words]],
            )
            for c in payload["communities"]
        ]
        return schemas.AudiencesPayload(
            window_from=timeutil.format_rfc3339(payload["window_from"]),
            window_to=timeutil.format_rfc3339(payload["window_to"]),
            seed=payload["seed"],
            node_count=payload["node_count"],
            edge_count=payload["edge_count"],
            modularity=payload["modularity"],
            communities=communities,
        )

    @app.get(f"{API_PREFIX}/orientation", response_model=schemas.OrientationPayload,
             dependencies=[strict_params("window", "lang", "kinds", "dedup")])
    def orientation(request: Request, dedup: str = "per_link"):
        if dedup not in DEDUP_MODES:
            raise _bad_request(f"dedup must be one of {','.join(DEDUP_MODES)}")
        from_ts, to_ts = _parse_window(request.query_params.get("window"))
        kinds = _parse_kinds(request.query_params.get("kinds"))
        lang = request.query_params.get("lang")
        table = current_table()
        counts = store.domain_counts(from_ts, to_ts, dedup, kinds)
        dist = orientation_distribution(counts, table, lang=lang)
        return schemas.OrientationPayload(
            reliable=schemas.OrientationClass(**dist["reliable"]),
            unreliable=schemas.OrientationClass(**dist["unreliable"]),
        )

    @app.get(f"{API_PREFIX}/health", response_model=schemas.HealthPayload,
             dependencies=[strict_params()])
    def health():
        counters = pipeline.load_counters(store)
        last = pipeline.last_cursor(store)
        last_at = pipeline.last_event_at(store)
        lag = max(0.0, time.time() - last_at) if last_at is not None else None
        return schemas.HealthPayload(
            status="ok",
            ingest=schemas.IngestHealth(
                last_cursor=last,
                lag_seconds=lag,
                events_delivered=counters.get("events_delivered", 0),
                decode_error_count=counters.get("decode_errors", 0),
                cursor_gaps=counters.get("cursor_gaps", 0),
                reconnects=counters.get("reconnects", 0),
                duplicates_dropped=counters.get("duplicates_dropped", 0),
            ),
            store=schemas.StoreHealth(**store.counts()),
            rated_domains=len(ratings_manager.table),
        )

    return app
