"""Operator entry point: ingest, batch analytics, API serving.

Exit codes: 0 ok, 2 usage or input error, 3 runtime error. All logging is
line-delimited JSON on stderr; stdout carries only command results.
"""

from __future__ import annotations

import dataclasses
import json
import logging
import signal
import socket
import sys
import time
from pathlib import Path
from typing import Optional

import click
import networkx as nx
from filelock import FileLock, Timeout

from . import pipeline as pipeline_mod
from . import timeutil
from .analytics import jobs as jobs_mod
from .analytics.graph import export_edge_csv, export_node_csv, k_core
from .analytics.lexicon import export_lexicon_csv
from .analytics.reports import (
    export_orientation_csv,
    export_rank_frequency_csv,
    orientation_distribution,
    rank_frequency,
)
from .config import Config, ConfigError, load_config
from .ingest import ConnectFailed, LiveSource, ReplaySource, connect
from .ratings import RatingTable, SchemaError, StaticRatings, RatingsManager, load_ratings
from .resolver import LocalResolver, Resolver
from .store import Store

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_RUNTIME = 3


class JsonLineFormatter(logging.Formatter):
    def format(self, record: logging.LogRecord) -> str:
        entry = {
            "ts": round(record.created, 3),
            "level": record.levelname.lower(),
            "logger": record.name,
            "message": record.getMessage(),
        }
        if record.exc_info and record.exc_info[0] is not None:
            entry["error"] = repr(record.exc_info[1])
        return json.dumps(entry, ensure_ascii=False)


def _setup_logging(verbose: bool) -> None:
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(JsonLineFormatter())
    root = logging.getLogger()
    root.handlers[:] = [handler]
    root.setLevel(logging.DEBUG if verbose else logging.INFO)


def _load_config_or_die(path: Optional[str]) -> Config:
    try:
        return load_config(path)
    except ConfigError as exc:
        raise click.UsageError(str(exc)) from exc


def _ratings_manager(config: Config):
    if config.score_file is None:
        return StaticRatings(RatingTable.empty())
    try:
        return RatingsManager(
            config.score_file,
            config.mbfc_file,
            config.allsides_file,
            config.newsguard_file,
        )
    except (OSError, SchemaError) as exc:
        raise click.UsageError(f"cannot load ratings: {exc}") from exc


def _parse_source(value: str):
    scheme, sep, rest = value.partition(":")
    if not sep or not rest:
        raise click.UsageError("source must be live:<url> or replay:<path>")
    if scheme == "replay":
        path = Path(rest)
        if not path.is_file():
            raise click.UsageError(f"replay file not found: {path}")
        return ReplaySource(path)
    if scheme == "live":
        return LiveSource(rest)
    raise click.UsageError(f"unknown source scheme {scheme!r}")


def _parse_ts_opt(value: str, name: str) -> int:
    try:
        return timeutil.parse_rfc3339(value)
    except ValueError as exc:
        raise click.UsageError(f"--{name} is not a valid RFC 3339 timestamp: {value!r}") from exc


@click.group()
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
              default=None, help="TOML config file; env NEWSKY_<KEY> overrides.")
@click.option("--verbose", is_flag=True, default=False, help="Debug-level logs.")
@click.pass_context
def main(ctx: click.Context, config_path: Optional[str], verbose: bool) -> None:
    """News-source reliability observatory."""
    _setup_logging(verbose)
    ctx.obj = _load_config_or_die(config_path)


@main.command()
@click.option("--source", required=True, help="live:<url> or replay:<path>.")
@click.option("--resume-cursor", type=int, default=None,
              help="Start strictly after this cursor; defaults to the store's last cursor.")
@click.pass_obj
def ingest(config: Config, source: str, resume_cursor: Optional[int]) -> None:
    """Run the ingest pipeline until EOF or signal."""
    parsed = _parse_source(source)
    store = Store(config.store_path, max_buckets=config.max_buckets)

    if resume_cursor is None:
        resume_cursor = pipeline_mod.last_cursor(store)
    if resume_cursor is not None:
        parsed = dataclasses.replace(parsed, resume_cursor=resume_cursor)

    if isinstance(parsed, ReplaySource):
        resolver = LocalResolver(store)
    else:
        resolver = Resolver(
            config.appview_url,
            store,
            batch_limit=config.resolver_batch_limit,
            cache_capacity=config.resolver_cache_capacity,
            rate_per_sec=config.resolver_rate_per_sec,
            retries=config.resolver_retries,
        )

    lock = FileLock(str(Path(config.store_path).with_suffix(".lock")))
    try:
        lock.acquire(timeout=1.0)
    except Timeout:
        log.error("another ingest process holds the store lock")
        sys.exit(EXIT_RUNTIME)

    worker = pipeline_mod.Pipeline(store, resolver, flush_every=config.flush_every)

    def _sigterm(_signum, _frame):
        raise KeyboardInterrupt

    signal.signal(signal.SIGTERM, _sigterm)
    interrupted = False
    try:
        with connect(parsed, queue_size=config.queue_size) as stream:
            try:
                worker.run(stream)
            except KeyboardInterrupt:
                interrupted = True
                log.info("interrupted; flushed pending batch")
    except ConnectFailed as exc:
        log.error("cannot connect to source: %s", exc)
        sys.exit(EXIT_RUNTIME)
    finally:
        lock.release()
        resolver.close()

    cursor = worker.stats.last_cursor
    if cursor is None:
        cursor = pipeline_mod.last_cursor(store)
    click.echo(json.dumps({
        "resumable_cursor": cursor,
        "events": worker.stats.events,
        "observations": worker.stats.observations,
        "interrupted": interrupted,
    }))


@main.command()
@click.argument("job", type=click.Choice(["hashtag-graph", "audiences", "rankfreq", "orientation"]))
@click.option("--from", "from_str", required=True, help="Window start, RFC 3339 (inclusive).")
@click.option("--to", "to_str", required=True, help="Window end, RFC 3339 (exclusive).")
@click.option("--k", type=int, default=None, help="k-core to apply to the hashtag graph.")
@click.option("--seed", type=int, default=None, help="Community detection seed.")
@click.option("--class", "klass", type=click.Choice(["reliable", "unreliable", "all"]),
              default="all", help="Domain class for rankfreq.")
@click.option("--top-words", type=int, default=None, help="Words per community for audiences.")
@click.option("--min-cooccurrence", type=int, default=None)
@click.option("--out", "out_dir", type=click.Path(file_okay=False), default=".",
              help="Directory for CSV outputs.")
@click.pass_obj
def analyze(config: Config, job: str, from_str: str, to_str: str, k: Optional[int],
            seed: Optional[int], klass: str, top_words: Optional[int],
            min_cooccurrence: Optional[int], out_dir: str) -> None:
    """Run a batch analytics job and write its outputs."""
    from_ts = _parse_ts_opt(from_str, "from")
    to_ts = _parse_ts_opt(to_str, "to")
    if to_ts < from_ts:
        raise click.UsageError("--to precedes --from")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    store = Store(config.store_path, max_buckets=config.max_buckets)
    manager = _ratings_manager(config)
    table = manager.table
    seed = config.seed if seed is None else seed
    top_words = config.top_words if top_words is None else top_words
    min_cooccurrence = config.min_cooccurrence if min_cooccurrence is None else min_cooccurrence

    try:
        if job == "hashtag-graph":
            _run_hashtag_graph(store, table, config, from_ts, to_ts, k, min_cooccurrence, out)
        elif job == "audiences":
            _run_audiences(store, config, from_ts, to_ts, seed, top_words, out)
        elif job == "rankfreq":
            entries = rank_frequency(store.domain_counts(from_ts, to_ts), table, klass)
            with (out / "rankfreq.csv").open("w", encoding="utf-8") as fh:
                export_rank_frequency_csv(entries, fh)
            log.info("wrote %s (%d rows)", out / "rankfreq.csv", len(entries))
        elif job == "orientation":
            dist = orientation_distribution(store.domain_counts(from_ts, to_ts), table)
            with (out / "orientation.csv").open("w", encoding="utf-8") as fh:
                export_orientation_csv(dist, fh)
            log.info("wrote %s", out / "orientation.csv")
    except Exception:
        log.error("analytics job failed", exc_info=True)
        sys.exit(EXIT_RUNTIME)


def _run_hashtag_graph(store: Store, table: RatingTable, config: Config,
                       from_ts: int, to_ts: int, k: Optional[int],
                       min_cooccurrence: int, out: Path) -> None:
    try:
        graph = jobs_mod.hashtag_graph_job(
            store, table, from_ts, to_ts,
            min_cooccurrence=min_cooccurrence,
            mixed_counts_as=config.mixed_counts_as,
        )
    except jobs_mod.EmptyWindow:
        graph = None
    if graph is not None and k is not None:
        graph = k_core(graph, k)
    edges_path = out / "hashtag_edges.csv"
    nodes_path = out / "hashtag_nodes.csv"
    empty = nx.Graph()
    with edges_path.open("w", encoding="utf-8") as fh:
        export_edge_csv(graph if graph is not None else empty, fh)
    with nodes_path.open("w", encoding="utf-8") as fh:
        export_node_csv(graph if graph is not None else empty, fh)
    log.info("wrote %s and %s", edges_path, nodes_path)


def _run_audiences(store: Store, config: Config, from_ts: int, to_ts: int,
                   seed: int, top_words: int, out: Path) -> None:
    try:
        payload = jobs_mod.audiences_job(store, from_ts, to_ts, seed=seed, top_words=top_words)
    except jobs_mod.EmptyWindow:
        payload = {
            "window_from": from_ts, "window_to": to_ts, "seed": seed,
            "node_count": 0, "edge_count": 0, "modularity": 0.0, "communities": [],
        }
    store.save_job(jobs_mod.AUDIENCES_JOB, from_ts, to_ts,
                   {"seed": seed, "top_words": top_words}, payload, int(time.time()))
    rows = [
        (c["community_id"], w["word"], w["delta"], w["count"])
        for c in payload["communities"]
        for w in c["top_words"]
    ]
    with (out / "audiences.csv").open("w", encoding="utf-8") as fh:
        export_lexicon_csv(rows, fh)
    log.info("audiences job saved (%d communities)", len(payload["communities"]))


@main.command()
@click.option("--host", default=None, help="Bind host (default from config).")
@click.option("--port", type=int, default=None, help="Bind port (default from config).")
@click.pass_obj
def serve(config: Config, host: Optional[str], port: Optional[int]) -> None:
    """Start the read-side HTTP API."""
    import uvicorn

    from .service import create_app

    host = host or config.api_host
    port = port if port is not None else config.api_port
    store = Store(config.store_path, max_buckets=config.max_buckets)
    manager = _ratings_manager(config)
    app = create_app(config, store, manager)

    probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    try:
        probe.bind((host, port))
    except OSError as exc:
        log.error("cannot bind %s:%d: %s", host, port, exc)
        sys.exit(EXIT_RUNTIME)
    finally:
        probe.close()

    uvicorn.run(app, host=host, port=port, log_level="warning")


if __name__ == "__main__":
    main()
