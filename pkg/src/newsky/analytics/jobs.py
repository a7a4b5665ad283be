"""Window-level analytics jobs over a store snapshot.

Jobs are pure given (store contents, ratings snapshot, parameters); the
CLI persists their payloads so the API can serve them without recomputing.
"""

from __future__ import annotations

from typing import Optional

import networkx as nx

from ..ratings import RatingTable
from ..store import Store
from . import communities as communities_mod
from . import lexicon as lexicon_mod
from .graph import build_hashtag_graph

AUDIENCES_JOB = "audiences"

DEFAULT_TOP_WORDS = 20


class EmptyWindow(ValueError):
    """The requested window contains no time at all (from >= to)."""


def check_window(from_ts: int, to_ts: int) -> None:
    if to_ts <= from_ts:
        raise EmptyWindow(f"window [{from_ts}, {to_ts}) is empty")


def hashtag_graph_job(
    store: Store,
    table: RatingTable,
    from_ts: int,
    to_ts: int,
    min_cooccurrence: int = 1,
    mixed_counts_as: str = "unreliable",
) -> nx.Graph:
    check_window(from_ts, to_ts)
    posts = store.tagged_posts(from_ts, to_ts)
    return build_hashtag_graph(posts, table, min_cooccurrence, mixed_counts_as)


def audiences_job(
    store: Store,
    from_ts: int,
    to_ts: int,
    seed: int = communities_mod.DEFAULT_SEED,
    top_words: int = DEFAULT_TOP_WORDS,
    news_only: bool = True,
    conventional_priors: bool = False,
) -> dict:
    """Segment the engagement graph and score each community's
    characteristic words against everyone else's timelines."""
    check_window(from_ts, to_ts)
    edges = store.engagement_edges(from_ts, to_ts, news_only=news_only)
    graph = communities_mod.build_engagement_graph(edges)
    partition = communities_mod.detect_communities(graph, seed=seed)

    lexicons = []
    for index, members in enumerate(partition):
        texts = store.actor_texts(members, from_ts, to_ts)
        flat = [pair for actor in members for pair in texts.get(actor, [])]
        lexicons.append(lexicon_mod.CommunityLexicon.from_texts(index, flat))
    priors = lexicon_mod.pooled_counts(lexicons)

    payload_communities = []
    for index, members in enumerate(partition):
        rest = lexicon_mod.CommunityLexicon.merged(
            -1, (lx for lx in lexicons if lx.community_id != index)
        )
        deltas = lexicon_mod.log_odds(
            lexicons[index], rest, priors, conventional=conventional_priors
        )
        ranked = lexicon_mod.top_words(deltas, top_words)
        payload_communities.append({
            "community_id": index,
            "size": len(members),
            "top_words": [
                {
                    "word": word,
                    "delta": delta,
                    "count": lexicons[index].word_counts.get(word, 0),
                }
                for word, delta in ranked
            ],
        })

    return {
        "window_from": from_ts,
        "window_to": to_ts,
        "seed": seed,
        "node_count": graph.number_of_nodes(),
        "edge_count": graph.number_of_edges(),
        "modularity": communities_mod.modularity_of(graph, partition),
        "communities": payload_communities,
    }
