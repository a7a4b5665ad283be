"""Hashtag co-occurrence graph and k-core decomposition.

Edge weights contrast how often a tag pair rides on unreliable versus
reliable posts, on a [-1, 1] scale; a node's weight is the mean of its
incident edge weights. Core decomposition is plain unweighted peeling.
"""

from __future__ import annotations

from collections import deque
from itertools import combinations
from typing import Iterable

import networkx as nx

from ..ratings import RatingTable, Reliability

MIXED_POLICIES = ("unreliable", "reliable", "skip")


def build_hashtag_graph(
    posts: Iterable[tuple],
    table: RatingTable,
    min_cooccurrence: int = 1,
    mixed_counts_as: str = "unreliable",
) -> nx.Graph:
    """Build the weighted tag co-occurrence graph from posts.

    `posts` yields (hashtags, domains) pairs, one per origin post. A post
    carrying at least one unreliable-rated link counts toward w_ut, else
    one with a reliable-rated link counts toward w_t; posts with only
    unrated links are ignored. Posts with links from both classes follow
    `mixed_counts_as` (default: the unreliable side).

    Edges exist for tag pairs co-occurring in >= min_cooccurrence counted
    posts; weight = (w_ut - w_t) / (w_ut + w_t). Node weight is the mean of
    incident edge weights, so the graph has no isolated nodes.
    """
    if mixed_counts_as not in MIXED_POLICIES:
        raise ValueError(f"mixed_counts_as must be one of {MIXED_POLICIES}")
    if min_cooccurrence < 1:
        raise ValueError("min_cooccurrence must be >= 1")

    pair_counts: dict = {}  # (tag_a, tag_b) -> [w_ut, w_t]
    cls_cache: dict = {}
    for hashtags, domains in posts:
        has_unreliable = False
        has_reliable = False
        for domain in domains:
            rel = cls_cache.get(domain)
            if rel is None:
                rel = table.classify(domain).reliability
                cls_cache[domain] = rel
            if rel is Reliability.UNRELIABLE:
                has_unreliable = True
            elif rel is Reliability.RELIABLE:
                has_reliable = True
        if has_unreliable and has_reliable:
            if mixed_counts_as == "skip":
                continue
            side = 0 if mixed_counts_as == "unreliable" else 1
        elif has_unreliable:
            side = 0
        elif has_reliable:
            side = 1
        else:
            continue
        for pair in combinations(sorted(set(hashtags)), 2):
            counts = pair_counts.get(pair)
            if counts is None:
                counts = pair_counts[pair] = [0, 0]
            counts[side] += 1

    graph = nx.Graph()
    for (tag_a, tag_b), (w_ut, w_t) in sorted(pair_counts.items()):
        total = w_ut + w_t
        if total < min_cooccurrence:
            continue
        graph.add_edge(tag_a, tag_b, w_ut=w_ut, w_t=w_t, weight=(w_ut - w_t) / total)
    _annotate_nodes(graph)
    return graph


def _annotate_nodes(graph: nx.Graph) -> None:
    for node in graph.nodes:
        weights = [data["weight"] for _, _, data in graph.edges(node, data=True)]
        graph.nodes[node]["node_weight"] = sum(weights) / len(weights) if weights else 0.0
        graph.nodes[node]["degree"] = graph.degree(node)


def core_numbers(graph: nx.Graph) -> dict:
    """Coreness of every node by increasing-degree peeling.

    Self-loops are not expected (the builders never produce them).
    """
    degrees = {node: graph.degree(node) for node in graph.nodes}
    core: dict = {}
    # bucket queue over current degree
    max_degree = max(degrees.values(), default=0)
    buckets: list = [set() for _ in range(max_degree + 1)]
    for node, degree in degrees.items():
        buckets[degree].add(node)
    current_k = 0
    remaining = len(degrees)
    degree_of = dict(degrees)
    while remaining:
        d = 0
        while not buckets[d]:
            d += 1
        current_k = max(current_k, d)
        node = buckets[d].pop()
        core[node] = current_k
        remaining -= 1
        for neighbor in graph.neighbors(node):
            if neighbor in core:
                continue
            nd = degree_of[neighbor]
            if nd > d:
                buckets[nd].discard(neighbor)
                degree_of[neighbor] = nd - 1
                buckets[nd - 1].add(neighbor)
    return core


def k_core(graph: nx.Graph, k: int) -> nx.Graph:
    """Maximal subgraph where every node keeps unweighted degree >= k.

    The k-core is unique, so the result is peel-order independent. k=0
    returns the graph itself (copied).
    """
    if k < 0:
        raise ValueError("k must be >= 0")
    if k == 0:
        return graph.copy()
    degrees = {node: graph.degree(node) for node in graph.nodes}
    doomed = deque(node for node, degree in degrees.items() if degree < k)
    removed: set = set()
    while doomed:
        node = doomed.popleft()
        if node in removed:
            continue
        removed.add(node)
        for neighbor in graph.neighbors(node):
            if neighbor in removed:
                continue
            degrees[neighbor] -= 1
            if degrees[neighbor] < k:
                doomed.append(neighbor)
    return graph.subgraph(node for node in graph.nodes if node not in removed).copy()


def max_k_core(graph: nx.Graph) -> tuple:
    """(k_max, core subgraph) for the largest k with a non-empty k-core."""
    if graph.number_of_nodes() == 0:
        return 0, graph.copy()
    core = core_numbers(graph)
    k_max = max(core.values())
    return k_max, graph.subgraph(n for n, c in core.items() if c >= k_max).copy()


def export_edge_csv(graph: nx.Graph, fh) -> None:
    fh.write("source,target,w_ut,w_t,weight\n")
    rows = sorted(
        (min(a, b), max(a, b), data) for a, b, data in graph.edges(data=True)
    )
    for source, target, data in rows:
        fh.write(f"{source},{target},{data['w_ut']},{data['w_t']},{_fmt(data['weight'])}\n")


def export_node_csv(graph: nx.Graph, fh) -> None:
    fh.write("tag,node_weight,degree\n")
    for node in sorted(graph.nodes):
        data = graph.nodes[node]
        fh.write(f"{node},{_fmt(data.get('node_weight', 0.0))},{graph.degree(node)}\n")


def _fmt(value: float) -> str:
    return format(value, ".6g")


def graph_payload(graph: nx.Graph) -> dict:
    """JSON-ready nodes+edges mirroring the CSV export schema."""
    nodes = [
        {
            "tag": node,
            "node_weight": graph.nodes[node].get("node_weight", 0.0),
            "degree": graph.degree(node),
        }
        for node in sorted(graph.nodes)
    ]
    edges = [
        {
            "source": min(a, b),
            "target": max(a, b),
            "w_ut": data["w_ut"],
            "w_t": data["w_t"],
            "weight": data["weight"],
        }
        for a, b, data in sorted(
            graph.edges(data=True), key=lambda e: (min(e[0], e[1]), max(e[0], e[1]))
        )
    ]
    return {"nodes": nodes, "edges": edges}
