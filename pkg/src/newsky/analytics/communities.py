"""Engagement graph construction and community detection.

Detection delegates to networkx's Louvain implementation (greedy
modularity optimization) with a fixed seed; the algorithm is inherently
order-sensitive, so the seed plus deterministic graph construction is what
makes repeated runs reproducible.
"""

from __future__ import annotations

from typing import Mapping

import networkx as nx
from networkx.algorithms import community as nx_community

DEFAULT_SEED = 42


def build_engagement_graph(edges: Mapping) -> nx.Graph:
    """Undirected actor graph from (actor_a, actor_b) → multiplicity.

    Pairs are inserted in sorted order so downstream seeded algorithms see
    a stable node ordering.
    """
    graph = nx.Graph()
    for (a, b), multiplicity in sorted(edges.items()):
        if a == b:
            continue
        graph.add_edge(a, b, weight=multiplicity)
    return graph


def detect_communities(graph: nx.Graph, seed: int = DEFAULT_SEED) -> list:
    """Partition actors by modularity optimization.

    Returns communities as sorted member lists, ordered by descending size
    with the smallest member id breaking ties, so community indexes are
    stable for a given graph and seed.
    """
    if graph.number_of_nodes() == 0:
        return []
    raw = nx_community.louvain_communities(graph, weight="weight", seed=seed)
    communities = [sorted(members) for members in raw]
    communities.sort(key=lambda members: (-len(members), members[0]))
    return communities


def modularity_of(graph: nx.Graph, communities: list) -> float:
    if graph.number_of_edges() == 0:
        return 0.0
    return nx_community.modularity(graph, [set(c) for c in communities], weight="weight")
