"""Batch analytics over stored observations: co-occurrence graphs, core
decomposition, community detection, log-odds lexicons and distribution
reports. Every function here is a pure transform over a store snapshot."""

from .graph import (
    build_hashtag_graph,
    core_numbers,
    export_edge_csv,
    export_node_csv,
    k_core,
    max_k_core,
)
from .communities import build_engagement_graph, detect_communities, modularity_of
from .lexicon import (
    CommunityLexicon,
    export_lexicon_csv,
    log_odds,
    pooled_counts,
    tokenize,
)
from .reports import (
    RankFrequencyEntry,
    export_orientation_csv,
    export_rank_frequency_csv,
    orientation_distribution,
    rank_frequency,
)
from .jobs import EmptyWindow, audiences_job, hashtag_graph_job

__all__ = [
    "CommunityLexicon",
    "EmptyWindow",
    "RankFrequencyEntry",
    "audiences_job",
    "build_engagement_graph",
    "build_hashtag_graph",
    "core_numbers",
    "detect_communities",
    "export_edge_csv",
    "export_lexicon_csv",
    "export_node_csv",
    "export_orientation_csv",
    "export_rank_frequency_csv",
    "hashtag_graph_job",
    "k_core",
    "log_odds",
    "max_k_core",
    "modularity_of",
    "orientation_distribution",
    "pooled_counts",
    "rank_frequency",
    "tokenize",
]
