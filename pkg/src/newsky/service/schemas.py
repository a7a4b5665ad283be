"""Response models for the read-side API."""

from __future__ import annotations

from typing import Optional

from pydantic import BaseModel


class AbsoluteBucket(BaseModel):
    bucket: str
    total_links: int
    total_rated: int
    reliable: int
    unreliable: int


class RelativePoint(BaseModel):
    bucket: str
    ratio: Optional[float] = None


class RankRow(BaseModel):
    rank: int
    domain: str
    frequency: int


class GraphNode(BaseModel):
    tag: str
    node_weight: float
    degree: int


class GraphEdge(BaseModel):
    source: str
    target: str
    w_ut: int
    w_t: int
    weight: float


class GraphPayload(BaseModel):
    k: int
    nodes: list[GraphNode]
    edges: list[GraphEdge]


class CommunityWord(BaseModel):
    word: str
    delta: float
    count: int


class Community(BaseModel):
    community_id: int
    size: int
    top_words: list[CommunityWord]


class AudiencesPayload(BaseModel):
    window_from: str
    window_to: str
    seed: int
    node_count: int
    edge_count: int
    modularity: float
    communities: list[Community]


class OrientationClass(BaseModel):
    shares: dict[str, float]
    base_links: int
    unknown_links: int


class OrientationPayload(BaseModel):
    reliable: OrientationClass
    unreliable: OrientationClass


class IngestHealth(BaseModel):
    last_cursor: Optional[int] = None
    lag_seconds: Optional[float] = None
    events_delivered: int = 0
    decode_error_count: int = 0
    cursor_gaps: int = 0
    reconnects: int = 0
    duplicates_dropped: int = 0


class StoreHealth(BaseModel):
    observations: int
    engagements: int
    posts: int
    resolutions: int


class HealthPayload(BaseModel):
    status: str
    ingest: IngestHealth
    store: StoreHealth
    rated_domains: int
