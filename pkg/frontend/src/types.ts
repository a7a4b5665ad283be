/** Response shapes of the /v1 API, mirrored field for field. */

export interface AbsoluteBucket {
  bucket: string;
  total_links: number;
  total_rated: number;
  reliable: number;
  unreliable: number;
}

export interface RelativePoint {
  bucket: string;
  ratio: number | null;
}

export interface RankRow {
  rank: number;
  domain: string;
  frequency: number;
}

export interface GraphNode {
  tag: string;
  node_weight: number;
  degree: number;
}

export interface GraphEdge {
  source: string;
  target: string;
  w_ut: number;
  w_t: number;
  weight: number;
}

export interface GraphPayload {
  k: number;
  nodes: GraphNode[];
  edges: GraphEdge[];
}

export interface CommunityWord {
  word: string;
  delta: number;
  count: number;
}

export interface Community {
  community_id: number;
  size: number;
  top_words: CommunityWord[];
}

export interface AudiencesPayload {
  window_from: string;
  window_to: string;
  seed: number;
  node_count: number;
  edge_count: number;
  modularity: number;
  communities: Community[];
}

export interface OrientationClass {
  shares: Record<string, number>;
  base_links: number;
  unknown_links: number;
}

export interface OrientationPayload {
  reliable: OrientationClass;
  unreliable: OrientationClass;
}
