/** Thin client for the documented /v1 endpoints.
 *
 * Every fetch is keyed by endpoint; starting a new request for a key
 * aborts the previous one, so a stale response can never land on top of
 * a newer view (latest wins).
 */

import type {
  AbsoluteBucket,
  AudiencesPayload,
  GraphPayload,
  OrientationPayload,
  RankRow,
  RelativePoint,
} from "./types.js";

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
    this.name = "ApiError";
  }
}

export class Client {
  private inflight = new Map<string, AbortController>();

  constructor(
    private base: string = "",
    private fetcher: typeof fetch = (...args) => fetch(...args),
  ) {}

  private async get<T>(key: string, path: string, params: Record<string, string>): Promise<T> {
    this.inflight.get(key)?.abort();
    const controller = new AbortController();
    this.inflight.set(key, controller);
    const query = new URLSearchParams(params).toString();
    const url = `${this.base}${path}${query ? `?${query}` : ""}`;
    try {
      const response = await this.fetcher(url, { signal: controller.signal });
      if (!response.ok) {
        throw new ApiError(response.status, `${path}: HTTP ${response.status}`);
      }
      return (await response.json()) as T;
    } finally {
      if (this.inflight.get(key) === controller) this.inflight.delete(key);
    }
  }

  prevalenceAbsolute(from: string, to: string, granularity: string): Promise<AbsoluteBucket[]> {
    return this.get("prevalence", "/v1/prevalence", { mode: "absolute", from, to, granularity });
  }

  prevalenceRelative(from: string, to: string, granularity: string): Promise<RelativePoint[]> {
    return this.get("prevalence", "/v1/prevalence", { mode: "relative", from, to, granularity });
  }

  topDomains(from: string, to: string, klass: string, limit: number): Promise<RankRow[]> {
    return this.get("domains", "/v1/domains/top", {
      from, to, class: klass, limit: String(limit),
    });
  }

  hashtagGraph(from: string, to: string, k: number): Promise<GraphPayload> {
    return this.get("graph", "/v1/hashtag-graph", { window: `${from}/${to}`, k: String(k) });
  }

  audiences(from: string, to: string): Promise<AudiencesPayload> {
    return this.get("audiences", "/v1/audiences", { window: `${from}/${to}` });
  }

  orientation(from: string, to: string): Promise<OrientationPayload> {
    return this.get("orientation", "/v1/orientation", { window: `${from}/${to}` });
  }
}

export function isAbort(err: unknown): boolean {
  return err instanceof DOMException && err.name === "AbortError";
}
