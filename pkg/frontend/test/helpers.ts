/** Test plumbing: load recorded /v1 responses and serve them through a
 * stubbed fetch, so views render real payload shapes with no backend. */

import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

const FIXTURES = join(dirname(fileURLToPath(import.meta.url)), "fixtures");

export interface Recorded {
  request: { path: string; params: Record<string, string> };
  status: number;
  body: unknown;
}

export function loadFixture(name: string): Recorded {
  return JSON.parse(readFileSync(join(FIXTURES, `${name}.json`), "utf-8")) as Recorded;
}

function sameParams(actual: URLSearchParams, expected: Record<string, string>): boolean {
  const pairs = [...actual.entries()];
  if (pairs.length !== Object.keys(expected).length) return false;
  return pairs.every(([key, value]) => expected[key] === value);
}

function fakeResponse(rec: Recorded): Response {
  return {
    ok: rec.status >= 200 && rec.status < 300,
    status: rec.status,
    json: () => Promise.resolve(rec.body),
  } as unknown as Response;
}

/** fetch stub answering from recordings; unmatched requests reject so a
 * test can never silently hit an unexpected endpoint. Requested URLs are
 * collected in `log`. */
export function fixtureFetch(names: string[], log: string[] = []): typeof fetch {
  const recordings = names.map(loadFixture);
  return ((input: RequestInfo | URL) => {
    const url = new URL(String(input), "http://fixtures.test");
    log.push(url.pathname + url.search);
    const hit = recordings.find(
      (rec) => rec.request.path === url.pathname && sameParams(url.searchParams, rec.request.params),
    );
    if (!hit) {
      return Promise.reject(new Error(`no recording for ${url.pathname}${url.search}`));
    }
    return Promise.resolve(fakeResponse(hit));
  }) as typeof fetch;
}

/** fetch stub that always fails, for the error-banner path. */
export function failingFetch(log: string[] = []): typeof fetch {
  return ((input: RequestInfo | URL) => {
    const url = new URL(String(input), "http://fixtures.test");
    log.push(url.pathname + url.search);
    return Promise.reject(new Error("connection refused"));
  }) as typeof fetch;
}

export function container(): HTMLElement {
  const node = document.createElement("div");
  document.body.appendChild(node);
  return node;
}

/** Let queued promise callbacks run. */
export function settle(): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, 0));
}
