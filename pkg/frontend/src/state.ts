/** View state synced to the URL query string so views are shareable.
 *
 * serialize() emits a canonical string: fixed key order, default values
 * omitted. parse(serialize(s)) recovers s, and serialize(parse(q)) === q
 * for every canonical q.
 */

export type Mode = "absolute" | "relative";
export type Preset = "1w" | "30d" | "all" | "custom";
export type Granularity = "hour" | "day";
export type DomainClass = "reliable" | "unreliable";
export type View = "prevalence" | "domains" | "graph" | "audiences" | "orientation";

export interface ViewState {
  view: View;
  mode: Mode;
  preset: Preset;
  // set only when preset is custom; RFC 3339, from <= to
  from: string | null;
  to: string | null;
  granularity: Granularity;
  domainClass: DomainClass;
  limit: number;
  k: number;
}

export const DEFAULT_STATE: ViewState = {
  view: "prevalence",
  mode: "relative",
  preset: "1w",
  from: null,
  to: null,
  granularity: "day",
  domainClass: "reliable",
  limit: 10,
  k: 0,
};

const VIEWS: readonly View[] = ["prevalence", "domains", "graph", "audiences", "orientation"];
const MODES: readonly Mode[] = ["absolute", "relative"];
const PRESETS: readonly Preset[] = ["1w", "30d", "all", "custom"];
const GRANULARITIES: readonly Granularity[] = ["hour", "day"];
const CLASSES: readonly DomainClass[] = ["reliable", "unreliable"];

function pick<T extends string>(allowed: readonly T[], value: string | null, fallback: T): T {
  return allowed.includes(value as T) ? (value as T) : fallback;
}

const RFC3339 = /^\d{4}-\d{2}-\d{2}T\d{2}:\d{2}:\d{2}(\.\d+)?(Z|[+-]\d{2}:\d{2})$/;

function validStamp(value: string | null): value is string {
  return value !== null && RFC3339.test(value) && !Number.isNaN(Date.parse(value));
}

/** Read state from a query string; anything malformed falls back to
 * defaults rather than throwing, so a mangled link still loads. */
export function parse(query: string): ViewState {
  const params = new URLSearchParams(query);
  const state: ViewState = {
    view: pick(VIEWS, params.get("view"), DEFAULT_STATE.view),
    mode: pick(MODES, params.get("mode"), DEFAULT_STATE.mode),
    preset: pick(PRESETS, params.get("preset"), DEFAULT_STATE.preset),
    from: params.get("from"),
    to: params.get("to"),
    granularity: pick(GRANULARITIES, params.get("granularity"), DEFAULT_STATE.granularity),
    domainClass: pick(CLASSES, params.get("class"), DEFAULT_STATE.domainClass),
    limit: positiveInt(params.get("limit"), DEFAULT_STATE.limit),
    k: nonNegativeInt(params.get("k"), DEFAULT_STATE.k),
  };
  if (state.preset !== "custom") {
    state.from = null;
    state.to = null;
  } else if (!validStamp(state.from) || !validStamp(state.to)
      || Date.parse(state.from) > Date.parse(state.to)) {
    // custom requires from <= to; otherwise drop back to the default window
    state.preset = DEFAULT_STATE.preset;
    state.from = null;
    state.to = null;
  }
  return state;
}

function positiveInt(raw: string | null, fallback: number): number {
  const n = raw === null ? NaN : Number(raw);
  return Number.isInteger(n) && n >= 1 ? n : fallback;
}

function nonNegativeInt(raw: string | null, fallback: number): number {
  const n = raw === null ? NaN : Number(raw);
  return Number.isInteger(n) && n >= 0 ? n : fallback;
}

/** Canonical query string for a state: fixed key order, defaults omitted. */
export function serialize(state: ViewState): string {
  const params = new URLSearchParams();
  if (state.view !== DEFAULT_STATE.view) params.set("view", state.view);
  if (state.mode !== DEFAULT_STATE.mode) params.set("mode", state.mode);
  if (state.preset !== DEFAULT_STATE.preset) params.set("preset", state.preset);
  if (state.preset === "custom" && state.from !== null) params.set("from", state.from);
  if (state.preset === "custom" && state.to !== null) params.set("to", state.to);
  if (state.granularity !== DEFAULT_STATE.granularity) {
    params.set("granularity", state.granularity);
  }
  if (state.domainClass !== DEFAULT_STATE.domainClass) params.set("class", state.domainClass);
  if (state.limit !== DEFAULT_STATE.limit) params.set("limit", String(state.limit));
  if (state.k !== DEFAULT_STATE.k) params.set("k", String(state.k));
  return params.toString();
}

const DAY_MS = 86_400_000;

/** Concrete [from, to) window for API calls. Presets hang off `now`;
 * "all" is bounded to a year back because the API wants a finite window. */
export function resolveWindow(state: ViewState, now: Date = new Date()): { from: string; to: string } {
  if (state.preset === "custom" && state.from !== null && state.to !== null) {
    return { from: state.from, to: state.to };
  }
  const spanDays = state.preset === "1w" ? 7 : state.preset === "30d" ? 30 : 365;
  const end = new Date(Math.ceil(now.getTime() / DAY_MS) * DAY_MS);
  const start = new Date(end.getTime() - spanDays * DAY_MS);
  return { from: stamp(start), to: stamp(end) };
}

function stamp(d: Date): string {
  return d.toISOString().replace(/\.\d{3}Z$/, "Z");
}

/** Push state into the address bar without reloading. */
export function writeToLocation(state: ViewState): void {
  const query = serialize(state);
  const url = query ? `${window.location.pathname}?${query}` : window.location.pathname;
  window.history.replaceState(null, "", url);
}

export function readFromLocation(): ViewState {
  return parse(window.location.search);
}
