/** Orientation shares: one bar row per political bucket for each
 * reliability class, widths proportional to the reported share. */

import { clear, el } from "../scale.js";
import type { OrientationClass, OrientationPayload } from "../types.js";

const BUCKET_ORDER = ["left", "lean_left", "center", "lean_right", "right", "unknown"];

function renderClass(name: string, data: OrientationClass): HTMLElement {
  const section = el("section", "orientation-class");
  section.dataset.class = name;
  section.appendChild(el(
    "h3", "", `${name} (${data.base_links} links, ${data.unknown_links} unrated orientation)`,
  ));
  const list = el("div", "bars");
  const buckets = BUCKET_ORDER.filter((b) => b in data.shares);
  for (const bucket of buckets) {
    const share = data.shares[bucket]!;
    const row = el("div", "bar-row");
    row.appendChild(el("span", "bar-label", bucket));
    const track = el("div", "bar-track");
    const bar = el("div", "bar");
    bar.style.width = `${Math.max(0, Math.min(100, share))}%`;
    bar.dataset.bucket = bucket;
    track.appendChild(bar);
    row.appendChild(track);
    row.appendChild(el("span", "bar-value", `${share}%`));
    list.appendChild(row);
  }
  section.appendChild(list);
  return section;
}

export function renderOrientation(container: Element, payload: OrientationPayload): void {
  clear(container);
  if (payload.reliable.base_links === 0 && payload.unreliable.base_links === 0) {
    container.appendChild(el("p", "empty-state", "No rated links in this window."));
    return;
  }
  container.appendChild(renderClass("reliable", payload.reliable));
  container.appendChild(renderClass("unreliable", payload.unreliable));
}
