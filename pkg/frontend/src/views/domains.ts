/** Top-domains table with reliable/unreliable tabs and a row-limit
 * slider. Rank, domain and frequency come straight from the payload. */

import { clear, el } from "../scale.js";
import type { DomainClass } from "../state.js";
import type { RankRow } from "../types.js";

export interface DomainsHandlers {
  onClassChange: (klass: DomainClass) => void;
  onLimitChange: (limit: number) => void;
}

export function renderDomains(
  container: Element,
  rows: RankRow[],
  active: DomainClass,
  limit: number,
  handlers: DomainsHandlers,
): void {
  clear(container);

  const tabs = el("div", "tabs");
  for (const klass of ["reliable", "unreliable"] as const) {
    const tab = el("button", klass === active ? "tab active" : "tab", klass);
    tab.dataset.class = klass;
    tab.addEventListener("click", () => handlers.onClassChange(klass));
    tabs.appendChild(tab);
  }

  const controls = el("label", "limit-control", `show ${limit} `);
  const slider = el("input");
  slider.type = "range";
  slider.min = "1";
  slider.max = "50";
  slider.value = String(limit);
  slider.addEventListener("change", () => handlers.onLimitChange(Number(slider.value)));
  controls.appendChild(slider);

  container.append(tabs, controls);

  if (rows.length === 0) {
    container.appendChild(el("p", "empty-state", "No rated links in this window."));
    return;
  }

  const table = el("table", "domains");
  const head = el("tr");
  for (const label of ["rank", "domain", "links"]) head.appendChild(el("th", "", label));
  table.appendChild(head);
  for (const row of rows) {
    const tr = el("tr");
    tr.appendChild(el("td", "num", String(row.rank)));
    tr.appendChild(el("td", "", row.domain));
    tr.appendChild(el("td", "num", String(row.frequency)));
    table.appendChild(tr);
  }
  container.appendChild(table);
}
