/** Audience terms: one card per engagement community listing its most
 * distinguishing words, delta and count shown as reported. */

import { clear, el } from "../scale.js";
import type { AudiencesPayload } from "../types.js";

export function renderAudiences(container: Element, payload: AudiencesPayload): void {
  clear(container);
  if (payload.communities.length === 0) {
    container.appendChild(el("p", "empty-state", "No communities in this window."));
    return;
  }

  const summary = el(
    "p",
    "audiences-summary",
    `${payload.node_count} accounts, ${payload.edge_count} edges, `
      + `modularity ${payload.modularity}, seed ${payload.seed}`,
  );
  container.appendChild(summary);

  const grid = el("div", "audience-grid");
  for (const community of payload.communities) {
    const card = el("section", "audience-card");
    card.dataset.community = String(community.community_id);
    card.appendChild(el(
      "h3", "", `community ${community.community_id} · ${community.size} accounts`,
    ));
    const words = el("ul", "terms");
    for (const word of community.top_words) {
      const item = el("li", "term", word.word);
      item.title = `delta ${word.delta}, count ${word.count}`;
      item.dataset.delta = String(word.delta);
      words.appendChild(item);
    }
    card.appendChild(words);
    grid.appendChild(card);
  }
  container.appendChild(grid);
}
