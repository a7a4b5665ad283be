/** Hashtag co-occurrence view: force-directed layout, node color keyed
 * to weight (purple = reliable end, yellow = unreliable end), radius by
 * degree. The layout is deterministic: circle start, fixed iterations. */

import { clear, colorForWeight, el, RELIABLE_HUE, svgElement, UNRELIABLE_HUE } from "../scale.js";
import type { GraphPayload } from "../types.js";

const WIDTH = 800;
const HEIGHT = 520;
const ITERATIONS = 150;

interface Point {
  x: number;
  y: number;
}

/** Plain spring-and-repulsion layout; no randomness so the same payload
 * always lands in the same picture. */
export function layout(payload: GraphPayload): Map<string, Point> {
  const positions = new Map<string, Point>();
  const n = payload.nodes.length;
  const cx = WIDTH / 2;
  const cy = HEIGHT / 2;
  const radius = Math.min(WIDTH, HEIGHT) / 2 - 60;
  payload.nodes.forEach((node, i) => {
    const angle = (2 * Math.PI * i) / Math.max(n, 1);
    positions.set(node.tag, {
      x: cx + radius * Math.cos(angle),
      y: cy + radius * Math.sin(angle),
    });
  });

  const repulsion = 6000;
  const spring = 0.02;
  const springLength = 90;
  for (let step = 0; step < ITERATIONS; step++) {
    const force = new Map<string, Point>();
    for (const node of payload.nodes) force.set(node.tag, { x: 0, y: 0 });

    const tags = payload.nodes.map((node) => node.tag);
    for (let i = 0; i < tags.length; i++) {
      for (let j = i + 1; j < tags.length; j++) {
        const a = positions.get(tags[i]!)!;
        const b = positions.get(tags[j]!)!;
        const dx = a.x - b.x;
        const dy = a.y - b.y;
        const d2 = Math.max(dx * dx + dy * dy, 1);
        const push = repulsion / d2;
        const d = Math.sqrt(d2);
        const fa = force.get(tags[i]!)!;
        const fb = force.get(tags[j]!)!;
        fa.x += (dx / d) * push;
        fa.y += (dy / d) * push;
        fb.x -= (dx / d) * push;
        fb.y -= (dy / d) * push;
      }
    }
    for (const edge of payload.edges) {
      const a = positions.get(edge.source);
      const b = positions.get(edge.target);
      if (!a || !b) continue;
      const dx = b.x - a.x;
      const dy = b.y - a.y;
      const d = Math.max(Math.hypot(dx, dy), 1);
      const pull = spring * (d - springLength);
      const fa = force.get(edge.source)!;
      const fb = force.get(edge.target)!;
      fa.x += (dx / d) * pull;
      fa.y += (dy / d) * pull;
      fb.x -= (dx / d) * pull;
      fb.y -= (dy / d) * pull;
    }
    const cooling = 1 - step / ITERATIONS;
    for (const [tag, f] of force) {
      const p = positions.get(tag)!;
      p.x += Math.max(-12, Math.min(12, f.x)) * cooling;
      p.y += Math.max(-12, Math.min(12, f.y)) * cooling;
      p.x = Math.max(24, Math.min(WIDTH - 24, p.x));
      p.y = Math.max(24, Math.min(HEIGHT - 24, p.y));
    }
  }
  return positions;
}

function legend(): HTMLElement {
  const box = el("div", "legend graph-legend");
  const low = el("span", "legend-item", "reliable (-1)");
  low.style.setProperty("--swatch", RELIABLE_HUE);
  low.dataset.hue = RELIABLE_HUE;
  const high = el("span", "legend-item", "unreliable (+1)");
  high.style.setProperty("--swatch", UNRELIABLE_HUE);
  high.dataset.hue = UNRELIABLE_HUE;
  box.append(low, high);
  return box;
}

export function renderGraph(container: Element, payload: GraphPayload): void {
  clear(container);
  if (payload.nodes.length === 0) {
    container.appendChild(el("p", "empty-state", `No tag pairs survive k=${payload.k}.`));
    return;
  }
  const positions = layout(payload);
  const svg = svgElement("svg", {
    viewBox: `0 0 ${WIDTH} ${HEIGHT}`,
    class: "chart graph",
    role: "img",
  });

  for (const edge of payload.edges) {
    const a = positions.get(edge.source);
    const b = positions.get(edge.target);
    if (!a || !b) continue;
    const line = svgElement("line", {
      x1: String(a.x), y1: String(a.y), x2: String(b.x), y2: String(b.y),
      stroke: colorForWeight(edge.weight),
      "stroke-opacity": "0.35",
      class: "edge",
    });
    const title = svgElement("title");
    title.textContent = `${edge.source} + ${edge.target}: ${edge.w_ut} unreliable / ${edge.w_t} reliable`;
    line.appendChild(title);
    svg.appendChild(line);
  }

  for (const node of payload.nodes) {
    const p = positions.get(node.tag)!;
    const dot = svgElement("circle", {
      cx: String(p.x),
      cy: String(p.y),
      r: String(6 + 2 * Math.sqrt(node.degree)),
      fill: colorForWeight(node.node_weight),
      class: "node",
      "data-tag": node.tag,
      "data-weight": String(node.node_weight),
    });
    const title = svgElement("title");
    title.textContent = `#${node.tag} weight ${node.node_weight} degree ${node.degree}`;
    dot.appendChild(title);
    const label = svgElement("text", {
      x: String(p.x),
      y: String(p.y - 8 - 2 * Math.sqrt(node.degree)),
      "text-anchor": "middle",
      class: "node-label",
    });
    label.textContent = node.tag;
    svg.append(dot, label);
  }

  container.append(svg, legend());
}
