/** Prevalence explorer: absolute mode draws total/reliable/unreliable
 * series, relative mode draws the unreliable share with gaps where the
 * API reports null. Numbers shown are the payload values, untouched. */

import { clear, el, linearScale, svgElement } from "../scale.js";
import type { AbsoluteBucket, RelativePoint } from "../types.js";

const WIDTH = 800;
const HEIGHT = 300;
const PAD = { left: 56, right: 16, top: 16, bottom: 28 };

const SERIES: { key: "total_links" | "reliable" | "unreliable"; label: string; color: string }[] = [
  { key: "total_links", label: "total", color: "#5a6572" },
  { key: "reliable", label: "reliable", color: "#2f7cbf" },
  { key: "unreliable", label: "unreliable", color: "#c2452f" },
];

function chartSvg(): SVGSVGElement {
  return svgElement("svg", {
    viewBox: `0 0 ${WIDTH} ${HEIGHT}`,
    class: "chart",
    role: "img",
  });
}

function emptyState(container: Element): void {
  clear(container);
  container.appendChild(el("p", "empty-state", "No data in this window."));
}

function xScale(n: number): (i: number) => number {
  return linearScale(0, Math.max(n - 1, 1), PAD.left, WIDTH - PAD.right);
}

function yAxis(svg: SVGSVGElement, maxLabel: string): void {
  const axis = svgElement("g", { class: "axis" });
  const line = svgElement("line", {
    x1: String(PAD.left), y1: String(PAD.top),
    x2: String(PAD.left), y2: String(HEIGHT - PAD.bottom),
    stroke: "currentColor",
  });
  const top = svgElement("text", {
    x: String(PAD.left - 6), y: String(PAD.top + 4),
    "text-anchor": "end", class: "tick",
  });
  top.textContent = maxLabel;
  const zero = svgElement("text", {
    x: String(PAD.left - 6), y: String(HEIGHT - PAD.bottom),
    "text-anchor": "end", class: "tick",
  });
  zero.textContent = "0";
  axis.append(line, top, zero);
  svg.appendChild(axis);
}

function xLabels(svg: SVGSVGElement, buckets: string[], x: (i: number) => number): void {
  if (buckets.length === 0) return;
  const first = buckets[0]!;
  const last = buckets[buckets.length - 1]!;
  const a = svgElement("text", {
    x: String(x(0)), y: String(HEIGHT - 8), "text-anchor": "start", class: "tick",
  });
  a.textContent = first;
  const b = svgElement("text", {
    x: String(x(buckets.length - 1)), y: String(HEIGHT - 8),
    "text-anchor": "end", class: "tick",
  });
  b.textContent = last;
  svg.append(a, b);
}

export function renderAbsolute(container: Element, buckets: AbsoluteBucket[]): void {
  if (buckets.length === 0) {
    emptyState(container);
    return;
  }
  clear(container);
  const svg = chartSvg();
  const max = Math.max(...buckets.map((b) => b.total_links), 1);
  const x = xScale(buckets.length);
  const y = linearScale(0, max, HEIGHT - PAD.bottom, PAD.top);
  yAxis(svg, String(max));
  xLabels(svg, buckets.map((b) => b.bucket), x);

  for (const series of SERIES) {
    const points = buckets
      .map((bucket, i) => `${x(i)},${y(bucket[series.key])}`)
      .join(" ");
    svg.appendChild(svgElement("polyline", {
      points,
      class: `series series-${series.label}`,
      fill: "none",
      stroke: series.color,
      "stroke-width": "1.5",
    }));
  }

  const legend = el("div", "legend");
  for (const series of SERIES) {
    const item = el("span", "legend-item", series.label);
    item.style.setProperty("--swatch", series.color);
    legend.appendChild(item);
  }
  container.append(svg, legend);
}

export function renderRelative(container: Element, points: RelativePoint[]): void {
  if (points.length === 0) {
    emptyState(container);
    return;
  }
  clear(container);
  const svg = chartSvg();
  const ratios = points.map((p) => p.ratio).filter((r): r is number => r !== null);
  const max = Math.max(...ratios, 0) || 1;
  const x = xScale(points.length);
  const y = linearScale(0, max, HEIGHT - PAD.bottom, PAD.top);
  yAxis(svg, String(max));
  xLabels(svg, points.map((p) => p.bucket), x);

  // null ratios break the line into segments: gaps, not zeroes
  let segment: string[] = [];
  const flush = () => {
    if (segment.length > 1) {
      svg.appendChild(svgElement("polyline", {
        points: segment.join(" "),
        class: "series series-ratio",
        fill: "none",
        stroke: "#c2452f",
        "stroke-width": "1.5",
      }));
    }
    segment = [];
  };
  points.forEach((point, i) => {
    if (point.ratio === null) {
      flush();
      return;
    }
    segment.push(`${x(i)},${y(point.ratio)}`);
    const dot = svgElement("circle", {
      cx: String(x(i)),
      cy: String(y(point.ratio)),
      r: "3",
      class: "point",
      fill: "#c2452f",
      "data-bucket": point.bucket,
      "data-ratio": String(point.ratio),
    });
    const title = svgElement("title");
    title.textContent = `${point.bucket}: ${point.ratio}`;
    dot.appendChild(title);
    svg.appendChild(dot);
  });
  flush();
  container.appendChild(svg);
}
