/** Shared chart helpers: linear scales, SVG elements, the node color
 * scale and small DOM utilities. All geometry only; every displayed
 * number comes verbatim from an API payload. */

// Legend endpoints for node/edge weights: -1 (all-reliable co-occurrence)
// is purple, +1 (all-unreliable) is yellow.
export const RELIABLE_HUE = "#7b2fbf";
export const UNRELIABLE_HUE = "#e8c31e";

interface Rgb {
  r: number;
  g: number;
  b: number;
}

function toRgb(hex: string): Rgb {
  return {
    r: parseInt(hex.slice(1, 3), 16),
    g: parseInt(hex.slice(3, 5), 16),
    b: parseInt(hex.slice(5, 7), 16),
  };
}

function toHex(c: Rgb): string {
  const h = (v: number) => Math.round(v).toString(16).padStart(2, "0");
  return `#${h(c.r)}${h(c.g)}${h(c.b)}`;
}

const LOW = toRgb(RELIABLE_HUE);
const HIGH = toRgb(UNRELIABLE_HUE);

/** Map a weight in [-1, 1] onto the legend gradient; the endpoints hit
 * the legend hues exactly. Out-of-range input clamps. */
export function colorForWeight(weight: number): string {
  const t = (Math.max(-1, Math.min(1, weight)) + 1) / 2;
  return toHex({
    r: LOW.r + (HIGH.r - LOW.r) * t,
    g: LOW.g + (HIGH.g - LOW.g) * t,
    b: LOW.b + (HIGH.b - LOW.b) * t,
  });
}

export function linearScale(
  domainMin: number,
  domainMax: number,
  rangeMin: number,
  rangeMax: number,
): (v: number) => number {
  const span = domainMax - domainMin;
  if (span === 0) return () => (rangeMin + rangeMax) / 2;
  return (v) => rangeMin + ((v - domainMin) / span) * (rangeMax - rangeMin);
}

const SVG_NS = "http://www.w3.org/2000/svg";

export function svgElement<K extends keyof SVGElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
): SVGElementTagNameMap[K] {
  const el = document.createElementNS(SVG_NS, tag);
  for (const [name, value] of Object.entries(attrs)) el.setAttribute(name, value);
  return el;
}

export function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className = "",
  text = "",
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text) node.textContent = text;
  return node;
}

export function clear(node: Element): void {
  while (node.firstChild) node.removeChild(node.firstChild);
}
