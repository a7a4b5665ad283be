/** App shell: nav, window/mode controls, URL sync and fetch-then-render
 * for the active view. On a fetch error the previous rendering stays put
 * and an inline banner offers a retry. */

import { ApiError, Client, isAbort } from "./api.js";
import { clear, el } from "./scale.js";
import {
  DEFAULT_STATE,
  Granularity,
  Mode,
  Preset,
  readFromLocation,
  resolveWindow,
  View,
  ViewState,
  writeToLocation,
} from "./state.js";
import { renderAudiences } from "./views/audiences.js";
import { renderDomains } from "./views/domains.js";
import { renderGraph } from "./views/graph.js";
import { renderOrientation } from "./views/orientation.js";
import { renderAbsolute, renderRelative } from "./views/prevalence.js";

const VIEW_LABELS: Record<View, string> = {
  prevalence: "Prevalence",
  domains: "Domains",
  graph: "Hashtags",
  audiences: "Audiences",
  orientation: "Orientation",
};

export class App {
  private state: ViewState;

  constructor(
    private root: HTMLElement,
    private client: Client,
    private now: () => Date = () => new Date(),
  ) {
    this.state = readFromLocation();
  }

  start(): void {
    window.addEventListener("popstate", () => {
      this.state = readFromLocation();
      this.renderChrome();
      void this.refresh();
    });
    this.renderChrome();
    void this.refresh();
  }

  private update(patch: Partial<ViewState>): void {
    this.state = { ...this.state, ...patch };
    writeToLocation(this.state);
    this.renderChrome();
    void this.refresh();
  }

  private banner(): HTMLElement {
    return this.root.querySelector(".banner-slot") as HTMLElement;
  }

  private viewBox(): HTMLElement {
    return this.root.querySelector(".view") as HTMLElement;
  }

  private renderChrome(): void {
    let nav = this.root.querySelector<HTMLElement>(".nav");
    if (!nav) {
      clear(this.root);
      nav = el("nav", "nav");
      this.root.append(
        nav,
        el("div", "controls"),
        el("div", "banner-slot"),
        el("main", "view"),
      );
    }
    clear(nav);
    for (const view of Object.keys(VIEW_LABELS) as View[]) {
      const button = el("button", view === this.state.view ? "nav-tab active" : "nav-tab",
        VIEW_LABELS[view]);
      button.dataset.view = view;
      button.addEventListener("click", () => this.update({ view }));
      nav.appendChild(button);
    }
    this.renderControls();
  }

  private renderControls(): void {
    const controls = this.root.querySelector<HTMLElement>(".controls")!;
    clear(controls);

    const preset = el("select");
    preset.className = "preset";
    for (const value of ["1w", "30d", "all", "custom"] as Preset[]) {
      const option = el("option", "", value);
      option.value = value;
      option.selected = value === this.state.preset;
      preset.appendChild(option);
    }
    preset.addEventListener("change", () => {
      const next = preset.value as Preset;
      if (next === "custom") {
        const window = resolveWindow(this.state, this.now());
        this.update({ preset: next, from: window.from, to: window.to });
      } else {
        this.update({ preset: next, from: null, to: null });
      }
    });
    controls.appendChild(label("window", preset));

    if (this.state.preset === "custom") {
      const from = stampInput("from", this.state.from ?? "");
      const to = stampInput("to", this.state.to ?? "");
      const apply = el("button", "apply", "apply");
      apply.addEventListener("click", () => {
        if (from.value && to.value && Date.parse(from.value) <= Date.parse(to.value)) {
          this.update({ from: from.value, to: to.value });
        }
      });
      controls.append(from, to, apply);
    }

    if (this.state.view === "prevalence") {
      const mode = toggle(["relative", "absolute"], this.state.mode,
        (value) => this.update({ mode: value as Mode }));
      mode.classList.add("mode");
      controls.appendChild(label("mode", mode));
      const gran = toggle(["day", "hour"], this.state.granularity,
        (value) => this.update({ granularity: value as Granularity }));
      gran.classList.add("granularity");
      controls.appendChild(label("buckets", gran));
    }

    if (this.state.view === "graph") {
      const k = el("input");
      k.type = "number";
      k.min = "0";
      k.className = "k-input";
      k.value = String(this.state.k);
      k.addEventListener("change", () => this.update({ k: Math.max(0, Number(k.value) || 0) }));
      controls.appendChild(label("k-core", k));
    }
  }

  /** Fetch the active view's payload and redraw. Aborted requests are
   * ignored (a newer one is already on its way); real failures leave the
   * current content alone and raise the retry banner. */
  async refresh(): Promise<void> {
    const { from, to } = resolveWindow(this.state, this.now());
    const state = this.state;
    try {
      switch (state.view) {
        case "prevalence":
          if (state.mode === "relative") {
            renderRelative(this.viewBox(),
              await this.client.prevalenceRelative(from, to, state.granularity));
          } else {
            renderAbsolute(this.viewBox(),
              await this.client.prevalenceAbsolute(from, to, state.granularity));
          }
          break;
        case "domains":
          renderDomains(this.viewBox(),
            await this.client.topDomains(from, to, state.domainClass, state.limit),
            state.domainClass, state.limit, {
              onClassChange: (domainClass) => this.update({ domainClass }),
              onLimitChange: (limit) => this.update({ limit }),
            });
          break;
        case "graph":
          renderGraph(this.viewBox(), await this.client.hashtagGraph(from, to, state.k));
          break;
        case "audiences":
          renderAudiences(this.viewBox(), await this.client.audiences(from, to));
          break;
        case "orientation":
          renderOrientation(this.viewBox(), await this.client.orientation(from, to));
          break;
      }
      clear(this.banner());
    } catch (err) {
      if (isAbort(err)) return;
      this.showError(err);
    }
  }

  private showError(err: unknown): void {
    const slot = this.banner();
    clear(slot);
    const banner = el("div", "banner error");
    const notRun = err instanceof ApiError && err.status === 409;
    banner.appendChild(el("span", "", notRun
      ? "No analysis saved for this window yet; run the audiences job first."
      : `Request failed: ${err instanceof Error ? err.message : String(err)}`));
    const retry = el("button", "retry", "retry");
    retry.addEventListener("click", () => void this.refresh());
    banner.appendChild(retry);
    slot.appendChild(banner);
  }
}

function label(text: string, control: HTMLElement): HTMLElement {
  const wrap = el("label", "control", `${text} `);
  wrap.appendChild(control);
  return wrap;
}

function toggle(values: string[], active: string, onPick: (value: string) => void): HTMLElement {
  const group = el("span", "toggle");
  for (const value of values) {
    const button = el("button", value === active ? "toggle-option active" : "toggle-option", value);
    button.dataset.value = value;
    button.addEventListener("click", () => {
      if (value !== active) onPick(value);
    });
    group.appendChild(button);
  }
  return group;
}

function stampInput(name: string, value: string): HTMLInputElement {
  const input = el("input");
  input.type = "text";
  input.name = name;
  input.placeholder = `${name} (RFC 3339)`;
  input.value = value;
  input.className = "stamp";
  return input;
}

export function boot(): void {
  const root = document.getElementById("app");
  if (!root) throw new Error("missing #app container");
  const app = new App(root, new Client());
  app.start();
}

// auto-boot in the browser; tests import App and drive it directly
if (typeof document !== "undefined" && document.getElementById("app")) {
  boot();
}

export { DEFAULT_STATE };
