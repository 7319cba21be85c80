/**
 * The 2-D panel: tab strip plus one pane per workflow step. Controls are
 * write-through to the controller and re-read their values from the
 * store's server echo, so a rejected command simply snaps back.
 */

import { Controller } from "./controller.js";
import { drawChart } from "./chart.js";
import { ServerError } from "./client.js";
import { AppStore, Tab } from "./store.js";

const TABS: [Tab, string][] = [
  ["domain", "Domain"],
  ["bcs", "Boundary conditions"],
  ["optimization", "Optimization"],
  ["output", "Output"],
];

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  text = "",
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [k, v] of Object.entries(attrs)) node.setAttribute(k, v);
  if (text) node.textContent = text;
  return node;
}

function slider(
  label: string,
  min: number,
  max: number,
  step: number,
  value: number,
  onCommit: (v: number) => void,
): HTMLElement {
  const wrap = el("label", { class: "control" });
  const name = el("span", {}, label);
  const input = el("input", {
    type: "range",
    min: String(min),
    max: String(max),
    step: String(step),
    value: String(value),
  });
  const readout = el("span", { class: "readout" }, String(value));
  input.addEventListener("input", () => (readout.textContent = input.value));
  input.addEventListener("change", () => onCommit(Number(input.value)));
  wrap.append(name, input, readout);
  return wrap;
}

function toggle(label: string, value: boolean, onCommit: (v: boolean) => void): HTMLElement {
  const wrap = el("label", { class: "control" });
  const input = el("input", { type: "checkbox" });
  input.checked = value;
  input.addEventListener("change", () => onCommit(input.checked));
  wrap.append(input, el("span", {}, label));
  return wrap;
}

export class Panels {
  private toast = el("div", { class: "toast", hidden: "" });

  constructor(
    private rootEl: HTMLElement,
    private store: AppStore,
    private controller: Controller,
  ) {
    controller.onError = (err) => this.showError(err);
    store.subscribe(() => this.render());
    this.render();
  }

  private showError(err: ServerError): void {
    this.toast.textContent = `${err.code}: ${err.detail}`;
    this.toast.hidden = false;
    setTimeout(() => (this.toast.hidden = true), 4000);
  }

  render(): void {
    const s = this.store;
    this.rootEl.replaceChildren();
    const tabs = el("nav", { class: "tabs" });
    for (const [tab, label] of TABS) {
      const b = el("button", { class: s.view.tab === tab ? "tab active" : "tab" }, label);
      b.addEventListener("click", () => s.setTab(tab));
      tabs.append(b);
    }
    this.rootEl.append(tabs);
    const pane = el("section", { class: "pane" });
    if (s.view.tab === "domain") this.domainPane(pane);
    if (s.view.tab === "bcs") this.bcPane(pane);
    if (s.view.tab === "optimization") this.optimizationPane(pane);
    if (s.view.tab === "output") this.outputPane(pane);
    this.rootEl.append(pane, this.toast);
  }

  private domainPane(pane: HTMLElement): void {
    const d = this.store.status?.domain ?? {
      lx: 2, ly: 1, lz: 1, position: [0, 0, 0] as [number, number, number], yaw: 0, elem_size: 0.125,
    };
    const commit = (dims: { lx: number; ly: number; lz: number }, elem: number) =>
      void this.controller.setDomain(dims, elem);
    pane.append(
      el("h3", {}, "Computational domain"),
      slider("length x [m]", 0.2, 5, 0.1, d.lx, (v) => commit({ ...d, lx: v }, d.elem_size)),
      slider("length y [m]", 0.2, 5, 0.1, d.ly, (v) => commit({ ...d, ly: v }, d.elem_size)),
      slider("length z [m]", 0.2, 5, 0.1, d.lz, (v) => commit({ ...d, lz: v }, d.elem_size)),
      slider("element size [m]", 0.05, 0.5, 0.005, d.elem_size, (v) => commit(d, v)),
      el("p", { class: "hint" },
        "Drag a face of the box to resize along its normal; the arrows move " +
        "the box and the ring spins it about the vertical axis (pose only)."),
    );
  }

  private bcPane(pane: HTMLElement): void {
    const cant = el("button", {}, "Cantilever preset");
    cant.addEventListener("click", () => void this.controller.applyPreset("cantilever"));
    const bridge = el("button", {}, "Bridge preset");
    bridge.addEventListener("click", () => void this.controller.applyPreset("bridge"));
    pane.append(
      el("h3", {}, "Boundary conditions"),
      cant,
      bridge,
      slider("drag force scale [N per 10 cm]", 0.1, 20, 0.1, this.store.view.dragScale / 10, (v) => {
        this.store.view.dragScale = v * 10;
      }),
      el("p", { class: "hint" },
        "Click an entity to cycle free / clamped (blue); click a traction " +
        "(red) to clear it. Drag an entity to apply a force along the drag."),
    );
  }

  private optimizationPane(pane: HTMLElement): void {
    const p = this.store.status?.params ?? {};
    const maxiter = (p.maxiter as number) ?? 100;
    const volfrac = (p.volfrac as number) ?? 0.3;
    pane.append(
      el("h3", {}, "Optimization settings"),
      slider("max iterations", 1, 500, 1, maxiter, (v) =>
        void this.controller.setParams({ maxiter: Math.round(v) })),
      slider("volume fraction", 0.05, 0.95, 0.01, volfrac, (v) =>
        void this.controller.setParams({ volfrac: v })),
      toggle("remove voids", (p.remove_voids as boolean) ?? true, (v) =>
        void this.controller.setParams({ remove_voids: v })),
      toggle("iterative solver", (p.iterative_solver as boolean) ?? true, (v) =>
        void this.controller.setParams({ iterative_solver: v })),
    );
    const start = el("button", { class: "primary" }, "Start optimization");
    start.addEventListener("click", () => void this.controller.start());
    const stop = el("button", {}, "Stop");
    stop.addEventListener("click", () => void this.controller.stop());
    const reset = el("button", {}, "Reset");
    reset.addEventListener("click", () => void this.controller.reset());
    pane.append(start, stop, reset);
  }

  private outputPane(pane: HTMLElement): void {
    const s = this.store;
    pane.append(
      el("h3", {}, "Output"),
      el("p", {}, `phase ${s.phase}, iteration ${s.iter}, ` +
        `volume ${(s.status?.volume ?? 0).toFixed(4)}`),
      slider("display threshold", 0, 1, 0.01, s.view.threshold, (v) => s.setThreshold(v)),
    );
    const canvas = el("canvas", { width: "420", height: "180", class: "chart" });
    pane.append(canvas);
    drawChart(canvas, s.history);
  }
}
