/**
 * Client state: nothing here is authoritative. Every field mirrors the
 * server's status echo or the latest density frame, so reconnecting and
 * pulling one snapshot rebuilds the whole view. Tab switching and the
 * display threshold are view-only and never touch the server.
 */

import { DensityFrame, EntityEcho, Phase, StatusMessage } from "./protocol.js";

export type Tab = "domain" | "bcs" | "optimization" | "output";

export interface ViewState {
  tab: Tab;
  threshold: number;
  hover: string | null;
  /** drag-to-force scale, Newtons per meter of world-space drag (1 N / 10 cm) */
  dragScale: number;
}

export class AppStore {
  status: StatusMessage | null = null;
  frame: DensityFrame | null = null;
  history: [number, number][] = [];
  view: ViewState = { tab: "domain", threshold: 0.5, hover: null, dragScale: 10.0 };

  private listeners: (() => void)[] = [];

  subscribe(cb: () => void): void {
    this.listeners.push(cb);
  }

  private notify(): void {
    this.listeners.forEach((cb) => cb());
  }

  applyStatus(status: StatusMessage): void {
    const wasReset =
      this.status !== null && status.iter < this.status.iter;
    if (wasReset) {
      this.history = [];
      this.frame = null;
    }
    const last = this.history.length ? this.history[this.history.length - 1][0] : 0;
    for (const [it, c] of status.history_tail) {
      if (it > last) this.history.push([it, c]);
    }
    this.status = status;
    this.notify();
  }

  applyFrame(frame: DensityFrame): void {
    this.frame = frame;
    this.notify();
  }

  get phase(): Phase {
    return this.status?.phase ?? "configuring";
  }

  get iter(): number {
    return this.status?.iter ?? 0;
  }

  entityState(id: string): EntityEcho {
    const echo = this.status?.bcs.entities[id];
    return echo ?? { state: "free" };
  }

  setTab(tab: Tab): void {
    this.view.tab = tab; // view-only: no server traffic
    this.notify();
  }

  setThreshold(t: number): void {
    this.view.threshold = Math.min(1, Math.max(0, t));
    this.notify();
  }

  setHover(id: string | null): void {
    this.view.hover = id;
    this.notify();
  }
}
