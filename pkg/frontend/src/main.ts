/** Bootstrap: connect, wire store/controller/panels/3-D view, render. */

import { SessionClient } from "./client.js";
import { Controller } from "./controller.js";
import { Panels } from "./panels.js";
import { View3D } from "./scene.js";
import { AppStore } from "./store.js";

function serverUrl(): string {
  const override = new URLSearchParams(location.search).get("server");
  if (override) return override;
  const proto = location.protocol === "https:" ? "wss" : "ws";
  const host = location.hostname || "127.0.0.1";
  return `${proto}://${host}:8732/session`;
}

function boot(): void {
  const store = new AppStore();
  const socket = new WebSocket(serverUrl());
  const client = new SessionClient(socket);
  const controller = new Controller(client, store);

  const panelRoot = document.getElementById("panel")!;
  const canvas = document.getElementById("view") as HTMLCanvasElement;
  new Panels(panelRoot, store, controller);
  const view = new View3D(canvas, store, controller);

  const fit = () => {
    const rect = canvas.parentElement!.getBoundingClientRect();
    view.resize(rect.width, rect.height);
  };
  window.addEventListener("resize", fit);
  fit();
  view.renderLoop();

  socket.addEventListener("open", () => {
    void controller.refresh(); // stateless view: rebuild everything from one snapshot
  });
  client.onClose(() => {
    const banner = document.getElementById("banner")!;
    banner.textContent = "connection lost; reload to reconnect";
    banner.hidden = false;
  });
}

boot();
