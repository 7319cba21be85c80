/**
 * UI state-machine tests: the documented tap/drag interaction grammar,
 * driven through the real client/controller/store stack against a fake
 * server speaking the engine's protocol.
 */

import { beforeEach, describe, expect, it } from "vitest";

import { SessionClient } from "../src/client.js";
import { Controller, dragForce } from "../src/controller.js";
import { STATE_COLORS } from "../src/scene.js";
import { AppStore } from "../src/store.js";
import { FakeServer } from "./fakeServer.js";

let server: FakeServer;
let store: AppStore;
let controller: Controller;

beforeEach(() => {
  server = new FakeServer();
  store = new AppStore();
  controller = new Controller(new SessionClient(server), store);
});

describe("tap cycle on a traction face", () => {
  it("click clears, click clamps (blue), click clears again", async () => {
    // paint a traction on the top face by dragging it downward 20 cm
    await controller.dragEntity("face:z+", [0, 0, -0.2]);
    expect(store.entityState("face:z+").state).toBe("traction");
    expect(store.entityState("face:z+").force).toEqual([0, 0, -2]); // 1 N per 10 cm

    await controller.tapEntity("face:z+");
    expect(store.entityState("face:z+").state).toBe("free");

    await controller.tapEntity("face:z+");
    expect(store.entityState("face:z+").state).toBe("clamped");

    await controller.tapEntity("face:z+");
    expect(store.entityState("face:z+").state).toBe("free");
  });

  it("clamped entities are tinted blue, tractions red", () => {
    expect(STATE_COLORS.clamped).toBe(0x2563eb);
    expect(STATE_COLORS.traction).toBe(0xdc2626);
  });
});

describe("drag to traction", () => {
  it("a downward drag on the top face sets a downward force", async () => {
    await controller.dragEntity("face:z+", [0, 0, -0.35]);
    const echo = store.entityState("face:z+");
    expect(echo.state).toBe("traction");
    expect(echo.force![2]).toBeCloseTo(-3.5, 10);
    expect(echo.force![0]).toBe(0);
  });

  it("force magnitude scales with drag distance", () => {
    expect(dragForce([0, 0, -0.1], 10)).toEqual([0, 0, -1]);
    expect(dragForce([0.2, 0, -0.1], 10)).toEqual([2, 0, -1]);
  });

  it("a zero drag sends nothing", async () => {
    const before = server.sent.length;
    await controller.dragEntity("face:z+", [0, 0, 0]);
    expect(server.sent.length).toBe(before);
  });

  it("each gesture maps to exactly one control message", async () => {
    server.phase = "running";
    await controller.refresh(); // store now knows the run is live: no sync pulls
    const before = server.sent.length;
    await controller.tapEntity("face:y+");
    await controller.dragEntity("face:z+", [0, 0, -0.1]);
    const sent = server.sent.slice(before);
    expect(sent.map((m) => m.type)).toEqual(["tap", "drag"]);
  });
});

describe("mid-run parameter changes", () => {
  it("volfrac change while running is acknowledged for a future iteration", async () => {
    server.entities = {
      "face:x-": { state: "clamped" },
      "edge:x+z-": { state: "traction", force: [0, 0, -1] },
    };
    await controller.start();
    server.iter = 7; // seven iterations have completed
    const applies = await controller.setParams({ volfrac: 0.4 });
    expect(applies).toBeGreaterThan(7);
    expect(server.params.volfrac).toBe(0.4);
  });

  it("rejected values surface as errors and change nothing", async () => {
    let seen: string | null = null;
    controller.onError = (err) => (seen = err.code);
    await controller.setParams({ volfrac: 1.5 });
    expect(seen).toBe("bad_value");
    expect(server.params.volfrac).toBe(0.3);
  });
});

describe("start pre-checks surface inline", () => {
  it("start with no clamp reports singular_system", async () => {
    let seen: string | null = null;
    controller.onError = (err) => (seen = err.code);
    await controller.start();
    expect(seen).toBe("singular_system");
    expect(store.phase).toBe("configuring");
  });

  it("start with no traction reports zero_load", async () => {
    server.entities = { "face:x-": { state: "clamped" } };
    let seen: string | null = null;
    controller.onError = (err) => (seen = err.code);
    await controller.start();
    expect(seen).toBe("zero_load");
  });
});
