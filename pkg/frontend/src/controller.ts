/**
 * Maps user gestures onto control messages, exactly one message per
 * action, and keeps the store synchronized with the server echo. While
 * configuring there is no stream, so after every mutation the controller
 * pulls a fresh snapshot; mid-run the stream delivers echoes by itself.
 */

import { SessionClient, ServerError } from "./client.js";
import { msg } from "./protocol.js";
import { AppStore } from "./store.js";

export function dragForce(
  worldDelta: [number, number, number],
  newtonsPerMeter: number,
): [number, number, number] {
  return [
    worldDelta[0] * newtonsPerMeter,
    worldDelta[1] * newtonsPerMeter,
    worldDelta[2] * newtonsPerMeter,
  ];
}

export class Controller {
  onError: (err: ServerError) => void = () => {};

  constructor(
    private client: SessionClient,
    private store: AppStore,
  ) {
    client.onStatus((s) => store.applyStatus(s));
    client.onFrame((f) => store.applyFrame(f));
  }

  async refresh(): Promise<void> {
    await this.client.request(msg.getSnapshot());
  }

  private async mutate(message: Parameters<SessionClient["request"]>[0]): Promise<number> {
    try {
      const reply = await this.client.request(message);
      const applies = reply.type === "ack" ? reply.applies_at : 0;
      if (this.store.phase !== "running") {
        await this.refresh();
      }
      return applies;
    } catch (err) {
      if (err instanceof ServerError) {
        this.onError(err);
        // resync so optimistic widgets roll back to the server's truth
        if (this.store.status !== null) await this.refresh();
        return -1;
      }
      throw err;
    }
  }

  tapEntity(id: string): Promise<number> {
    return this.mutate(msg.tap(id));
  }

  /** Pointer drag released: convert the world-space delta into a traction. */
  dragEntity(id: string, worldDelta: [number, number, number]): Promise<number> {
    const force = dragForce(worldDelta, this.store.view.dragScale);
    if (force.every((c) => c === 0)) {
      return Promise.resolve(-1); // zero drag is a no-op, nothing to send
    }
    return this.mutate(msg.drag(id, force));
  }

  applyPreset(name: "cantilever" | "bridge"): Promise<number> {
    return this.mutate(msg.preset(name));
  }

  setDomain(dims: { lx: number; ly: number; lz: number }, elemSize: number): Promise<number> {
    return this.mutate(msg.setDomain(dims, elemSize));
  }

  setParams(params: Record<string, unknown>): Promise<number> {
    return this.mutate(msg.setParams(params));
  }

  start(): Promise<number> {
    return this.mutate(msg.start());
  }

  stop(): Promise<number> {
    return this.mutate(msg.stop());
  }

  reset(): Promise<number> {
    return this.mutate(msg.reset());
  }
}
