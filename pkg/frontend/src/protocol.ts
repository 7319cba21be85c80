/**
 * Wire protocol: JSON control/status messages and the binary density frame.
 *
 * Frame layout (little endian, 24-byte header):
 *   magic "ARCD" | version u8 = 1 | 3 reserved bytes | iter u32 |
 *   nx u32 | ny u32 | nz u32 | nx*ny*nz payload bytes, x fastest,
 *   each byte round(255 * density), removed voids at 0.
 */

export type Phase = "configuring" | "running" | "finished" | "stopped";

export interface DomainEcho {
  lx: number;
  ly: number;
  lz: number;
  position: [number, number, number];
  yaw: number;
  elem_size: number;
}

export interface EntityEcho {
  state: "clamped" | "traction" | "free";
  force?: [number, number, number];
}

export interface StatusMessage {
  type: "status";
  phase: Phase;
  iter: number;
  compliance: number | null;
  volume: number;
  history_tail: [number, number][];
  domain: DomainEcho;
  shape: [number, number, number];
  bcs: { entities: Record<string, EntityEcho> };
  params: Record<string, unknown>;
}

export interface AckMessage {
  type: "ack";
  applies_at: number;
}

export interface ErrorMessage {
  type: "error";
  code: string;
  detail: string;
}

export type ServerMessage = StatusMessage | AckMessage | ErrorMessage;

export interface DensityFrame {
  iteration: number;
  shape: [number, number, number];
  densities: Uint8Array;
}

export const FRAME_MAGIC = 0x44435241; // "ARCD" read as LE u32
export const FRAME_VERSION = 1;
export const FRAME_HEADER_BYTES = 24;

export function decodeFrame(buffer: ArrayBuffer): DensityFrame {
  if (buffer.byteLength < FRAME_HEADER_BYTES) {
    throw new Error(`frame shorter than header: ${buffer.byteLength} bytes`);
  }
  const view = new DataView(buffer);
  if (view.getUint32(0, true) !== FRAME_MAGIC) {
    throw new Error("bad frame magic");
  }
  if (view.getUint8(4) !== FRAME_VERSION) {
    throw new Error(`unsupported frame version ${view.getUint8(4)}`);
  }
  const iteration = view.getUint32(8, true);
  const nx = view.getUint32(12, true);
  const ny = view.getUint32(16, true);
  const nz = view.getUint32(20, true);
  const n = nx * ny * nz;
  const payload = new Uint8Array(buffer, FRAME_HEADER_BYTES);
  if (payload.length !== n) {
    throw new Error(`payload length ${payload.length} != ${n}`);
  }
  return { iteration, shape: [nx, ny, nz], densities: payload.slice() };
}

/** Flat x-fastest payload index -> (ex, ey, ez). */
export function voxelGridIndex(
  i: number,
  shape: [number, number, number],
): [number, number, number] {
  const [nx, ny] = shape;
  return [i % nx, Math.floor(i / nx) % ny, Math.floor(i / (nx * ny))];
}

// -- control messages ------------------------------------------------------

export type ControlMessage =
  | { type: "set_domain"; domain: Partial<DomainEcho>; elem_size: number }
  | { type: "tap"; entity: string }
  | { type: "drag"; entity: string; force: [number, number, number] }
  | { type: "preset"; name: "cantilever" | "bridge" }
  | { type: "set_params"; [key: string]: unknown }
  | { type: "start" }
  | { type: "stop" }
  | { type: "reset" }
  | { type: "get_snapshot" };

export const msg = {
  setDomain(
    dims: { lx: number; ly: number; lz: number; position?: [number, number, number]; yaw?: number },
    elemSize: number,
  ): ControlMessage {
    return { type: "set_domain", domain: dims, elem_size: elemSize };
  },
  tap(entity: string): ControlMessage {
    return { type: "tap", entity };
  },
  drag(entity: string, force: [number, number, number]): ControlMessage {
    return { type: "drag", entity, force };
  },
  preset(name: "cantilever" | "bridge"): ControlMessage {
    return { type: "preset", name };
  },
  setParams(params: Record<string, unknown>): ControlMessage {
    return { type: "set_params", ...params };
  },
  start(): ControlMessage {
    return { type: "start" };
  },
  stop(): ControlMessage {
    return { type: "stop" };
  },
  reset(): ControlMessage {
    return { type: "reset" };
  },
  getSnapshot(): ControlMessage {
    return { type: "get_snapshot" };
  },
};
