/**
 * Session client: one WebSocket, request/reply correlation for control
 * messages, and dispatch of the status/frame stream.
 *
 * The server answers control messages in order, so pending requests form
 * a FIFO queue; a get_snapshot resolves with the next status instead of
 * an ack. Stream pushes (status + binary frame after each iteration) are
 * forwarded to subscribers without touching the queue.
 */

import {
  AckMessage,
  ControlMessage,
  decodeFrame,
  DensityFrame,
  ServerMessage,
  StatusMessage,
} from "./protocol.js";

/** Structural subset of the DOM WebSocket so tests can inject a fake. */
export interface SocketLike {
  binaryType: string;
  send(data: string): void;
  close(): void;
  onmessage: ((ev: any) => void) | null;
  onclose: ((ev: any) => void) | null;
  onerror: ((ev: any) => void) | null;
}

export class ServerError extends Error {
  constructor(
    public code: string,
    public detail: string,
  ) {
    super(`${code}: ${detail}`);
  }
}

interface Pending {
  wantsStatus: boolean;
  resolve: (value: AckMessage | StatusMessage) => void;
  reject: (err: Error) => void;
}

export class SessionClient {
  private pending: Pending[] = [];
  private statusListeners: ((s: StatusMessage) => void)[] = [];
  private frameListeners: ((f: DensityFrame) => void)[] = [];
  private closeListeners: (() => void)[] = [];

  constructor(private socket: SocketLike) {
    socket.binaryType = "arraybuffer";
    socket.onmessage = (ev) => this.dispatch(ev.data);
    socket.onclose = () => {
      this.failAll(new Error("connection closed"));
      this.closeListeners.forEach((cb) => cb());
    };
    socket.onerror = () => this.failAll(new Error("connection error"));
  }

  request(message: ControlMessage): Promise<AckMessage | StatusMessage> {
    return new Promise((resolve, reject) => {
      this.pending.push({
        wantsStatus: message.type === "get_snapshot",
        resolve,
        reject,
      });
      this.socket.send(JSON.stringify(message));
    });
  }

  onStatus(cb: (s: StatusMessage) => void): void {
    this.statusListeners.push(cb);
  }

  onFrame(cb: (f: DensityFrame) => void): void {
    this.frameListeners.push(cb);
  }

  onClose(cb: () => void): void {
    this.closeListeners.push(cb);
  }

  close(): void {
    this.socket.close();
  }

  private dispatch(data: unknown): void {
    if (typeof data === "string") {
      this.dispatchJson(JSON.parse(data) as ServerMessage);
    } else if (data instanceof ArrayBuffer) {
      const frame = decodeFrame(data);
      this.frameListeners.forEach((cb) => cb(frame));
    }
  }

  private dispatchJson(message: ServerMessage): void {
    if (message.type === "status") {
      const head = this.pending[0];
      if (head && head.wantsStatus) {
        this.pending.shift();
        head.resolve(message);
      }
      this.statusListeners.forEach((cb) => cb(message));
      return;
    }
    const head = this.pending.find((p) => !p.wantsStatus);
    if (head) {
      this.pending.splice(this.pending.indexOf(head), 1);
      if (message.type === "ack") {
        head.resolve(message);
      } else {
        head.reject(new ServerError(message.code, message.detail));
      }
    }
  }

  private failAll(err: Error): void {
    const waiting = this.pending;
    this.pending = [];
    waiting.forEach((p) => p.reject(err));
  }
}
