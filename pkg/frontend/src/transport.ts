// WebSocket wrapper: parse/route messages, queue sends until open, and
// reconnect with the server's session token so a dropped connection resumes
// instead of orphaning the run (the server owns all session state).

import type { WireMessage } from "./wire.js";
import { controlMessage, encodeMessage, parseMessage } from "./wire.js";

export interface SocketLike {
  send(data: string): void;
  close(): void;
  onopen: (() => void) | null;
  onmessage: ((ev: { data: string }) => void) | null;
  onclose: (() => void) | null;
  onerror: (() => void) | null;
}

export type SocketFactory = (url: string) => SocketLike;
export type Scheduler = (fn: () => void, ms: number) => void;

export interface TransportHooks {
  onMessage: (msg: WireMessage) => void;
  onState?: (state: "connecting" | "open" | "closed") => void;
  onWireError?: (detail: string) => void;
}

const defaultFactory: SocketFactory = (url) => new WebSocket(url) as unknown as SocketLike;
const defaultScheduler: Scheduler = (fn, ms) => setTimeout(fn, ms);

export class WsTransport {
  token: string | null = null;
  private sock: SocketLike | null = null;
  private open = false;
  private stopped = false;
  private outbox: string[] = [];

  constructor(
    private url: string,
    private hooks: TransportHooks,
    private factory: SocketFactory = defaultFactory,
    private reconnectMs = 1000,
    private schedule: Scheduler = defaultScheduler,
  ) {}

  connect(): void {
    this.stopped = false;
    const sock = this.factory(this.url);
    this.sock = sock;
    this.hooks.onState?.("connecting");

    sock.onopen = () => {
      this.open = true;
      this.hooks.onState?.("open");
      if (this.token) {
        sock.send(encodeMessage(controlMessage("resume", { token: this.token })));
      }
      for (const data of this.outbox.splice(0)) sock.send(data);
    };
    sock.onmessage = (ev) => {
      let msg: WireMessage;
      try {
        msg = parseMessage(ev.data);
      } catch (err) {
        this.hooks.onWireError?.(String(err));
        return;
      }
      if (msg.type === "control" && typeof msg.payload.token === "string") {
        this.token = msg.payload.token;
      }
      this.hooks.onMessage(msg);
    };
    sock.onclose = () => {
      this.open = false;
      this.sock = null;
      this.hooks.onState?.("closed");
      if (!this.stopped) this.schedule(() => this.connect(), this.reconnectMs);
    };
    sock.onerror = () => sock.close();
  }

  send(msg: WireMessage): void {
    const data = encodeMessage(msg);
    if (this.open && this.sock) {
      this.sock.send(data);
    } else {
      this.outbox.push(data);
    }
  }

  close(): void {
    this.stopped = true;
    this.sock?.close();
  }
}
