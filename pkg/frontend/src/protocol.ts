/**
 * Wire types for the presenter service, plus a reconnecting socket.
 *
 * Mirrors the service's JSON exactly: message kind in a "type" field,
 * snapshots carrying {version, state}. Display-role sockets are
 * read-only by contract; the server enforces it too.
 */

export type Role = "controller" | "display";

export interface TransformJson {
  element_id: string;
  dx: number;
  dy: number;
  sx: number;
  sy: number;
}

export interface RuntimeJson {
  visible: boolean;
  opacity: number;
  year?: number | null;
  month?: number | null;
  active?: number[];
}

export interface StateJson {
  version: number;
  selected_layer: string | null;
  calibration_locked: boolean;
  runtimes: Record<string, RuntimeJson>;
  transforms: Record<string, TransformJson>;
}

export interface Snapshot {
  version: number;
  state: StateJson;
}

export type StateEventJson =
  | { type: "select_layer"; id: string }
  | { type: "set_layer_visible"; id: string; visible: boolean }
  | { type: "toggle_sublayer"; id: string; index: number }
  | { type: "set_month"; id: string; month: number }
  | { type: "set_year"; id: string; year: number }
  | { type: "set_opacity"; id: string; value: number }
  | ({ type: "set_transform" } & TransformJson)
  | { type: "reset_layout" }
  | { type: "set_calibration_locked"; flag: boolean };

export type ServerMessage =
  | { type: "welcome"; client_id: string; snapshot: Snapshot }
  | { type: "snapshot"; version: number; state: StateJson }
  | { type: "rejected"; reason_code: string; message: string }
  | { type: "ping" }
  | { type: "pong" };

export type ConnectionStatus = "connecting" | "connected" | "reconnecting";

/** Minimal shape shared by browser WebSocket and the `ws` package. */
export interface SocketLike {
  send(data: string): void;
  close(): void;
  onopen: ((ev?: unknown) => void) | null;
  onclose: ((ev?: unknown) => void) | null;
  onerror: ((ev?: unknown) => void) | null;
  onmessage: ((ev: { data: unknown }) => void) | null;
}

export type SocketFactory = (url: string) => SocketLike;

export interface PresenterSocketOptions {
  url: string;
  role: Role;
  clientName?: string;
  makeSocket: SocketFactory;
  onSnapshot: (snapshot: Snapshot) => void;
  onRejected?: (reasonCode: string, message: string) => void;
  onStatus?: (status: ConnectionStatus) => void;
  /** Base reconnect delay in ms; doubles per attempt up to 16x. */
  reconnectDelayMs?: number;
  scheduler?: (fn: () => void, ms: number) => void;
}

export class PresenterSocket {
  private opts: PresenterSocketOptions;
  private socket: SocketLike | null = null;
  private attempts = 0;
  private closed = false;
  clientId: string | null = null;

  constructor(opts: PresenterSocketOptions) {
    this.opts = opts;
  }

  connect(): void {
    if (this.closed) return;
    this.opts.onStatus?.(this.attempts === 0 ? "connecting" : "reconnecting");
    const socket = this.opts.makeSocket(this.opts.url);
    this.socket = socket;
    socket.onopen = () => {
      socket.send(JSON.stringify({
        type: "hello",
        role: this.opts.role,
        client_name: this.opts.clientName ?? this.opts.role,
      }));
    };
    socket.onmessage = (ev) => this.handleMessage(String(ev.data));
    socket.onerror = () => { /* onclose follows; reconnect happens there */ };
    socket.onclose = () => {
      this.socket = null;
      if (this.closed) return;
      this.opts.onStatus?.("reconnecting");
      const delay = (this.opts.reconnectDelayMs ?? 500) * Math.min(2 ** this.attempts, 16);
      this.attempts += 1;
      const schedule = this.opts.scheduler ?? ((fn, ms) => setTimeout(fn, ms));
      schedule(() => this.connect(), delay);
    };
  }

  private handleMessage(raw: string): void {
    let msg: ServerMessage;
    try {
      msg = JSON.parse(raw) as ServerMessage;
    } catch {
      return; // not ours; ignore rather than tearing the session down
    }
    switch (msg.type) {
      case "welcome":
        this.attempts = 0;
        this.clientId = msg.client_id;
        this.opts.onStatus?.("connected");
        this.opts.onSnapshot(msg.snapshot);
        break;
      case "snapshot":
        this.opts.onSnapshot({ version: msg.version, state: msg.state });
        break;
      case "rejected":
        this.opts.onRejected?.(msg.reason_code, msg.message);
        break;
      case "ping":
        this.socket?.send(JSON.stringify({ type: "pong" }));
        break;
      case "pong":
        break;
    }
  }

  sendEvent(event: StateEventJson): void {
    if (this.opts.role !== "controller") {
      throw new Error("display sockets are read-only");
    }
    this.socket?.send(JSON.stringify({ type: "event", event }));
  }

  ping(): void {
    this.socket?.send(JSON.stringify({ type: "ping" }));
  }

  close(): void {
    this.closed = true;
    this.socket?.close();
    this.socket = null;
  }
}

/** ws:// URL for the service hosting a given page location. */
export function wsUrl(location: { protocol: string; host: string }): string {
  const scheme = location.protocol === "https:" ? "wss" : "ws";
  return `${scheme}://${location.host}/ws`;
}
