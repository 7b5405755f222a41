/**
 * Reconnecting station client over one websocket.
 *
 * Subscriptions are declared once and survive reconnects: whenever the
 * socket (re)opens, every desired topic is subscribed again, so a server
 * restart needs no user action. Calls carry fresh correlation ids and
 * resolve from the matching response; calls in flight when the connection
 * drops are rejected rather than left hanging.
 */

import { WireError, decodeServerFrame, encodeCall, encodePublish, encodeSubscribe, encodeUnsubscribe, asErrorPayload } from "./wire.js";

/** The subset of the WebSocket surface the client needs; injectable for tests. */
export interface SocketLike {
  send(data: string): void;
  close(): void;
  onopen: ((ev?: unknown) => void) | null;
  onmessage: ((ev: { data: unknown }) => void) | null;
  onclose: ((ev?: unknown) => void) | null;
  onerror: ((ev?: unknown) => void) | null;
}

export type SocketFactory = (url: string) => SocketLike;

export type ConnectionState = "connecting" | "open" | "backoff" | "closed";

export interface StationSocketOptions {
  factory?: SocketFactory;
  /** Scheduler, injectable for tests. Defaults to setTimeout. */
  schedule?: (fn: () => void, ms: number) => unknown;
  cancel?: (handle: unknown) => void;
  /** Base reconnect delay in ms; doubles per attempt up to maxBackoffMs. */
  baseBackoffMs?: number;
  maxBackoffMs?: number;
  callTimeoutMs?: number;
}

interface PendingCall {
  resolve: (value: unknown) => void;
  reject: (err: Error) => void;
  timer: unknown;
}

export class ServiceError extends Error {
  constructor(public readonly code: string, message: string) {
    super(message);
  }
}

export class StationSocket {
  private socket: SocketLike | null = null;
  private state: ConnectionState = "closed";
  private attempts = 0;
  private nextId = 1;
  private closedByUser = false;
  private reconnectTimer: unknown = null;

  private readonly topics = new Map<string, Set<(payload: unknown) => void>>();
  private readonly pending = new Map<string, PendingCall>();
  private readonly stateListeners = new Set<(state: ConnectionState) => void>();

  private readonly factory: SocketFactory;
  private readonly schedule: (fn: () => void, ms: number) => unknown;
  private readonly cancel: (handle: unknown) => void;
  private readonly baseBackoffMs: number;
  private readonly maxBackoffMs: number;
  private readonly callTimeoutMs: number;

  constructor(private readonly url: string, options: StationSocketOptions = {}) {
    this.factory = options.factory ?? ((u) => new WebSocket(u) as unknown as SocketLike);
    this.schedule = options.schedule ?? ((fn, ms) => setTimeout(fn, ms));
    this.cancel = options.cancel ?? ((handle) => clearTimeout(handle as number));
    this.baseBackoffMs = options.baseBackoffMs ?? 500;
    this.maxBackoffMs = options.maxBackoffMs ?? 8000;
    this.callTimeoutMs = options.callTimeoutMs ?? 10000;
  }

  get connectionState(): ConnectionState {
    return this.state;
  }

  onState(listener: (state: ConnectionState) => void): () => void {
    this.stateListeners.add(listener);
    return () => this.stateListeners.delete(listener);
  }

  connect(): void {
    if (this.state === "connecting" || this.state === "open") return;
    this.closedByUser = false;
    this.open();
  }

  close(): void {
    this.closedByUser = true;
    if (this.reconnectTimer !== null) {
      this.cancel(this.reconnectTimer);
      this.reconnectTimer = null;
    }
    this.socket?.close();
    this.socket = null;
    this.setState("closed");
    this.rejectPending(new Error("connection closed"));
  }

  /** Subscribe to a topic; the handler survives reconnects until cancelled. */
  subscribe(topic: string, handler: (payload: unknown) => void): () => void {
    let handlers = this.topics.get(topic);
    const firstForTopic = handlers === undefined;
    if (handlers === undefined) {
      handlers = new Set();
      this.topics.set(topic, handlers);
    }
    handlers.add(handler);
    if (firstForTopic && this.state === "open") {
      this.socket?.send(encodeSubscribe(topic));
    }
    return () => {
      const set = this.topics.get(topic);
      if (set === undefined) return;
      set.delete(handler);
      if (set.size === 0) {
        this.topics.delete(topic);
        if (this.state === "open") this.socket?.send(encodeUnsubscribe(topic));
      }
    };
  }

  /** Invoke a station service; resolves with the response payload. */
  call(service: string, payload: unknown = {}): Promise<unknown> {
    if (this.state !== "open" || this.socket === null) {
      return Promise.reject(new Error("not connected"));
    }
    const id = `c${this.nextId++}`;
    const frame = encodeCall(service, payload, id);
    return new Promise((resolve, reject) => {
      const timer = this.schedule(() => {
        this.pending.delete(id);
        reject(new Error(`call ${service} timed out`));
      }, this.callTimeoutMs);
      this.pending.set(id, { resolve, reject, timer });
      this.socket!.send(frame);
    });
  }

  /** Publish on an allowlisted topic. Fire-and-forget: no ack requested. */
  publish(topic: string, payload: unknown): boolean {
    if (this.state !== "open" || this.socket === null) return false;
    this.socket.send(encodePublish(topic, payload));
    return true;
  }

  private setState(state: ConnectionState): void {
    if (this.state === state) return;
    this.state = state;
    for (const listener of this.stateListeners) listener(state);
  }

  private open(): void {
    this.setState("connecting");
    const socket = this.factory(this.url);
    this.socket = socket;
    socket.onopen = () => {
      this.attempts = 0;
      this.setState("open");
      for (const topic of this.topics.keys()) {
        socket.send(encodeSubscribe(topic));
      }
    };
    socket.onmessage = (ev) => {
      if (typeof ev.data !== "string") return;
      this.handleFrame(ev.data);
    };
    socket.onerror = () => {
      // onclose follows; nothing to do here.
    };
    socket.onclose = () => {
      if (this.socket !== socket) return;
      this.socket = null;
      this.rejectPending(new Error("connection lost"));
      if (this.closedByUser) {
        this.setState("closed");
        return;
      }
      const delay = Math.min(this.baseBackoffMs * 2 ** this.attempts, this.maxBackoffMs);
      this.attempts++;
      this.setState("backoff");
      this.reconnectTimer = this.schedule(() => {
        this.reconnectTimer = null;
        this.open();
      }, delay);
    };
  }

  private handleFrame(text: string): void {
    let frame;
    try {
      frame = decodeServerFrame(text);
    } catch (e) {
      if (e instanceof WireError) return; // not ours to crash on; drop it
      throw e;
    }
    if (frame.op === "response") {
      if (frame.id === undefined) return;
      const pending = this.pending.get(frame.id);
      if (pending === undefined) return;
      this.pending.delete(frame.id);
      this.cancel(pending.timer);
      if (frame.ok) {
        pending.resolve(frame.payload);
      } else {
        const err = asErrorPayload(frame.payload);
        pending.reject(new ServiceError(err.error, err.message));
      }
      return;
    }
    const handlers = this.topics.get(frame.topic);
    if (handlers === undefined) return;
    for (const handler of handlers) handler(frame.payload);
  }

  private rejectPending(err: Error): void {
    for (const pending of this.pending.values()) {
      this.cancel(pending.timer);
      pending.reject(err);
    }
    this.pending.clear();
  }
}
