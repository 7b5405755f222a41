import { describe, expect, it } from "vitest";

import { ServiceError, StationSocket, type SocketLike } from "../src/socket.js";

class FakeSocket implements SocketLike {
  sent: string[] = [];
  closed = false;
  onopen: ((ev?: unknown) => void) | null = null;
  onmessage: ((ev: { data: unknown }) => void) | null = null;
  onclose: ((ev?: unknown) => void) | null = null;
  onerror: ((ev?: unknown) => void) | null = null;

  send(data: string): void {
    this.sent.push(data);
  }

  close(): void {
    this.closed = true;
  }

  reply(frame: unknown): void {
    this.onmessage?.({ data: typeof frame === "string" ? frame : JSON.stringify(frame) });
  }

  frames(): Array<Record<string, unknown>> {
    return this.sent.map((s) => JSON.parse(s) as Record<string, unknown>);
  }
}

interface Timer {
  id: number;
  fn: () => void;
  ms: number;
}

/** Deterministic harness: sockets come from a list, timers fire by hand. */
function harness(options: { callTimeoutMs?: number } = {}) {
  const sockets: FakeSocket[] = [];
  const timers: Timer[] = [];
  let nextTimer = 1;
  const socket = new StationSocket("ws://test/ws", {
    factory: () => {
      const s = new FakeSocket();
      sockets.push(s);
      return s;
    },
    schedule: (fn, ms) => {
      const id = nextTimer++;
      timers.push({ id, fn, ms });
      return id;
    },
    cancel: (handle) => {
      const i = timers.findIndex((t) => t.id === handle);
      if (i >= 0) timers.splice(i, 1);
    },
    callTimeoutMs: options.callTimeoutMs,
  });
  const fireNext = () => {
    const timer = timers.shift();
    if (timer === undefined) throw new Error("no timer scheduled");
    timer.fn();
    return timer.ms;
  };
  return { socket, sockets, timers, fireNext };
}

function openFirst(h: ReturnType<typeof harness>): FakeSocket {
  h.socket.connect();
  const fake = h.sockets[0];
  fake.onopen?.();
  return fake;
}

describe("StationSocket subscriptions", () => {
  it("subscribes declared topics when the socket opens", () => {
    const h = harness();
    const seen: unknown[] = [];
    h.socket.subscribe("telemetry", (p) => seen.push(p));
    expect(h.socket.connectionState).toBe("closed");

    const fake = openFirst(h);
    expect(h.socket.connectionState).toBe("open");
    expect(fake.frames()).toEqual([{ op: "subscribe", topic: "telemetry" }]);

    fake.reply({ op: "event", topic: "telemetry", payload: { t: 0.1, drones: [] } });
    expect(seen).toEqual([{ t: 0.1, drones: [] }]);
  });

  it("sends one subscribe per topic and unsubscribes after the last disposer", () => {
    const h = harness();
    const fake = openFirst(h);
    const offA = h.socket.subscribe("running", () => {});
    const offB = h.socket.subscribe("running", () => {});
    expect(fake.frames()).toEqual([{ op: "subscribe", topic: "running" }]);

    offA();
    expect(fake.sent).toHaveLength(1);
    offB();
    expect(fake.frames()[1]).toEqual({ op: "unsubscribe", topic: "running" });
  });

  it("resubscribes every topic after a reconnect", () => {
    const h = harness();
    h.socket.subscribe("telemetry", () => {});
    h.socket.subscribe("running", () => {});
    const first = openFirst(h);
    expect(first.sent).toHaveLength(2);

    first.onclose?.();
    expect(h.socket.connectionState).toBe("backoff");
    h.fireNext();
    const second = h.sockets[1];
    second.onopen?.();
    expect(second.frames().map((f) => f.topic).sort()).toEqual(["running", "telemetry"]);
  });

  it("drops frames that fail wire validation without killing the session", () => {
    const h = harness();
    const seen: unknown[] = [];
    h.socket.subscribe("running", (p) => seen.push(p));
    const fake = openFirst(h);

    fake.reply("not json at all");
    fake.reply({ op: "event", topic: "running", payload: true, extra: 1 });
    fake.reply({ op: "event", topic: "running", payload: true });
    expect(seen).toEqual([true]);
  });

  it("ignores events for topics nobody watches", () => {
    const h = harness();
    const fake = openFirst(h);
    fake.reply({ op: "event", topic: "telemetry", payload: { t: 1, drones: [] } });
    expect(h.socket.connectionState).toBe("open");
  });
});

describe("StationSocket calls", () => {
  it("correlates responses by id, out of order", async () => {
    const h = harness();
    const fake = openFirst(h);
    const a = h.socket.call("list_programs");
    const b = h.socket.call("get_safe_area");
    const calls = fake.frames();
    expect(calls.map((f) => f.id)).toEqual(["c1", "c2"]);
    expect(calls[0]).toEqual({ op: "call", service: "list_programs", payload: {}, id: "c1" });

    fake.reply({ op: "response", ok: true, id: "c2", payload: { enabled: false } });
    fake.reply({ op: "response", ok: true, id: "c1", payload: { programs: [] } });
    await expect(b).resolves.toEqual({ enabled: false });
    await expect(a).resolves.toEqual({ programs: [] });
  });

  it("rejects failed responses with the service error code", async () => {
    const h = harness();
    const fake = openFirst(h);
    const p = h.socket.call("stop");
    fake.reply({
      op: "response",
      ok: false,
      id: "c1",
      payload: { error: "NotRunning", message: "no active run" },
    });
    const err = (await p.catch((e: unknown) => e)) as ServiceError;
    expect(err).toBeInstanceOf(ServiceError);
    expect(err.code).toBe("NotRunning");
    expect(err.message).toBe("no active run");
  });

  it("rejects when not connected", async () => {
    const h = harness();
    await expect(h.socket.call("stop")).rejects.toThrow("not connected");
  });

  it("times out a call the server never answers", async () => {
    const h = harness({ callTimeoutMs: 2000 });
    openFirst(h);
    const p = h.socket.call("run", { name: "hop" });
    expect(h.timers[0]?.ms).toBe(2000);
    expect(h.fireNext()).toBe(2000);
    await expect(p).rejects.toThrow("call run timed out");
  });

  it("rejects calls in flight when the connection drops", async () => {
    const h = harness();
    const fake = openFirst(h);
    const p = h.socket.call("land_all");
    fake.onclose?.();
    await expect(p).rejects.toThrow("connection lost");
    expect(h.timers.filter((t) => t.ms === 10000)).toHaveLength(0);
  });

  it("ignores responses for ids it no longer tracks", () => {
    const h = harness();
    const fake = openFirst(h);
    fake.reply({ op: "response", ok: true, id: "c99", payload: null });
    expect(h.socket.connectionState).toBe("open");
  });
});

describe("StationSocket publish", () => {
  it("sends publishes only while open", () => {
    const h = harness();
    const cmd = { drone: 0, vx: 1, vy: 0, vz: 0, yaw_rate: 0 };
    expect(h.socket.publish("manual_cmd", cmd)).toBe(false);

    const fake = openFirst(h);
    expect(h.socket.publish("manual_cmd", cmd)).toBe(true);
    expect(fake.frames()[0]).toEqual({ op: "publish", topic: "manual_cmd", payload: cmd });

    fake.onclose?.();
    expect(h.socket.publish("manual_cmd", cmd)).toBe(false);
  });
});

describe("StationSocket reconnect policy", () => {
  it("doubles the delay per attempt up to the cap", () => {
    const h = harness();
    openFirst(h);
    const delays: number[] = [];
    for (let i = 0; i < 6; i++) {
      h.sockets[i].onclose?.();
      const timer = h.timers[0];
      delays.push(timer.ms);
      h.fireNext();
    }
    expect(delays).toEqual([500, 1000, 2000, 4000, 8000, 8000]);
  });

  it("resets the backoff ladder once a connection opens", () => {
    const h = harness();
    openFirst(h);
    h.sockets[0].onclose?.();
    h.fireNext();
    h.sockets[1].onclose?.();
    expect(h.timers[0].ms).toBe(1000);
    h.fireNext();

    h.sockets[2].onopen?.();
    h.sockets[2].onclose?.();
    expect(h.timers[0].ms).toBe(500);
  });

  it("stays closed after close() instead of reconnecting", () => {
    const h = harness();
    const fake = openFirst(h);
    h.socket.close();
    expect(fake.closed).toBe(true);
    expect(h.socket.connectionState).toBe("closed");
    fake.onclose?.();
    expect(h.timers).toHaveLength(0);
    expect(h.socket.connectionState).toBe("closed");
  });

  it("notifies state listeners across the lifecycle", () => {
    const h = harness();
    const states: string[] = [];
    h.socket.onState((s) => states.push(s));
    const fake = openFirst(h);
    fake.onclose?.();
    h.fireNext();
    h.sockets[1].onopen?.();
    expect(states).toEqual(["connecting", "open", "backoff", "connecting", "open"]);
  });
});
