import { describe, expect, it } from "vitest";

import { DashboardStore } from "../src/store.js";
import type { TelemetryFrame } from "../src/wire.js";

const frame = (t: number, ids: number[]): TelemetryFrame => ({
  t,
  drones: ids.map((id) => ({
    id,
    x: id,
    y: 0,
    z: 0.8,
    yaw: 0,
    mode: "hovering",
    battery: 97.2,
    r: 0,
    g: 255,
    b: 0,
    cpu: 11.0,
    vx: 0,
    vy: 0,
    vz: 0,
  })),
});

const violation = (drone: number) => ({ drone, t: 1.5, x: 6.0, y: 0.0, z: 1.0 });

describe("DashboardStore", () => {
  it("tracks telemetry and finds drones by id", () => {
    const store = new DashboardStore();
    expect(store.drone(0)).toBeNull();
    store.applyTelemetry(frame(0.5, [0, 1]));
    expect(store.telemetry?.t).toBe(0.5);
    expect(store.drone(1)?.x).toBe(1);
    expect(store.drone(9)).toBeNull();
  });

  it("clears the active block when a run ends", () => {
    const store = new DashboardStore();
    store.applyRunning(true);
    store.applyBlock("b3");
    expect(store.activeBlock).toBe("b3");
    store.applyRunning(false);
    expect(store.running).toBe(false);
    expect(store.activeBlock).toBeNull();
  });

  it("formats errors with and without a block", () => {
    const store = new DashboardStore();
    store.applyError({ message: "timeout", block: "b2" });
    expect(store.lastError).toBe("timeout (block b2)");
    store.applyError({ message: "bad program", block: null });
    expect(store.lastError).toBe("bad program");
  });

  it("holds a prompt until answered", () => {
    const store = new DashboardStore();
    store.applyPrompt({ block: "b4", var: "height", message: "How high?" });
    expect(store.prompt?.var).toBe("height");
    store.clearPrompt();
    expect(store.prompt).toBeNull();
  });

  it("numbers alerts, dismisses by seq, and caps the list at 20", () => {
    const store = new DashboardStore();
    store.applyViolation(violation(0));
    store.applyViolation(violation(1));
    expect(store.alerts.map((a) => a.seq)).toEqual([1, 2]);
    expect(store.alerts[1].drone).toBe(1);

    store.dismissAlert(1);
    expect(store.alerts.map((a) => a.seq)).toEqual([2]);

    for (let i = 0; i < 30; i++) store.applyViolation(violation(i));
    expect(store.alerts).toHaveLength(20);
    expect(store.alerts[0].seq).toBe(13);
    expect(store.alerts[19].seq).toBe(32);
  });

  it("reports stale only when connected telemetry goes quiet", () => {
    let clock = 1000;
    const store = new DashboardStore(() => clock);
    expect(store.stale).toBe(true);

    store.setConnected(true);
    expect(store.stale).toBe(false);

    store.applyTelemetry(frame(0.1, [0]));
    clock += 1999;
    expect(store.stale).toBe(false);
    clock += 2;
    expect(store.stale).toBe(true);

    store.applyTelemetry(frame(0.2, [0]));
    expect(store.stale).toBe(false);

    store.setConnected(false);
    expect(store.stale).toBe(true);
    store.setConnected(true);
    expect(store.stale).toBe(false);
  });

  it("notifies subscribers per change until disposed", () => {
    const store = new DashboardStore();
    let calls = 0;
    const off = store.subscribe(() => calls++);
    store.applyRunning(true);
    store.applyTopics([]);
    expect(calls).toBe(2);
    off();
    store.applyRunning(false);
    expect(calls).toBe(2);
  });
});
