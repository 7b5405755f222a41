/**
 * Operator loop against a real station process.
 *
 * Spawns `swarmlab serve`, connects the browser client code over the actual
 * websocket, and walks the three flows an operator cares about: landing
 * everything mid-run, a safe-area breach that alerts and grounds the
 * offender, and first-person manual flight at the commanded speed. Programs
 * are built with the editor workspace and stored over HTTP exactly the way
 * the editor panel does it.
 */

import { spawn, type ChildProcess } from "node:child_process";
import { mkdtempSync, rmSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import WebSocket from "ws";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { EditorWorkspace } from "../src/editor.js";
import { FpvController } from "../src/fpv.js";
import { DashboardStore } from "../src/store.js";
import { ServiceError, StationSocket, type SocketLike } from "../src/socket.js";
import { parseTrace } from "../src/player.js";
import type { TelemetryFrame, ViolationEvent } from "../src/wire.js";

const PORT = 8753;
const BASE = `http://127.0.0.1:${PORT}`;
const DRONES = 3;

/** Adapt the ws package to the browser-shaped surface the client expects. */
function nodeSocketFactory(url: string): SocketLike {
  const raw = new WebSocket(url);
  const adapter: SocketLike = {
    send: (data) => raw.send(data),
    close: () => raw.close(),
    onopen: null,
    onmessage: null,
    onclose: null,
    onerror: null,
  };
  raw.onopen = () => adapter.onopen?.();
  raw.onmessage = (ev) => {
    const data = ev.data;
    adapter.onmessage?.({ data: typeof data === "string" ? data : String(data) });
  };
  raw.onclose = () => adapter.onclose?.();
  raw.onerror = () => adapter.onerror?.();
  return adapter;
}

async function until(desc: string, cond: () => boolean, timeoutMs = 30000): Promise<void> {
  const start = Date.now();
  while (!cond()) {
    if (Date.now() - start > timeoutMs) throw new Error(`timed out waiting for ${desc}`);
    await new Promise((r) => setTimeout(r, 50));
  }
}

function buildProgram(name: string, steps: (ws: EditorWorkspace) => void): Uint8Array {
  const ws = new EditorWorkspace();
  ws.setName(name);
  steps(ws);
  expect(ws.validate()).toEqual([]);
  return ws.serialize();
}

async function putProgram(name: string, bytes: Uint8Array): Promise<void> {
  const res = await fetch(`${BASE}/api/programs/${name}`, {
    method: "PUT",
    headers: { "content-type": "application/json" },
    body: new TextDecoder().decode(bytes),
  });
  expect(res.status).toBe(200);
  expect(await res.json()).toEqual({ ok: true, name });
}

let server: ChildProcess;
let serverLog = "";
let programsDir: string;
let socket: StationSocket;
const store = new DashboardStore();
const violations: ViolationEvent[] = [];
let fpvSamples: Array<{ t: number; x: number; y: number }> | null = null;
let fpv: FpvController;

function allDrones(pred: (d: { z: number; mode: string }) => boolean): boolean {
  const frame = store.telemetry;
  return frame !== null && frame.drones.length === DRONES && frame.drones.every(pred);
}

async function stopIgnoringIdle(): Promise<void> {
  await socket.call("stop").catch((e: unknown) => {
    if (!(e instanceof ServiceError && e.code === "NotRunning")) throw e;
  });
}

beforeAll(async () => {
  programsDir = mkdtempSync(join(tmpdir(), "swarmlab-e2e-"));
  server = spawn(
    "python3",
    [
      "-m",
      "swarmlab.cli",
      "serve",
      "--port",
      String(PORT),
      "--drones",
      String(DRONES),
      "--programs",
      programsDir,
    ],
    { cwd: programsDir, stdio: ["ignore", "pipe", "pipe"] },
  );
  server.stdout?.on("data", (chunk: Buffer) => (serverLog += chunk.toString()));
  server.stderr?.on("data", (chunk: Buffer) => (serverLog += chunk.toString()));

  const deadline = Date.now() + 30000;
  for (;;) {
    try {
      const res = await fetch(`${BASE}/healthz`);
      if (res.ok) break;
    } catch {
      // not up yet
    }
    if (Date.now() > deadline) {
      throw new Error(`station never became healthy; log so far:\n${serverLog}`);
    }
    await new Promise((r) => setTimeout(r, 200));
  }

  socket = new StationSocket(`ws://127.0.0.1:${PORT}/ws`, { factory: nodeSocketFactory });
  socket.subscribe("telemetry", (payload) => {
    const frame = payload as TelemetryFrame;
    store.applyTelemetry(frame);
    const zero = frame.drones.find((d) => d.id === 0);
    if (zero !== undefined) {
      fpv.updateYaw(zero.yaw);
      fpvSamples?.push({ t: frame.t, x: zero.x, y: zero.y });
    }
  });
  socket.subscribe("running", (payload) => store.applyRunning(payload === true));
  socket.subscribe("block", (payload) => store.applyBlock(String(payload)));
  socket.subscribe("safe_area_violation", (payload) => {
    const event = payload as ViolationEvent;
    violations.push(event);
    store.applyViolation(event);
  });
  fpv = new FpvController((cmd) => socket.publish("manual_cmd", cmd));

  socket.connect();
  await until("websocket open", () => socket.connectionState === "open", 15000);
  await until("first telemetry", () => store.telemetry !== null, 15000);
}, 60000);

afterAll(async () => {
  socket?.close();
  if (server !== undefined && server.exitCode === null) {
    const gone = new Promise<void>((resolve) => server.once("exit", () => resolve()));
    server.kill("SIGTERM");
    await Promise.race([gone, new Promise((r) => setTimeout(r, 15000))]);
    if (server.exitCode === null) server.kill("SIGKILL");
  }
  rmSync(programsDir, { recursive: true, force: true });
}, 30000);

describe("operator loop", () => {
  it("lands the whole fleet mid-run", async () => {
    await putProgram(
      "hover",
      buildProgram("hover", (ws) => {
        const take = ws.insert("TakeoffAll", { parentId: null, slot: "body", index: 0 });
        ws.setParam(take.id, "z", { t: "float", v: 1.0 });
        const wait = ws.insert("Wait", { parentId: null, slot: "body", index: 1 });
        ws.setParam(wait.id, "seconds", { t: "float", v: 60.0 });
      }),
    );

    const reply = (await socket.call("run", { name: "hover" })) as { run_id: string };
    expect(reply.run_id).toMatch(/^run-\d+$/);
    await until("fleet airborne", () =>
      allDrones((d) => d.mode === "hovering" && d.z > 0.7),
    );
    expect(store.running).toBe(true);

    const landing = (await socket.call("land_all")) as { landing: boolean };
    expect(landing.landing).toBe(true);
    await until("fleet landed", () => allDrones((d) => d.mode === "landed"));
    await until("run stopped", () => !store.running);
    for (const drone of store.telemetry!.drones) {
      expect(drone.z).toBeLessThan(0.3);
    }

    const res = await fetch(`${BASE}/api/trace/${reply.run_id}`);
    expect(res.status).toBe(200);
    const trace = parseTrace(await res.text());
    expect(trace.length).toBeGreaterThan(10);
    expect(trace[0].drones).toHaveLength(DRONES);
  }, 60000);

  it("alerts on a safe-area breach and grounds the offender", async () => {
    const area = { min: [-5, -5, 0], max: [5, 5, 3], enabled: true };
    const echoed = (await socket.call("set_safe_area", area)) as { enabled: boolean };
    expect(echoed.enabled).toBe(true);

    await putProgram(
      "breakout",
      buildProgram("breakout", (ws) => {
        const take = ws.insert("TakeoffAll", { parentId: null, slot: "body", index: 0 });
        ws.setParam(take.id, "z", { t: "float", v: 1.0 });
        const nav = ws.insert("Navigate", { parentId: null, slot: "body", index: 1 });
        ws.setParam(nav.id, "drone", { t: "int", v: 0 });
        ws.setParam(nav.id, "x", { t: "float", v: 8.0 });
        ws.setParam(nav.id, "y", { t: "float", v: 0.0 });
        ws.setParam(nav.id, "z", { t: "float", v: 1.0 });
        ws.setParam(nav.id, "speed", { t: "float", v: 1.0 });
        const wait = ws.insert("Wait", { parentId: null, slot: "body", index: 2 });
        ws.setParam(wait.id, "seconds", { t: "float", v: 30.0 });
      }),
    );

    await socket.call("run", { name: "breakout" });
    await until("violation event", () => violations.length > 0, 45000);

    const hit = violations[0];
    expect(hit.drone).toBe(0);
    expect(hit.x).toBeGreaterThan(4.5);
    expect(store.alerts.some((a) => a.drone === 0)).toBe(true);

    await until("offender grounded", () => store.drone(0)?.mode === "landed", 30000);
    expect(store.drone(0)!.z).toBeLessThan(0.3);
    // The rest of the fleet stayed inside and airborne.
    expect(store.drone(1)?.mode).toBe("hovering");

    await stopIgnoringIdle();
    await until("run stopped", () => !store.running);
  }, 90000);

  it("flies the selected drone forward at about 1 m/s", async () => {
    const disabled = (await socket.call("set_safe_area", {
      min: [-5, -5, 0],
      max: [5, 5, 3],
      enabled: false,
    })) as { enabled: boolean };
    expect(disabled.enabled).toBe(false);

    await socket.call("run", { name: "hover" });
    await until("fleet airborne", () =>
      allDrones((d) => d.mode === "hovering" && d.z > 0.7),
    );

    fpv.selectDrone(0);
    fpvSamples = [];
    expect(fpv.keyDown("KeyW")).toBe(true);
    // Hold until the sim has a second and a half of forward flight on record.
    await until(
      "enough flight samples",
      () => fpvSamples !== null && fpvSamples.length >= 16,
      30000,
    );
    fpv.keyUp("KeyW");

    const samples = fpvSamples!;
    fpvSamples = null;
    // Skip the spin-up frames; measure steady-state ground speed in sim time.
    const steady = samples.slice(4);
    const first = steady[0];
    const last = steady[steady.length - 1];
    const dt = last.t - first.t;
    const dist = Math.hypot(last.x - first.x, last.y - first.y);
    expect(dt).toBeGreaterThan(0.5);
    const speed = dist / dt;
    expect(speed).toBeGreaterThan(0.8);
    expect(speed).toBeLessThan(1.15);

    await stopIgnoringIdle();
    await socket.call("land_all");
    await until("fleet landed", () => allDrones((d) => d.mode === "landed"));
  }, 90000);
});
