/**
 * First-person flight: keyboard to manual_cmd conversion and the
 * synthetic viewport geometry.
 *
 * The station expects world-frame velocities, so held keys build a
 * body-frame direction that gets rotated by the drone's current yaw
 * before publishing. Commands repeat at 10 Hz while any key is down; the
 * sim drops manual input after 0.6 s without a refresh, so a single
 * missed tick is harmless but release always sends one explicit zero.
 */

import { ManualCmd } from "./wire.js";

/** body axis deltas per key; x forward, y left, z up, w yaw ccw */
const KEY_AXES: Record<string, [number, number, number, number]> = {
  KeyW: [1, 0, 0, 0],
  KeyS: [-1, 0, 0, 0],
  KeyA: [0, 1, 0, 0],
  KeyD: [0, -1, 0, 0],
  KeyR: [0, 0, 1, 0],
  KeyF: [0, 0, -1, 0],
  KeyQ: [0, 0, 0, 1],
  KeyE: [0, 0, 0, -1],
};

export const FPV_KEYS = Object.keys(KEY_AXES);

export const DEFAULT_YAW_RATE = 1.5;
export const COMMAND_INTERVAL_MS = 100;

/**
 * World-frame velocity command for the held keys.
 *
 * The linear direction is normalised before scaling so diagonals fly at
 * the same speed as a single axis.
 */
export function commandFor(
  held: ReadonlySet<string>,
  drone: number,
  yaw: number,
  speed: number,
  yawRate: number = DEFAULT_YAW_RATE,
): ManualCmd {
  let bx = 0;
  let by = 0;
  let bz = 0;
  let w = 0;
  for (const key of held) {
    const axes = KEY_AXES[key];
    if (axes === undefined) continue;
    bx += axes[0];
    by += axes[1];
    bz += axes[2];
    w += axes[3];
  }
  const norm = Math.hypot(bx, by, bz);
  if (norm > 0) {
    bx = (bx / norm) * speed;
    by = (by / norm) * speed;
    bz = (bz / norm) * speed;
  }
  const cos = Math.cos(yaw);
  const sin = Math.sin(yaw);
  return {
    drone,
    vx: bx * cos - by * sin,
    vy: bx * sin + by * cos,
    vz: bz,
    yaw_rate: Math.sign(w) * yawRate,
  };
}

export interface FpvOptions {
  speed?: number;
  yawRate?: number;
  intervalMs?: number;
  schedule?: (fn: () => void, ms: number) => unknown;
  cancel?: (handle: unknown) => void;
}

export class FpvController {
  private publishCmd: (cmd: ManualCmd) => void;
  private held = new Set<string>();
  private drone: number | null = null;
  private yaw = 0;
  private speed: number;
  private yawRate: number;
  private intervalMs: number;
  private schedule: (fn: () => void, ms: number) => unknown;
  private cancel: (handle: unknown) => void;
  private timer: unknown = null;
  private enabled = true;

  constructor(publish: (cmd: ManualCmd) => void, options: FpvOptions = {}) {
    this.publishCmd = publish;
    this.speed = options.speed ?? 1.0;
    this.yawRate = options.yawRate ?? DEFAULT_YAW_RATE;
    this.intervalMs = options.intervalMs ?? COMMAND_INTERVAL_MS;
    this.schedule = options.schedule ?? ((fn, ms) => setInterval(fn, ms));
    this.cancel = options.cancel ?? ((handle) => clearInterval(handle as number));
  }

  get heldKeys(): ReadonlySet<string> {
    return this.held;
  }

  get active(): boolean {
    return this.timer !== null;
  }

  selectDrone(id: number | null): void {
    if (id === this.drone) return;
    this.releaseAll();
    this.drone = id;
  }

  get selectedDrone(): number | null {
    return this.drone;
  }

  /** Latest yaw from telemetry; used to rotate body axes to world. */
  updateYaw(yaw: number): void {
    this.yaw = yaw;
  }

  setSpeed(speed: number): void {
    this.speed = speed;
  }

  /** Disable while the selected drone is landed; drops any held keys. */
  setEnabled(enabled: boolean): void {
    if (enabled === this.enabled) return;
    this.enabled = enabled;
    if (!enabled) this.releaseAll();
  }

  get isEnabled(): boolean {
    return this.enabled;
  }

  /** Returns true when the key belongs to the controller. */
  keyDown(code: string): boolean {
    if (!(code in KEY_AXES)) return false;
    if (!this.enabled || this.drone === null) return true;
    if (this.held.has(code)) return true;
    this.held.add(code);
    if (this.timer === null) {
      this.send();
      this.timer = this.schedule(() => this.send(), this.intervalMs);
    }
    return true;
  }

  keyUp(code: string): boolean {
    if (!(code in KEY_AXES)) return false;
    if (!this.held.delete(code)) return true;
    if (this.held.size === 0) this.stop();
    return true;
  }

  releaseAll(): void {
    if (this.held.size === 0) return;
    this.held.clear();
    this.stop();
  }

  private stop(): void {
    if (this.timer !== null) {
      this.cancel(this.timer);
      this.timer = null;
    }
    if (this.drone !== null) {
      this.publishCmd({ drone: this.drone, vx: 0, vy: 0, vz: 0, yaw_rate: 0 });
    }
  }

  private send(): void {
    if (this.drone === null) return;
    this.publishCmd(commandFor(this.held, this.drone, this.yaw, this.speed, this.yawRate));
  }
}

/* ------------------------------------------------------------------ */
/* Synthetic viewport                                                  */
/* ------------------------------------------------------------------ */

export interface Pose {
  x: number;
  y: number;
  z: number;
  yaw: number;
}

export interface Segment {
  x1: number;
  y1: number;
  x2: number;
  y2: number;
}

export interface Billboard {
  x: number;
  y: number;
  size: number;
  id: number;
  color: string;
}

/**
 * Drawable scene in normalised screen units: x and y in [-1, 1] with y
 * pointing down, focal length 1 (a 90 degree horizontal field of view).
 */
export interface FpvScene {
  horizonY: number;
  grid: Segment[];
  billboards: Billboard[];
}

const NEAR = 0.15;
const GRID_RADIUS = 18;
const GRID_STEP = 1;

interface CamPoint {
  right: number;
  up: number;
  fwd: number;
}

function toCamera(pose: Pose, px: number, py: number, pz: number): CamPoint {
  const dx = px - pose.x;
  const dy = py - pose.y;
  const dz = pz - pose.z;
  const cos = Math.cos(pose.yaw);
  const sin = Math.sin(pose.yaw);
  return {
    right: dx * sin - dy * cos,
    up: dz,
    fwd: dx * cos + dy * sin,
  };
}

function project(p: CamPoint): [number, number] {
  return [p.right / p.fwd, -p.up / p.fwd];
}

/** Clip a segment to the near plane; null when fully behind. */
function clipSegment(a: CamPoint, b: CamPoint): [CamPoint, CamPoint] | null {
  if (a.fwd <= NEAR && b.fwd <= NEAR) return null;
  if (a.fwd > NEAR && b.fwd > NEAR) return [a, b];
  const behind = a.fwd <= NEAR ? a : b;
  const front = a.fwd <= NEAR ? b : a;
  const t = (NEAR - behind.fwd) / (front.fwd - behind.fwd);
  const cut: CamPoint = {
    right: behind.right + t * (front.right - behind.right),
    up: behind.up + t * (front.up - behind.up),
    fwd: NEAR,
  };
  return a.fwd <= NEAR ? [cut, b] : [a, cut];
}

export interface PeerDrone {
  id: number;
  x: number;
  y: number;
  z: number;
  r: number;
  g: number;
  b: number;
}

/** Pure projection of the world as seen from a level camera at `pose`. */
export function fpvScene(pose: Pose, peers: PeerDrone[]): FpvScene {
  const grid: Segment[] = [];
  const x0 = Math.floor(pose.x - GRID_RADIUS);
  const x1 = Math.ceil(pose.x + GRID_RADIUS);
  const y0 = Math.floor(pose.y - GRID_RADIUS);
  const y1 = Math.ceil(pose.y + GRID_RADIUS);
  const pushLine = (ax: number, ay: number, bx: number, by: number) => {
    const clipped = clipSegment(toCamera(pose, ax, ay, 0), toCamera(pose, bx, by, 0));
    if (clipped === null) return;
    const [sx1, sy1] = project(clipped[0]);
    const [sx2, sy2] = project(clipped[1]);
    grid.push({ x1: sx1, y1: sy1, x2: sx2, y2: sy2 });
  };
  for (let gx = x0; gx <= x1; gx += GRID_STEP) pushLine(gx, y0, gx, y1);
  for (let gy = y0; gy <= y1; gy += GRID_STEP) pushLine(x0, gy, x1, gy);

  const billboards: Billboard[] = [];
  for (const peer of peers) {
    const cam = toCamera(pose, peer.x, peer.y, peer.z);
    if (cam.fwd <= NEAR) continue;
    const [sx, sy] = project(cam);
    billboards.push({
      x: sx,
      y: sy,
      size: Math.min(0.5, 0.35 / cam.fwd),
      id: peer.id,
      color: `rgb(${peer.r},${peer.g},${peer.b})`,
    });
  }
  billboards.sort((a, b) => a.size - b.size);

  // A level camera puts the horizon through the optical centre.
  return { horizonY: 0, grid, billboards };
}
