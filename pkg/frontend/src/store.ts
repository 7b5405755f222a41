/**
 * Dashboard state reduced from station events.
 *
 * The store is plain data plus an apply* method per topic; panels
 * subscribe and re-render on change. Keeping the reduction separate from
 * the DOM lets the operator-loop tests assert on state without a browser.
 */

import { TelemetryFrame, TelemetryRow, TopicInfo, ViolationEvent } from "./wire.js";

export interface Alert {
  /** Monotonic id so the panel can key rows. */
  seq: number;
  drone: number;
  t: number;
  x: number;
  y: number;
  z: number;
}

export interface PromptState {
  block: string | null;
  var: string;
  message: string;
}

const STALE_AFTER_MS = 2000;
const MAX_ALERTS = 20;

export class DashboardStore {
  telemetry: TelemetryFrame | null = null;
  running = false;
  activeBlock: string | null = null;
  lastError: string | null = null;
  prompt: PromptState | null = null;
  alerts: Alert[] = [];
  topics: TopicInfo[] = [];
  connected = false;
  /** Wall-clock ms of the last telemetry frame, for staleness. */
  lastTelemetryAt = 0;

  private listeners = new Set<() => void>();
  private alertSeq = 0;
  private now: () => number;

  constructor(now: () => number = () => Date.now()) {
    this.now = now;
  }

  subscribe(listener: () => void): () => void {
    this.listeners.add(listener);
    return () => {
      this.listeners.delete(listener);
    };
  }

  /** True when connected but telemetry stopped arriving. */
  get stale(): boolean {
    if (!this.connected) return true;
    if (this.lastTelemetryAt === 0) return false;
    return this.now() - this.lastTelemetryAt > STALE_AFTER_MS;
  }

  drone(id: number): TelemetryRow | null {
    if (this.telemetry === null) return null;
    return this.telemetry.drones.find((d) => d.id === id) ?? null;
  }

  applyTelemetry(frame: TelemetryFrame): void {
    this.telemetry = frame;
    this.lastTelemetryAt = this.now();
    this.emit();
  }

  applyRunning(running: boolean): void {
    this.running = running;
    if (!running) this.activeBlock = null;
    this.emit();
  }

  /** The block topic publishes the bare block id. */
  applyBlock(blockId: string): void {
    this.activeBlock = blockId;
    this.emit();
  }

  applyError(payload: { message: string; block: string | null }): void {
    this.lastError = payload.block === null
      ? payload.message
      : `${payload.message} (block ${payload.block})`;
    this.emit();
  }

  applyPrompt(payload: PromptState): void {
    this.prompt = { block: payload.block, var: payload.var, message: payload.message };
    this.emit();
  }

  clearPrompt(): void {
    this.prompt = null;
    this.emit();
  }

  applyViolation(event: ViolationEvent): void {
    this.alertSeq++;
    this.alerts.push({ seq: this.alertSeq, ...event });
    if (this.alerts.length > MAX_ALERTS) this.alerts.shift();
    this.emit();
  }

  dismissAlert(seq: number): void {
    this.alerts = this.alerts.filter((a) => a.seq !== seq);
    this.emit();
  }

  applyTopics(topics: TopicInfo[]): void {
    this.topics = topics;
    this.emit();
  }

  setConnected(connected: boolean): void {
    this.connected = connected;
    if (!connected) this.lastTelemetryAt = 0;
    this.emit();
  }

  private emit(): void {
    for (const listener of this.listeners) listener();
  }
}
