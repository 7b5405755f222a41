/**
 * Wire protocol frames for the station websocket.
 *
 * Clients send subscribe/unsubscribe/publish/call; the server sends
 * response/event. Both directions reject frames with unknown fields, so a
 * typo fails loudly here instead of silently doing nothing.
 */

export class WireError extends Error {}

export interface EventFrame {
  op: "event";
  topic: string;
  payload: unknown;
}

export interface ResponseFrame {
  op: "response";
  ok: boolean;
  id?: string;
  payload: unknown;
}

export type ServerFrame = EventFrame | ResponseFrame;

const SERVER_FIELDS = new Set(["op", "topic", "id", "ok", "payload"]);

/** Parse and structurally validate one server frame. */
export function decodeServerFrame(text: string): ServerFrame {
  let raw: unknown;
  try {
    raw = JSON.parse(text);
  } catch (e) {
    throw new WireError(`frame is not valid JSON: ${e instanceof Error ? e.message : e}`);
  }
  if (raw === null || typeof raw !== "object" || Array.isArray(raw)) {
    throw new WireError("frame must be a JSON object");
  }
  const frame = raw as Record<string, unknown>;
  const unknown = Object.keys(frame).filter((k) => !SERVER_FIELDS.has(k));
  if (unknown.length > 0) {
    throw new WireError(`unknown frame field(s) ${unknown.sort().join(", ")}`);
  }
  const op = frame.op;
  if (op === "event") {
    if (typeof frame.topic !== "string" || !frame.topic) {
      throw new WireError("event frame requires a topic string");
    }
    if (!("payload" in frame)) throw new WireError("event frame requires a payload");
    return { op: "event", topic: frame.topic, payload: frame.payload };
  }
  if (op === "response") {
    if (typeof frame.ok !== "boolean") throw new WireError("response frame requires ok");
    if ("id" in frame && typeof frame.id !== "string") {
      throw new WireError("response id must be a string");
    }
    return {
      op: "response",
      ok: frame.ok,
      id: typeof frame.id === "string" ? frame.id : undefined,
      payload: frame.payload,
    };
  }
  throw new WireError(`unknown server op ${JSON.stringify(op)}`);
}

export function encodeSubscribe(topic: string, id?: string): string {
  return JSON.stringify(id === undefined ? { op: "subscribe", topic } : { op: "subscribe", topic, id });
}

export function encodeUnsubscribe(topic: string, id?: string): string {
  return JSON.stringify(
    id === undefined ? { op: "unsubscribe", topic } : { op: "unsubscribe", topic, id },
  );
}

export function encodePublish(topic: string, payload: unknown, id?: string): string {
  return JSON.stringify(
    id === undefined ? { op: "publish", topic, payload } : { op: "publish", topic, payload, id },
  );
}

export function encodeCall(service: string, payload: unknown, id: string): string {
  if (!id) throw new WireError("call requires a correlation id");
  return JSON.stringify({ op: "call", service, payload, id });
}

/** The error payload shape used by failed responses and HTTP errors. */
export interface ErrorPayload {
  error: string;
  message: string;
}

export function asErrorPayload(payload: unknown): ErrorPayload {
  if (payload !== null && typeof payload === "object") {
    const p = payload as Record<string, unknown>;
    if (typeof p.error === "string" && typeof p.message === "string") {
      return { error: p.error, message: p.message };
    }
  }
  return { error: "Unknown", message: JSON.stringify(payload) };
}

/** A velocity command for one drone, the only topic clients may publish. */
export interface ManualCmd {
  drone: number;
  vx: number;
  vy: number;
  vz: number;
  yaw_rate: number;
}

/** Per-drone telemetry row as published on the telemetry topic. */
export interface TelemetryRow {
  id: number;
  x: number;
  y: number;
  z: number;
  yaw: number;
  mode: string;
  battery: number;
  r: number;
  g: number;
  b: number;
  cpu: number;
  vx: number;
  vy: number;
  vz: number;
}

export interface TelemetryFrame {
  t: number;
  drones: TelemetryRow[];
}

export interface ViolationEvent {
  drone: number;
  t: number;
  x: number;
  y: number;
  z: number;
}

export interface SafeAreaDict {
  min: [number, number, number];
  max: [number, number, number];
  enabled: boolean;
}

export interface TopicInfo {
  name: string;
  message_kind: string;
  publisher_count: number;
  publish_count: number;
  last_publish_sim_time: number | null;
}
