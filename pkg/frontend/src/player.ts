/**
 * Preview trace playback: strict JSONL parsing, a clamped cursor, and a
 * pure scene builder for the top-down canvas.
 *
 * Rendering is a function of (trace, index) only. World bounds come from
 * the whole trace so the viewport stays put while scrubbing.
 */

export class TraceFormatError extends Error {}

export interface TraceRow {
  id: number;
  x: number;
  y: number;
  z: number;
  yaw: number;
  mode: string;
  r: number;
  g: number;
  b: number;
  battery: number;
}

export interface TraceEntry {
  t: number;
  block: string | null;
  drones: TraceRow[];
}

const ROW_FIELDS = ["id", "x", "y", "z", "yaw", "mode", "r", "g", "b", "battery"];
const NUM_FIELDS = ["x", "y", "z", "yaw", "battery"];
const INT_FIELDS = ["id", "r", "g", "b"];

function sameFields(value: Record<string, unknown>, fields: string[]): boolean {
  const keys = Object.keys(value);
  return keys.length === fields.length && fields.every((f) => f in value);
}

function parseRow(raw: unknown, lineno: number): TraceRow {
  if (typeof raw !== "object" || raw === null || Array.isArray(raw)) {
    throw new TraceFormatError(`line ${lineno}: drone row must be an object`);
  }
  const row = raw as Record<string, unknown>;
  if (!sameFields(row, ROW_FIELDS)) {
    throw new TraceFormatError(
      `line ${lineno}: drone rows carry exactly ${[...ROW_FIELDS].sort().join(", ")}`,
    );
  }
  for (const f of NUM_FIELDS) {
    if (typeof row[f] !== "number" || !Number.isFinite(row[f])) {
      throw new TraceFormatError(`line ${lineno}: ${f} must be a number`);
    }
  }
  for (const f of INT_FIELDS) {
    if (typeof row[f] !== "number" || !Number.isInteger(row[f])) {
      throw new TraceFormatError(`line ${lineno}: ${f} must be an integer`);
    }
  }
  if (typeof row.mode !== "string") {
    throw new TraceFormatError(`line ${lineno}: mode must be a string`);
  }
  return row as unknown as TraceRow;
}

/** Parse .trace.jsonl text; throws TraceFormatError with a line number. */
export function parseTrace(text: string): TraceEntry[] {
  const entries: TraceEntry[] = [];
  const lines = text.split("\n");
  for (let i = 0; i < lines.length; i++) {
    const line = lines[i].trim();
    if (line === "") continue;
    const lineno = i + 1;
    let raw: unknown;
    try {
      raw = JSON.parse(line);
    } catch (err) {
      throw new TraceFormatError(`line ${lineno}: not valid JSON: ${(err as Error).message}`);
    }
    if (typeof raw !== "object" || raw === null || Array.isArray(raw)) {
      throw new TraceFormatError(`line ${lineno}: expected an object`);
    }
    const entry = raw as Record<string, unknown>;
    if (!sameFields(entry, ["t", "block", "drones"])) {
      throw new TraceFormatError(`line ${lineno}: expected t/block/drones fields`);
    }
    if (typeof entry.t !== "number" || !Number.isFinite(entry.t)) {
      throw new TraceFormatError(`line ${lineno}: t must be a number`);
    }
    if (entry.block !== null && typeof entry.block !== "string") {
      throw new TraceFormatError(`line ${lineno}: block must be a string or null`);
    }
    if (!Array.isArray(entry.drones)) {
      throw new TraceFormatError(`line ${lineno}: drones must be a list`);
    }
    entries.push({
      t: entry.t,
      block: entry.block as string | null,
      drones: entry.drones.map((row) => parseRow(row, lineno)),
    });
  }
  return entries;
}

/** Scrub position over a trace; the index stays inside [0, length). */
export class PlaybackCursor {
  readonly trace: TraceEntry[];
  private pos = 0;

  constructor(trace: TraceEntry[]) {
    this.trace = trace;
  }

  get length(): number {
    return this.trace.length;
  }

  get index(): number {
    return this.pos;
  }

  get atEnd(): boolean {
    return this.trace.length === 0 || this.pos === this.trace.length - 1;
  }

  entry(): TraceEntry | null {
    return this.trace.length === 0 ? null : this.trace[this.pos];
  }

  seek(index: number): number {
    if (this.trace.length === 0) return 0;
    this.pos = Math.max(0, Math.min(Math.floor(index), this.trace.length - 1));
    return this.pos;
  }

  step(delta: number): number {
    return this.seek(this.pos + delta);
  }
}

export interface Bounds {
  minX: number;
  maxX: number;
  minY: number;
  maxY: number;
  maxZ: number;
}

export interface SceneDrone {
  id: number;
  x: number;
  y: number;
  z: number;
  yaw: number;
  mode: string;
  color: string;
}

export interface PlaybackScene {
  t: number;
  block: string | null;
  bounds: Bounds;
  drones: SceneDrone[];
}

/** Extent of the whole trace with a margin, so scrubbing never rescales. */
export function traceBounds(trace: TraceEntry[]): Bounds {
  let minX = Infinity;
  let maxX = -Infinity;
  let minY = Infinity;
  let maxY = -Infinity;
  let maxZ = 0;
  for (const entry of trace) {
    for (const row of entry.drones) {
      minX = Math.min(minX, row.x);
      maxX = Math.max(maxX, row.x);
      minY = Math.min(minY, row.y);
      maxY = Math.max(maxY, row.y);
      maxZ = Math.max(maxZ, row.z);
    }
  }
  if (minX > maxX) {
    minX = -1;
    maxX = 1;
    minY = -1;
    maxY = 1;
  }
  const margin = Math.max(1, (maxX - minX) * 0.1, (maxY - minY) * 0.1);
  return {
    minX: minX - margin,
    maxX: maxX + margin,
    minY: minY - margin,
    maxY: maxY + margin,
    maxZ: Math.max(maxZ, 1),
  };
}

export function scene(trace: TraceEntry[], index: number): PlaybackScene | null {
  if (trace.length === 0) return null;
  const entry = trace[Math.max(0, Math.min(index, trace.length - 1))];
  return {
    t: entry.t,
    block: entry.block,
    bounds: traceBounds(trace),
    drones: entry.drones.map((row) => ({
      id: row.id,
      x: row.x,
      y: row.y,
      z: row.z,
      yaw: row.yaw,
      mode: row.mode,
      color: `rgb(${row.r},${row.g},${row.b})`,
    })),
  };
}
