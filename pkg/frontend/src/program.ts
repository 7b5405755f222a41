/**
 * Program document model: schema, validation, and canonical serialization.
 *
 * The station's canonical form is UTF-8 JSON with lexicographically sorted
 * keys and no insignificant whitespace. It distinguishes integer from float
 * literals (1 vs 1.0), which native JSON.parse/stringify cannot represent,
 * so this module carries its own tagged value tree and a small
 * recursive-descent JSON reader that remembers each number's texture.
 * Serializing what was parsed always reproduces the input bytes.
 */

export type Tagged =
  | { t: "null" }
  | { t: "bool"; v: boolean }
  | { t: "int"; v: number }
  | { t: "float"; v: number }
  | { t: "str"; v: string }
  | { t: "arr"; v: Tagged[] }
  | { t: "obj"; v: Map<string, Tagged> };

export class ProgramSyntaxError extends Error {}
export class SchemaError extends Error {}

// ---------------------------------------------------------------------------
// Tagged JSON reading

class Reader {
  private pos = 0;

  constructor(private readonly text: string) {}

  parse(): Tagged {
    this.skipWs();
    const value = this.readValue();
    this.skipWs();
    if (this.pos !== this.text.length) {
      throw new ProgramSyntaxError(`trailing data at offset ${this.pos}`);
    }
    return value;
  }

  private fail(message: string): never {
    throw new ProgramSyntaxError(`${message} at offset ${this.pos}`);
  }

  private peek(): string {
    return this.text[this.pos] ?? "";
  }

  private skipWs(): void {
    while (" \t\n\r".includes(this.text[this.pos] ?? "x")) this.pos++;
  }

  private expect(ch: string): void {
    if (this.text[this.pos] !== ch) this.fail(`expected ${JSON.stringify(ch)}`);
    this.pos++;
  }

  private readValue(): Tagged {
    const ch = this.peek();
    if (ch === "{") return this.readObject();
    if (ch === "[") return this.readArray();
    if (ch === '"') return { t: "str", v: this.readString() };
    if (ch === "-" || (ch >= "0" && ch <= "9")) return this.readNumber();
    if (this.text.startsWith("true", this.pos)) {
      this.pos += 4;
      return { t: "bool", v: true };
    }
    if (this.text.startsWith("false", this.pos)) {
      this.pos += 5;
      return { t: "bool", v: false };
    }
    if (this.text.startsWith("null", this.pos)) {
      this.pos += 4;
      return { t: "null" };
    }
    this.fail("unexpected character");
  }

  private readObject(): Tagged {
    this.expect("{");
    const out = new Map<string, Tagged>();
    this.skipWs();
    if (this.peek() === "}") {
      this.pos++;
      return { t: "obj", v: out };
    }
    for (;;) {
      this.skipWs();
      const key = this.readString();
      if (out.has(key)) this.fail(`duplicate key ${JSON.stringify(key)}`);
      this.skipWs();
      this.expect(":");
      this.skipWs();
      out.set(key, this.readValue());
      this.skipWs();
      if (this.peek() === ",") {
        this.pos++;
        continue;
      }
      this.expect("}");
      return { t: "obj", v: out };
    }
  }

  private readArray(): Tagged {
    this.expect("[");
    const out: Tagged[] = [];
    this.skipWs();
    if (this.peek() === "]") {
      this.pos++;
      return { t: "arr", v: out };
    }
    for (;;) {
      this.skipWs();
      out.push(this.readValue());
      this.skipWs();
      if (this.peek() === ",") {
        this.pos++;
        continue;
      }
      this.expect("]");
      return { t: "arr", v: out };
    }
  }

  private readString(): string {
    this.expect('"');
    let out = "";
    for (;;) {
      const ch = this.text[this.pos];
      if (ch === undefined) this.fail("unterminated string");
      if (ch === '"') {
        this.pos++;
        return out;
      }
      if (ch === "\\") {
        this.pos++;
        const esc = this.text[this.pos];
        this.pos++;
        if (esc === "u") {
          const hex = this.text.slice(this.pos, this.pos + 4);
          if (!/^[0-9a-fA-F]{4}$/.test(hex)) this.fail("bad \\u escape");
          this.pos += 4;
          out += String.fromCharCode(parseInt(hex, 16));
        } else {
          const simple: Record<string, string> = {
            '"': '"', "\\": "\\", "/": "/", b: "\b", f: "\f", n: "\n", r: "\r", t: "\t",
          };
          const mapped = esc === undefined ? undefined : simple[esc];
          if (mapped === undefined) this.fail("bad escape");
          out += mapped;
        }
      } else {
        if (ch.charCodeAt(0) < 0x20) this.fail("raw control character in string");
        out += ch;
        this.pos++;
      }
    }
  }

  private readNumber(): Tagged {
    const start = this.pos;
    if (this.peek() === "-") this.pos++;
    if (this.peek() === "0") {
      this.pos++;
    } else if (this.peek() >= "1" && this.peek() <= "9") {
      while (this.peek() >= "0" && this.peek() <= "9") this.pos++;
    } else {
      this.fail("bad number");
    }
    let isFloat = false;
    if (this.peek() === ".") {
      isFloat = true;
      this.pos++;
      if (!(this.peek() >= "0" && this.peek() <= "9")) this.fail("bad number");
      while (this.peek() >= "0" && this.peek() <= "9") this.pos++;
    }
    if (this.peek() === "e" || this.peek() === "E") {
      isFloat = true;
      this.pos++;
      if (this.peek() === "+" || this.peek() === "-") this.pos++;
      if (!(this.peek() >= "0" && this.peek() <= "9")) this.fail("bad number");
      while (this.peek() >= "0" && this.peek() <= "9") this.pos++;
    }
    const literal = this.text.slice(start, this.pos);
    const value = Number(literal);
    if (!Number.isFinite(value)) this.fail("number out of range");
    return isFloat ? { t: "float", v: value } : { t: "int", v: value };
  }
}

/** Parse JSON text into a tagged tree that remembers number texture. */
export function parseTagged(text: string): Tagged {
  return new Reader(text).parse();
}

// ---------------------------------------------------------------------------
// Canonical writing

/**
 * Format a float exactly as the station does: shortest round-trip digits,
 * decimal notation with a forced ".0" for integral values, switching to
 * exponent form (two-digit signed exponent) below 1e-4 or at 1e16 and up.
 */
export function formatFloat(value: number): string {
  if (!Number.isFinite(value)) throw new SchemaError(`non-finite float ${value}`);
  if (value === 0) return Object.is(value, -0) ? "-0.0" : "0.0";
  const neg = value < 0;
  const [mant, expPart] = Math.abs(value).toExponential().split("e");
  const exp = parseInt(expPart, 10);
  const digits = mant.replace(".", "");
  let out: string;
  if (exp < -4 || exp >= 16) {
    const m = digits.length === 1 ? digits : `${digits[0]}.${digits.slice(1)}`;
    const sign = exp < 0 ? "-" : "+";
    out = `${m}e${sign}${String(Math.abs(exp)).padStart(2, "0")}`;
  } else if (exp >= digits.length - 1) {
    out = `${digits}${"0".repeat(exp - digits.length + 1)}.0`;
  } else if (exp >= 0) {
    out = `${digits.slice(0, exp + 1)}.${digits.slice(exp + 1)}`;
  } else {
    out = `0.${"0".repeat(-exp - 1)}${digits}`;
  }
  return neg ? `-${out}` : out;
}

function quoteString(s: string): string {
  let out = '"';
  for (let i = 0; i < s.length; i++) {
    const ch = s[i];
    const code = s.charCodeAt(i);
    if (ch === '"') out += '\\"';
    else if (ch === "\\") out += "\\\\";
    else if (code >= 0x20) out += ch;
    else if (ch === "\b") out += "\\b";
    else if (ch === "\t") out += "\\t";
    else if (ch === "\n") out += "\\n";
    else if (ch === "\f") out += "\\f";
    else if (ch === "\r") out += "\\r";
    else out += `\\u${code.toString(16).padStart(4, "0")}`;
  }
  return `${out}"`;
}

function writeTagged(value: Tagged, out: string[]): void {
  switch (value.t) {
    case "null":
      out.push("null");
      break;
    case "bool":
      out.push(value.v ? "true" : "false");
      break;
    case "int":
      if (!Number.isSafeInteger(value.v)) {
        throw new SchemaError(`integer out of safe range: ${value.v}`);
      }
      out.push(String(value.v));
      break;
    case "float":
      out.push(formatFloat(value.v));
      break;
    case "str":
      out.push(quoteString(value.v));
      break;
    case "arr": {
      out.push("[");
      value.v.forEach((item, i) => {
        if (i > 0) out.push(",");
        writeTagged(item, out);
      });
      out.push("]");
      break;
    }
    case "obj": {
      out.push("{");
      const keys = [...value.v.keys()].sort();
      keys.forEach((key, i) => {
        if (i > 0) out.push(",");
        out.push(quoteString(key), ":");
        writeTagged(value.v.get(key)!, out);
      });
      out.push("}");
      break;
    }
  }
}

/** Render a tagged tree to canonical UTF-8 bytes. */
export function serializeTagged(value: Tagged): Uint8Array {
  const out: string[] = [];
  writeTagged(value, out);
  return new TextEncoder().encode(out.join(""));
}

// ---------------------------------------------------------------------------
// Program schema

export type Operand =
  | { t: "int"; v: number }
  | { t: "float"; v: number }
  | { t: "var"; v: string };

export interface Condition {
  lhs: Operand;
  op: string;
  rhs: Operand;
}

export type ParamValue =
  | { t: "int"; v: number }
  | { t: "float"; v: number }
  | { t: "str"; v: string }
  | { t: "bool"; v: boolean }
  | { t: "var"; v: string }
  | { t: "cond"; v: Condition };

export interface BlockNode {
  id: string;
  kind: string;
  params: Record<string, ParamValue>;
  children: Record<string, BlockNode[]>;
}

export interface ProgramDoc {
  version: number;
  name: string;
  blocks: BlockNode[];
}

export const COMPARISON_OPS = ["<", "<=", ">", ">=", "==", "!="] as const;
const VAR_RE = /^[A-Za-z_][A-Za-z0-9_]*$/;

export const FORMATION_KINDS = [
  "line", "circle", "square", "triangle", "cube", "pyramid", "sphere",
] as const;
export const EFFECT_KINDS = [
  "fill", "fade", "flash", "blink", "blink_fast", "wipe", "rainbow", "rainbow_fill",
] as const;
export const LED_GROUPS = ["all", "random", "even", "odd", "formation_2d"] as const;

type ParamTag = "num" | "int" | "str" | "bool" | "cond";

export interface KindSig {
  required: Record<string, ParamTag>;
  optional: Record<string, ParamTag>;
  slots: string[];
}

/** One signature per block kind; mirrors the program schema exactly. */
export const BLOCK_SCHEMA: Record<string, KindSig> = {
  TakeoffAll: { required: { z: "num" }, optional: {}, slots: [] },
  LandAll: { required: {}, optional: {}, slots: [] },
  Navigate: {
    required: { drone: "int", x: "num", y: "num", z: "num", speed: "num" },
    optional: {},
    slots: [],
  },
  ApplyFormation: {
    required: { kind: "str", n: "int", size: "num", altitude: "num" },
    optional: { height: "num" },
    slots: [],
  },
  Translate: { required: { dx: "num", dy: "num", dz: "num" }, optional: {}, slots: [] },
  Rotate: { required: { angle: "num" }, optional: {}, slots: [] },
  Scale: { required: { factor: "num" }, optional: {}, slots: [] },
  LedEffect: {
    required: { effect: "str", group: "str", r: "int", g: "int", b: "int", rate: "num" },
    optional: {},
    slots: [],
  },
  Wait: { required: { seconds: "num" }, optional: {}, slots: [] },
  Repeat: { required: { count: "int" }, optional: {}, slots: ["body"] },
  While: { required: { cond: "cond" }, optional: {}, slots: ["body"] },
  If: { required: { cond: "cond" }, optional: {}, slots: ["body", "else"] },
  Define: { required: { name: "str" }, optional: {}, slots: ["body"] },
  Call: { required: { name: "str" }, optional: {}, slots: [] },
  Prompt: { required: { var: "str", message: "str" }, optional: {}, slots: [] },
  SetVar: { required: { var: "str", value: "num" }, optional: { add: "bool" }, slots: [] },
};

export const BLOCK_KINDS = Object.keys(BLOCK_SCHEMA);

// ---------------------------------------------------------------------------
// Validation

/** One schema violation, anchored to a block when one is implicated. */
export interface Violation {
  path: string;
  blockId?: string;
  message: string;
}

function checkParam(
  where: string,
  blockId: string,
  name: string,
  tag: ParamTag,
  value: ParamValue,
  errors: Violation[],
): void {
  const at = (message: string) =>
    errors.push({ path: where, blockId, message: `param ${name}: ${message}` });
  switch (tag) {
    case "num":
      if (value.t === "var") {
        if (!VAR_RE.test(value.v)) at(`not a valid variable name: ${JSON.stringify(value.v)}`);
      } else if (value.t !== "int" && value.t !== "float") {
        at("expected a number or variable name");
      } else if (!Number.isFinite(value.v)) {
        at("must be finite");
      }
      break;
    case "int":
      if (value.t !== "int") at("expected an integer");
      break;
    case "str":
      if (value.t !== "str" && value.t !== "var") at("expected a string");
      break;
    case "bool":
      if (value.t !== "bool") at("expected a boolean");
      break;
    case "cond":
      if (value.t !== "cond") {
        at("expected a condition");
        break;
      }
      if (!COMPARISON_OPS.includes(value.v.op as (typeof COMPARISON_OPS)[number])) {
        at(`unknown comparison operator ${JSON.stringify(value.v.op)}`);
      }
      for (const [side, operand] of [["lhs", value.v.lhs], ["rhs", value.v.rhs]] as const) {
        if (operand.t === "var") {
          if (!VAR_RE.test(operand.v)) at(`${side} is not a valid variable name`);
        } else if (!Number.isFinite(operand.v)) {
          at(`${side} must be finite`);
        }
      }
      break;
  }
}

function paramNum(value: ParamValue | undefined): number | undefined {
  return value !== undefined && (value.t === "int" || value.t === "float") ? value.v : undefined;
}

function paramStr(value: ParamValue | undefined): string | undefined {
  return value !== undefined && (value.t === "str" || value.t === "var") ? value.v : undefined;
}

function validateBlock(path: string, block: BlockNode, errors: Violation[]): void {
  if (!block.id) {
    errors.push({ path, message: "block id must be a non-empty string" });
  }
  const sig = BLOCK_SCHEMA[block.kind];
  if (sig === undefined) {
    errors.push({ path, blockId: block.id, message: `unknown block kind ${JSON.stringify(block.kind)}` });
    return;
  }
  for (const name of Object.keys(sig.required)) {
    if (!(name in block.params)) {
      errors.push({ path, blockId: block.id, message: `missing required param ${name}` });
    }
  }
  for (const [name, value] of Object.entries(block.params)) {
    const tag = sig.required[name] ?? sig.optional[name];
    if (tag === undefined) {
      errors.push({ path, blockId: block.id, message: `unknown param ${name} for kind ${block.kind}` });
      continue;
    }
    checkParam(path, block.id, name, tag, value, errors);
  }
  for (const slot of Object.keys(block.children)) {
    if (!sig.slots.includes(slot)) {
      errors.push({
        path,
        blockId: block.id,
        message: sig.slots.length > 0
          ? `unknown child slot ${JSON.stringify(slot)}`
          : `kind ${block.kind} takes no children`,
      });
    }
  }

  // Value constraints beyond plain typing, matching the station's rules.
  const fail = (message: string) => errors.push({ path, blockId: block.id, message });
  if (block.kind === "Repeat") {
    const count = paramNum(block.params.count);
    if (count !== undefined && count < 0) fail(`Repeat count must be >= 0, got ${count}`);
  }
  if (block.kind === "Navigate") {
    const drone = paramNum(block.params.drone);
    if (drone !== undefined && drone < -1) fail("drone must be a drone id or -1 for all");
  }
  if (block.kind === "ApplyFormation") {
    const kind = paramStr(block.params.kind);
    if (kind !== undefined && !FORMATION_KINDS.includes(kind as (typeof FORMATION_KINDS)[number])) {
      fail(`unknown formation kind ${JSON.stringify(kind)}`);
    }
    const n = paramNum(block.params.n);
    if (n !== undefined && n < 1) fail(`formation n must be >= 1, got ${n}`);
  }
  if (block.kind === "LedEffect") {
    const effect = paramStr(block.params.effect);
    if (effect !== undefined && !EFFECT_KINDS.includes(effect as (typeof EFFECT_KINDS)[number])) {
      fail(`unknown effect ${JSON.stringify(effect)}`);
    }
    const group = paramStr(block.params.group);
    if (group !== undefined && !LED_GROUPS.includes(group as (typeof LED_GROUPS)[number])) {
      fail(`unknown group ${JSON.stringify(group)}`);
    }
    for (const ch of ["r", "g", "b"]) {
      const v = paramNum(block.params[ch]);
      if (v !== undefined && (v < 0 || v > 255)) fail(`channel ${ch} out of range 0..255`);
    }
  }
  if (block.kind === "Prompt" || block.kind === "SetVar") {
    const name = paramStr(block.params.var);
    if (name !== undefined && !VAR_RE.test(name)) fail(`invalid variable name ${JSON.stringify(name)}`);
  }
  if (block.kind === "Define" || block.kind === "Call") {
    const name = paramStr(block.params.name);
    if (name !== undefined && !VAR_RE.test(name)) fail(`invalid function name ${JSON.stringify(name)}`);
  }
}

function* walk(blocks: BlockNode[], prefix: string): Generator<[string, BlockNode]> {
  for (let i = 0; i < blocks.length; i++) {
    const block = blocks[i];
    const path = `${prefix}[${i}]`;
    yield [path, block];
    for (const slot of Object.keys(block.children).sort()) {
      yield* walk(block.children[slot], `${path}.children.${slot}`);
    }
  }
}

/**
 * Validate a whole document; returns every violation found rather than just
 * the first so the editor can annotate all offending blocks at once.
 */
export function validateProgram(doc: ProgramDoc): Violation[] {
  const errors: Violation[] = [];
  if (doc.version !== 1 || !Number.isInteger(doc.version)) {
    errors.push({ path: "top level", message: `unsupported program version ${doc.version}` });
  }
  const seenIds = new Map<string, string>();
  const defines = new Map<string, string>();
  const calls: Array<[string, BlockNode]> = [];
  for (const [path, block] of walk(doc.blocks, "blocks")) {
    validateBlock(path, block, errors);
    if (block.id) {
      const first = seenIds.get(block.id);
      if (first !== undefined) {
        errors.push({
          path,
          blockId: block.id,
          message: `duplicate block id ${JSON.stringify(block.id)} (first at ${first})`,
        });
      } else {
        seenIds.set(block.id, path);
      }
    }
    if (block.kind === "Define") {
      const name = paramStr(block.params.name);
      if (name !== undefined) {
        if (defines.has(name)) {
          errors.push({ path, blockId: block.id, message: `duplicate Define ${JSON.stringify(name)}` });
        } else {
          defines.set(name, path);
        }
      }
    } else if (block.kind === "Call") {
      calls.push([path, block]);
    }
  }
  for (const [path, block] of calls) {
    const name = paramStr(block.params.name);
    if (name !== undefined && !defines.has(name)) {
      errors.push({
        path,
        blockId: block.id,
        message: `Call targets undefined function ${JSON.stringify(name)}`,
      });
    }
  }
  return errors;
}

// ---------------------------------------------------------------------------
// Document <-> tagged tree

function operandToTagged(operand: Operand): Tagged {
  if (operand.t === "var") return { t: "str", v: operand.v };
  return operand;
}

function paramToTagged(name: string, tag: ParamTag | undefined, value: ParamValue): Tagged {
  switch (value.t) {
    case "var":
      return { t: "str", v: value.v };
    case "cond": {
      const cond = new Map<string, Tagged>([
        ["lhs", operandToTagged(value.v.lhs)],
        ["op", { t: "str", v: value.v.op }],
        ["rhs", operandToTagged(value.v.rhs)],
      ]);
      return { t: "obj", v: cond };
    }
    default:
      void name;
      void tag;
      return value;
  }
}

function blockToTagged(block: BlockNode): Tagged {
  const sig = BLOCK_SCHEMA[block.kind];
  const params = new Map<string, Tagged>();
  for (const [name, value] of Object.entries(block.params)) {
    const tag = sig ? sig.required[name] ?? sig.optional[name] : undefined;
    params.set(name, paramToTagged(name, tag, value));
  }
  const children = new Map<string, Tagged>();
  for (const [slot, kids] of Object.entries(block.children)) {
    children.set(slot, { t: "arr", v: kids.map(blockToTagged) });
  }
  return {
    t: "obj",
    v: new Map<string, Tagged>([
      ["id", { t: "str", v: block.id }],
      ["kind", { t: "str", v: block.kind }],
      ["params", { t: "obj", v: params }],
      ["children", { t: "obj", v: children }],
    ]),
  };
}

export function programToTagged(doc: ProgramDoc): Tagged {
  return {
    t: "obj",
    v: new Map<string, Tagged>([
      ["version", { t: "int", v: doc.version }],
      ["name", { t: "str", v: doc.name }],
      ["blocks", { t: "arr", v: doc.blocks.map(blockToTagged) }],
    ]),
  };
}

/** Validate and render a document to its canonical byte form. */
export function serializeProgram(doc: ProgramDoc): Uint8Array {
  const errors = validateProgram(doc);
  if (errors.length > 0) {
    throw new SchemaError(`${errors[0].path}: ${errors[0].message}`);
  }
  return serializeTagged(programToTagged(doc));
}

function taggedToOperand(where: string, value: Tagged): Operand {
  if (value.t === "int" || value.t === "float") return value;
  if (value.t === "str") return { t: "var", v: value.v };
  throw new SchemaError(`${where}: operand must be a number or variable name`);
}

function taggedToParam(where: string, kind: string, name: string, value: Tagged): ParamValue {
  const sig = BLOCK_SCHEMA[kind];
  const tag = sig ? sig.required[name] ?? sig.optional[name] : undefined;
  if (tag === "cond") {
    if (value.t !== "obj") throw new SchemaError(`${where}: condition must be an object`);
    const keys = [...value.v.keys()].sort();
    const unknown = keys.filter((k) => !["lhs", "op", "rhs"].includes(k));
    if (unknown.length > 0) {
      throw new SchemaError(`${where}: unknown condition field(s) ${unknown.join(", ")}`);
    }
    for (const key of ["lhs", "op", "rhs"]) {
      if (!value.v.has(key)) throw new SchemaError(`${where}: condition missing field ${key}`);
    }
    const op = value.v.get("op")!;
    if (op.t !== "str") throw new SchemaError(`${where}: condition op must be a string`);
    return {
      t: "cond",
      v: {
        lhs: taggedToOperand(`${where}.lhs`, value.v.get("lhs")!),
        op: op.v,
        rhs: taggedToOperand(`${where}.rhs`, value.v.get("rhs")!),
      },
    };
  }
  switch (value.t) {
    case "int":
    case "float":
    case "bool":
      return value;
    case "str":
      // A string in a numeric slot is a variable reference.
      return tag === "num" ? { t: "var", v: value.v } : { t: "str", v: value.v };
    default:
      throw new SchemaError(`${where}: unsupported param value`);
  }
}

function taggedToBlock(where: string, value: Tagged): BlockNode {
  if (value.t !== "obj") throw new SchemaError(`${where}: block must be an object`);
  const unknown = [...value.v.keys()].filter(
    (k) => !["id", "kind", "params", "children"].includes(k),
  );
  if (unknown.length > 0) {
    throw new SchemaError(`${where}: unknown field(s) ${unknown.sort().join(", ")}`);
  }
  const id = value.v.get("id");
  const kind = value.v.get("kind");
  if (id === undefined || id.t !== "str") throw new SchemaError(`${where}: block id must be a string`);
  if (kind === undefined || kind.t !== "str") throw new SchemaError(`${where}: block kind must be a string`);

  const params: Record<string, ParamValue> = {};
  const rawParams: Tagged = value.v.get("params") ?? { t: "obj", v: new Map() };
  if (rawParams.t !== "obj") throw new SchemaError(`${where}: params must be an object`);
  for (const [name, raw] of rawParams.v) {
    params[name] = taggedToParam(`${where}.params.${name}`, kind.v, name, raw);
  }

  const children: Record<string, BlockNode[]> = {};
  const rawChildren: Tagged = value.v.get("children") ?? { t: "obj", v: new Map() };
  if (rawChildren.t !== "obj") throw new SchemaError(`${where}: children must be an object`);
  for (const [slot, rawKids] of rawChildren.v) {
    if (rawKids.t !== "arr") {
      throw new SchemaError(`${where}.children.${slot}: expected a list of blocks`);
    }
    children[slot] = rawKids.v.map((kid, i) =>
      taggedToBlock(`${where}.children.${slot}[${i}]`, kid),
    );
  }
  return { id: id.v, kind: kind.v, params, children };
}

/**
 * Parse a program document from text.
 *
 * Throws ProgramSyntaxError for malformed JSON and SchemaError for schema
 * violations, like the station does over HTTP.
 */
export function parseProgram(text: string): ProgramDoc {
  const root = parseTagged(text);
  if (root.t !== "obj") throw new SchemaError("top level must be an object");
  const unknown = [...root.v.keys()].filter((k) => !["version", "name", "blocks"].includes(k));
  if (unknown.length > 0) {
    throw new SchemaError(`top level: unknown field(s) ${unknown.sort().join(", ")}`);
  }
  for (const key of ["version", "name", "blocks"]) {
    if (!root.v.has(key)) throw new SchemaError(`top level: missing field ${key}`);
  }
  const version = root.v.get("version")!;
  const name = root.v.get("name")!;
  const blocks = root.v.get("blocks")!;
  if (version.t !== "int") throw new SchemaError(`unsupported program version`);
  if (name.t !== "str") throw new SchemaError("program name must be a string");
  if (blocks.t !== "arr") throw new SchemaError("top level: blocks must be a list");

  const doc: ProgramDoc = {
    version: version.v,
    name: name.v,
    blocks: blocks.v.map((b, i) => taggedToBlock(`blocks[${i}]`, b)),
  };
  const errors = validateProgram(doc);
  if (errors.length > 0) {
    throw new SchemaError(`${errors[0].path}: ${errors[0].message}`);
  }
  return doc;
}
