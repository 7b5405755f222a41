/**
 * Editor equivalence: twenty golden programs are rebuilt through the
 * editor workspace (palette insert + param edits) and must serialize to
 * exactly the bytes the station's serializer produced for the same
 * structures (tests/golden/generate.py).
 */

import { readFileSync } from "node:fs";
import { fileURLToPath } from "node:url";
import { describe, expect, it } from "vitest";

import { EditorWorkspace } from "../src/editor.js";
import { Operand, ParamValue } from "../src/program.js";

const golden = (name: string): Buffer =>
  readFileSync(fileURLToPath(new URL(`./golden/${name}`, import.meta.url)));

const I = (v: number): ParamValue => ({ t: "int", v });
const F = (v: number): ParamValue => ({ t: "float", v });
const S = (v: string): ParamValue => ({ t: "str", v });
const V = (v: string): ParamValue => ({ t: "var", v });
const B = (v: boolean): ParamValue => ({ t: "bool", v });
const C = (lhs: Operand, op: string, rhs: Operand): ParamValue => ({ t: "cond", v: { lhs, op, rhs } });
const ci = (v: number): Operand => ({ t: "int", v });
const cf = (v: number): Operand => ({ t: "float", v });
const cv = (v: string): Operand => ({ t: "var", v });

interface Spec {
  kind: string;
  params?: Record<string, ParamValue>;
  slots?: Record<string, Spec[]>;
}

const b = (
  kind: string,
  params: Record<string, ParamValue> = {},
  slots: Record<string, Spec[]> = {},
): Spec => ({ kind, params, slots });

/** Insert depth-first so auto ids b1..bN follow document order. */
function buildInto(ws: EditorWorkspace, specs: Spec[], parentId: string | null, slot: string): void {
  specs.forEach((spec, index) => {
    const node = ws.insert(spec.kind, { parentId, slot, index });
    for (const [name, value] of Object.entries(spec.params ?? {})) {
      ws.setParam(node.id, name, value);
    }
    for (const [slotName, kids] of Object.entries(spec.slots ?? {})) {
      buildInto(ws, kids, node.id, slotName);
    }
  });
}

function buildWorkspace(name: string, specs: Spec[]): EditorWorkspace {
  const ws = new EditorWorkspace();
  ws.setName(name);
  buildInto(ws, specs, null, "");
  return ws;
}

const ifElse = (cond: ParamValue, body: Spec[], elseBody: Spec[]): Spec =>
  b("If", { cond }, { body, else: elseBody });

const GOLDENS: Array<[string, string, Spec[]]> = [
  ["prog-01.json", "empty", []],
  ["prog-02.json", "hop", [
    b("TakeoffAll", { z: F(1.0) }),
    b("Wait", { seconds: F(0.5) }),
    b("LandAll"),
  ]],
  ["prog-03.json", "repeat-wait", [
    b("Repeat", { count: I(3) }, { body: [b("Wait", { seconds: F(0.1) })] }),
  ]],
  ["prog-04.json", "navigate", [
    b("TakeoffAll", { z: F(1.0) }),
    b("Navigate", { drone: I(0), x: F(1.0), y: F(-2.5), z: F(1.5), speed: F(0.5) }),
    b("LandAll"),
  ]],
  ["prog-05.json", "formation-line", [
    b("TakeoffAll", { z: F(1.0) }),
    b("ApplyFormation", { kind: S("line"), n: I(4), size: F(3.0), altitude: F(1.0) }),
    b("LandAll"),
  ]],
  ["prog-06.json", "formation-cube", [
    b("TakeoffAll", { z: F(1.0) }),
    b("ApplyFormation", { kind: S("cube"), n: I(8), size: F(2.0), altitude: F(1.0), height: F(2.0) }),
    b("Wait", { seconds: F(1.0) }),
    b("LandAll"),
  ]],
  ["prog-07.json", "transform", [
    b("ApplyFormation", { kind: S("circle"), n: I(6), size: F(2.5), altitude: F(1.2) }),
    b("Translate", { dx: F(-0.0), dy: F(-1.5), dz: F(0.25) }),
    b("Rotate", { angle: F(45.0) }),
    b("Scale", { factor: F(1.25) }),
  ]],
  ["prog-08.json", "leds", [
    b("LedEffect", { effect: S("fill"), group: S("all"), r: I(255), g: I(64), b: I(0), rate: F(1.0) }),
    b("LedEffect", { effect: S("rainbow"), group: S("even"), r: I(0), g: I(0), b: I(255), rate: F(2.5) }),
  ]],
  ["prog-09.json", "while-loop", [
    b("SetVar", { var: S("i"), value: F(0.0) }),
    b("While", { cond: C(cv("i"), "<", ci(3)) }, { body: [
      b("Wait", { seconds: F(0.2) }),
      b("SetVar", { var: S("i"), value: F(1.0), add: B(true) }),
    ] }),
  ]],
  ["prog-10.json", "if-else", [
    b("Prompt", { var: S("h"), message: S("target height?") }),
    ifElse(
      C(cv("h"), ">=", cf(1.0)),
      [b("TakeoffAll", { z: V("h") })],
      [b("LedEffect", { effect: S("flash"), group: S("all"), r: I(255), g: I(0), b: I(0), rate: F(2.0) })],
    ),
  ]],
  ["prog-11.json", "define-call", [
    b("Define", { name: S("blink") }, { body: [
      b("LedEffect", { effect: S("blink"), group: S("all"), r: I(0), g: I(255), b: I(0), rate: F(1.0) }),
    ] }),
    b("Call", { name: S("blink") }),
    b("Call", { name: S("blink") }),
  ]],
  ["prog-12.json", "nested-repeat", [
    b("Repeat", { count: I(2) }, { body: [
      b("Repeat", { count: I(2) }, { body: [b("Wait", { seconds: F(0.05) })] }),
    ] }),
  ]],
  ["prog-13.json", "int-texture", [
    b("TakeoffAll", { z: I(1) }),
    b("Navigate", { drone: I(0), x: I(1), y: I(2), z: I(1), speed: I(1) }),
    b("Wait", { seconds: I(2) }),
    b("LandAll"),
  ]],
  ["prog-14.json", "tiny-times", [
    b("Wait", { seconds: F(1e-5) }),
    b("Wait", { seconds: F(2.5e-7) }),
    b("SetVar", { var: S("big"), value: F(1e16) }),
  ]],
  ["prog-15.json", "náv \u{1f681} piñata", [
    b("TakeoffAll", { z: F(0.8) }),
    b("LandAll"),
  ]],
  ["prog-16.json", 'say "hi"\\\n\ttab', [
    b("Wait", { seconds: F(0.1) }),
  ]],
  ["prog-17.json", "var-height", [
    b("Prompt", { var: S("z"), message: S("height (m)?") }),
    b("TakeoffAll", { z: V("z") }),
    b("Navigate", { drone: I(-1), x: F(0.0), y: F(0.0), z: V("z"), speed: F(0.25) }),
    b("LandAll"),
  ]],
  ["prog-18.json", "guarded", [
    b("SetVar", { var: S("a"), value: F(0.0) }),
    b("SetVar", { var: S("b"), value: F(2.0) }),
    b("While", { cond: C(cv("a"), "<", cv("b")) }, { body: [
      ifElse(
        C(cv("a"), "==", cv("b")),
        [b("Wait", { seconds: F(0.1) })],
        [b("SetVar", { var: S("a"), value: F(1.0), add: B(true) })],
      ),
    ] }),
  ]],
  ["prog-19.json", "compare-ops", [
    b("SetVar", { var: S("x"), value: F(1.0) }),
    ifElse(C(cv("x"), "<", ci(2)), [b("Wait", { seconds: F(0.1) })], []),
    ifElse(C(cv("x"), "<=", ci(1)), [b("Wait", { seconds: F(0.1) })], []),
    ifElse(C(cv("x"), ">", ci(0)), [b("Wait", { seconds: F(0.1) })], []),
    ifElse(C(cv("x"), ">=", ci(1)), [b("Wait", { seconds: F(0.1) })], []),
    ifElse(C(cv("x"), "==", ci(1)), [b("Wait", { seconds: F(0.1) })], []),
    ifElse(C(cv("x"), "!=", ci(5)), [b("Wait", { seconds: F(0.1) })], []),
  ]],
  ["prog-20.json", "kitchen-sink", [
    b("Define", { name: S("prep") }, { body: [
      b("ApplyFormation", { kind: S("line"), n: I(3), size: F(2.0), altitude: F(1.0) }),
      b("LedEffect", { effect: S("fill"), group: S("all"), r: I(0), g: I(128), b: I(255), rate: F(1.0) }),
    ] }),
    b("TakeoffAll", { z: F(1.0) }),
    b("Call", { name: S("prep") }),
    b("Prompt", { var: S("n"), message: S("laps?") }),
    b("SetVar", { var: S("i"), value: F(0.0) }),
    b("While", { cond: C(cv("i"), "<", cv("n")) }, { body: [
      b("Navigate", { drone: I(0), x: F(1.0), y: F(1.0), z: F(1.0), speed: F(0.5) }),
      b("Translate", { dx: F(0.5), dy: F(0.0), dz: F(0.0) }),
      b("Rotate", { angle: F(90.0) }),
      b("Scale", { factor: F(1.1) }),
      ifElse(
        C(cv("i"), "==", ci(0)),
        [b("Wait", { seconds: F(0.2) })],
        [b("Repeat", { count: I(2) }, { body: [b("Wait", { seconds: F(0.1) })] })],
      ),
      b("SetVar", { var: S("i"), value: F(1.0), add: B(true) }),
    ] }),
    b("LandAll"),
  ]],
];

describe("editor golden equivalence", () => {
  it("has exactly twenty golden programs", () => {
    expect(GOLDENS).toHaveLength(20);
  });

  for (const [file, name, specs] of GOLDENS) {
    it(`${file} (${JSON.stringify(name).slice(0, 40)}) serializes byte-identical`, () => {
      const ws = buildWorkspace(name, specs);
      expect(ws.validate()).toEqual([]);
      const got = Buffer.from(ws.serialize());
      const want = golden(file);
      expect(got.toString("utf-8")).toBe(want.toString("utf-8"));
      expect(Buffer.compare(got, want)).toBe(0);
    });
  }

  it("an empty canvas serializes to the canonical empty program", () => {
    const ws = new EditorWorkspace();
    ws.setName("empty");
    expect(Buffer.from(ws.serialize()).toString("utf-8")).toBe(
      '{"blocks":[],"name":"empty","version":1}',
    );
    expect(Buffer.compare(Buffer.from(ws.serialize()), golden("prog-01.json"))).toBe(0);
  });
});
