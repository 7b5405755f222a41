/**
 * Block editor panel: palette, canvas tree, inline validation and the
 * save/run controls.
 *
 * Saving uploads the canonical bytes over HTTP PUT so the stored file is
 * exactly what the canvas serializes to; pushing the document through a
 * websocket call would let JSON.stringify collapse 1.0 to 1 on the way.
 */

import { EditorWorkspace, SlotRef } from "../editor.js";
import {
  BLOCK_KINDS,
  BLOCK_SCHEMA,
  BlockNode,
  COMPARISON_OPS,
  Condition,
  EFFECT_KINDS,
  FORMATION_KINDS,
  LED_GROUPS,
  Operand,
  ParamValue,
  Violation,
  parseProgram,
} from "../program.js";
import { StationClient } from "./dashboardPanel.js";
import { clear, el } from "./dom.js";

const VAR_RE = /^[A-Za-z_][A-Za-z0-9_]*$/;

const ENUM_OPTIONS: Record<string, readonly string[]> = {
  "ApplyFormation.kind": FORMATION_KINDS,
  "LedEffect.effect": EFFECT_KINDS,
  "LedEffect.group": LED_GROUPS,
};

/** Textual input to a num-slot value: identifier reads as a variable. */
export function parseNumInput(text: string): ParamValue | null {
  const trimmed = text.trim();
  if (VAR_RE.test(trimmed)) return { t: "var", v: trimmed };
  const value = Number(trimmed);
  if (trimmed === "" || !Number.isFinite(value)) return null;
  return { t: "float", v: value };
}

function operandFrom(text: string): Operand | null {
  const parsed = parseNumInput(text);
  if (parsed === null || parsed.t === "str" || parsed.t === "bool" || parsed.t === "cond") {
    return null;
  }
  return parsed;
}

function operandText(op: Operand): string {
  return op.t === "var" ? op.v : String(op.v);
}

export class EditorPanel {
  readonly workspace = new EditorWorkspace();
  private client: StationClient;
  private canvas: HTMLElement;
  private problems: HTMLElement;
  private preview: HTMLElement;
  private nameInput: HTMLInputElement;
  private saveBtn: HTMLButtonElement;
  private runBtn: HTMLButtonElement;
  private statusLine: HTMLElement;
  private loadSelect: HTMLSelectElement;
  /** Where the next palette click inserts. */
  private target: SlotRef = { parentId: null, slot: "", index: 0 };

  constructor(root: HTMLElement, client: StationClient) {
    this.client = client;

    this.nameInput = el("input", { type: "text", id: "program-name", value: "untitled" });
    this.nameInput.addEventListener("change", () => {
      this.workspace.setName(this.nameInput.value);
      this.refresh();
    });

    this.saveBtn = el("button", { id: "editor-save" }, ["Save to station"]);
    this.saveBtn.addEventListener("click", () => void this.save());
    this.runBtn = el("button", { id: "editor-run" }, ["Save + run"]);
    this.runBtn.addEventListener("click", () => void this.saveAndRun());
    const stopBtn = el("button", { id: "editor-stop" }, ["Stop"]);
    stopBtn.addEventListener("click", () => {
      void this.client.call("stop").catch((err) => this.setStatus(String(err)));
    });

    this.loadSelect = el("select", { id: "editor-load-select" });
    const loadBtn = el("button", { id: "editor-load" }, ["Load"]);
    loadBtn.addEventListener("click", () => void this.load());
    const refreshBtn = el("button", { id: "editor-refresh" }, ["List"]);
    refreshBtn.addEventListener("click", () => void this.refreshPrograms());

    this.statusLine = el("span", { class: "muted", id: "editor-status" });

    const palette = el("div", { class: "palette", id: "palette" });
    for (const kind of BLOCK_KINDS) {
      const btn = el("button", { class: "palette-block", "data-kind": kind }, [kind]);
      btn.addEventListener("click", () => {
        this.workspace.insert(kind, this.target);
        this.bumpTarget();
        this.refresh();
      });
      palette.append(btn);
    }

    this.canvas = el("div", { class: "canvas", id: "canvas" });
    this.problems = el("div", { class: "problems", id: "problems" });
    this.preview = el("pre", { class: "preview", id: "serial-preview" });

    root.append(
      el("div", { class: "row" }, [
        el("label", {}, ["name ", this.nameInput]),
        this.saveBtn,
        this.runBtn,
        stopBtn,
        this.loadSelect,
        loadBtn,
        refreshBtn,
        this.statusLine,
      ]),
      el("div", { class: "editor-split" }, [palette, this.canvas]),
      this.problems,
      el("h3", {}, ["Canonical serialization"]),
      this.preview,
    );

    this.refresh();
  }

  setStatus(text: string): void {
    this.statusLine.textContent = text;
  }

  async refreshPrograms(): Promise<void> {
    try {
      const result = (await this.client.call("list_programs")) as { programs: string[] };
      clear(this.loadSelect);
      for (const name of result.programs) {
        this.loadSelect.append(el("option", { value: name }, [name]));
      }
      this.setStatus(`${result.programs.length} stored`);
    } catch (err) {
      this.setStatus(String(err));
    }
  }

  private async load(): Promise<void> {
    const name = this.loadSelect.value;
    if (name === "") return;
    try {
      const resp = await fetch(`/api/programs/${encodeURIComponent(name)}`);
      if (!resp.ok) throw new Error(`load failed: ${resp.status}`);
      const doc = parseProgram(await resp.text());
      this.workspace.loadDocument(doc);
      this.nameInput.value = doc.name;
      this.setStatus(`loaded ${name}`);
      this.refresh();
    } catch (err) {
      this.setStatus(String(err));
    }
  }

  private async save(): Promise<boolean> {
    const violations = this.workspace.validate();
    if (violations.length > 0) {
      this.setStatus("fix the problems below before saving");
      return false;
    }
    const bytes = this.workspace.serialize();
    const storeName = this.storageName();
    try {
      // fetch re-encodes a string body as UTF-8, which is exactly these bytes.
      const resp = await fetch(`/api/programs/${encodeURIComponent(storeName)}`, {
        method: "PUT",
        headers: { "content-type": "application/json" },
        body: new TextDecoder().decode(bytes),
      });
      if (!resp.ok) {
        const detail = (await resp.json()) as { message?: string };
        throw new Error(detail.message ?? `save failed: ${resp.status}`);
      }
      this.workspace.dirty = false;
      this.setStatus(`saved ${storeName} (${bytes.length} bytes)`);
      return true;
    } catch (err) {
      this.setStatus(String(err));
      return false;
    }
  }

  private async saveAndRun(): Promise<void> {
    if (!(await this.save())) return;
    try {
      const result = (await this.client.call("run", { name: this.storageName() })) as {
        run_id: string;
      };
      this.setStatus(`started ${result.run_id}`);
    } catch (err) {
      this.setStatus(String(err));
    }
  }

  /** Stored file names are restricted; squash the display name to fit. */
  private storageName(): string {
    const squashed = this.workspace.name.replace(/[^A-Za-z0-9_-]/g, "_").slice(0, 64);
    return squashed === "" ? "untitled" : squashed;
  }

  private bumpTarget(): void {
    this.target = { ...this.target, index: this.target.index + 1 };
  }

  private refresh(): void {
    const violations = this.workspace.validate();
    const byBlock = new Map<string, Violation[]>();
    for (const v of violations) {
      if (v.blockId === undefined) continue;
      const list = byBlock.get(v.blockId) ?? [];
      list.push(v);
      byBlock.set(v.blockId, list);
    }

    clear(this.canvas);
    this.canvas.append(this.sequenceNode(this.workspace.blocks, null, "", byBlock));

    clear(this.problems);
    for (const v of violations) {
      this.problems.append(
        el("div", { class: "problem" }, [`${v.path}: ${v.message}`]),
      );
    }

    const valid = violations.length === 0;
    this.saveBtn.disabled = !valid;
    this.runBtn.disabled = !valid;
    if (valid) {
      const bytes = this.workspace.serialize();
      this.preview.textContent = new TextDecoder().decode(bytes);
    } else {
      this.preview.textContent = `(not serializable: ${violations.length} problem${
        violations.length === 1 ? "" : "s"
      })`;
    }
  }

  private sequenceNode(
    blocks: BlockNode[],
    parentId: string | null,
    slot: string,
    byBlock: Map<string, Violation[]>,
  ): HTMLElement {
    const seq = el("div", { class: "seq" });
    const addTarget = (index: number) => {
      const here =
        this.target.parentId === parentId &&
        this.target.slot === slot &&
        this.target.index === index;
      const btn = el(
        "button",
        { class: here ? "drop here" : "drop", title: "insert here" },
        [here ? "▶ insert here" : "+"],
      );
      btn.addEventListener("click", () => {
        this.target = { parentId, slot, index };
        this.refresh();
      });
      seq.append(btn);
    };
    blocks.forEach((block, i) => {
      addTarget(i);
      seq.append(this.blockNode(block, byBlock));
    });
    addTarget(blocks.length);
    return seq;
  }

  private blockNode(block: BlockNode, byBlock: Map<string, Violation[]>): HTMLElement {
    const problems = byBlock.get(block.id) ?? [];
    const node = el("div", {
      class: problems.length > 0 ? "block invalid" : "block",
      "data-block-id": block.id,
    });

    const remove = el("button", { class: "dismiss", title: "remove" }, ["✕"]);
    remove.addEventListener("click", () => {
      this.workspace.remove(block.id);
      this.target = { parentId: null, slot: "", index: this.workspace.blocks.length };
      this.refresh();
    });
    node.append(
      el("div", { class: "block-head" }, [
        el("span", { class: "kind" }, [block.kind]),
        el("span", { class: "block-id" }, [block.id]),
        remove,
      ]),
    );

    const params = el("div", { class: "params" });
    const sig = BLOCK_SCHEMA[block.kind];
    const names = [...Object.keys(sig.required), ...Object.keys(sig.optional)];
    for (const name of names) {
      params.append(this.paramField(block, name));
    }
    if (names.length > 0) node.append(params);

    for (const problem of problems) {
      node.append(el("div", { class: "problem inline" }, [problem.message]));
    }

    for (const slot of sig.slots) {
      node.append(
        el("div", { class: "slot" }, [
          el("div", { class: "slot-name" }, [slot]),
          this.sequenceNode(block.children[slot] ?? [], block.id, slot, byBlock),
        ]),
      );
    }
    return node;
  }

  private paramField(block: BlockNode, name: string): HTMLElement {
    const sig = BLOCK_SCHEMA[block.kind];
    const tag = sig.required[name] ?? sig.optional[name];
    const current = block.params[name];
    const label = el("label", { class: "param" }, [`${name} `]);

    const enumKey = `${block.kind}.${name}`;
    if (tag === "str" && enumKey in ENUM_OPTIONS) {
      const select = el("select");
      for (const option of ENUM_OPTIONS[enumKey]) {
        select.append(el("option", { value: option }, [option]));
      }
      if (current !== undefined && current.t === "str") select.value = current.v;
      select.addEventListener("change", () => {
        this.workspace.setParam(block.id, name, { t: "str", v: select.value });
        this.refresh();
      });
      label.append(select);
      return label;
    }

    if (tag === "cond") {
      const cond: Condition =
        current !== undefined && current.t === "cond"
          ? current.v
          : { lhs: { t: "var", v: "x" }, op: "<", rhs: { t: "float", v: 1.0 } };
      const lhs = el("input", { type: "text", class: "operand", value: operandText(cond.lhs) });
      const op = el("select");
      for (const o of COMPARISON_OPS) op.append(el("option", { value: o }, [o]));
      op.value = cond.op;
      const rhs = el("input", { type: "text", class: "operand", value: operandText(cond.rhs) });
      const commit = () => {
        const left = operandFrom(lhs.value);
        const right = operandFrom(rhs.value);
        if (left === null || right === null) {
          this.setStatus("condition operands are numbers or variable names");
          return;
        }
        this.workspace.setParam(block.id, name, {
          t: "cond",
          v: { lhs: left, op: op.value as Condition["op"], rhs: right },
        });
        this.refresh();
      };
      lhs.addEventListener("change", commit);
      op.addEventListener("change", commit);
      rhs.addEventListener("change", commit);
      label.append(lhs, op, rhs);
      return label;
    }

    if (tag === "bool") {
      const box = el("input", { type: "checkbox" });
      box.checked = current !== undefined && current.t === "bool" && current.v;
      box.addEventListener("change", () => {
        if (box.checked) {
          this.workspace.setParam(block.id, name, { t: "bool", v: true });
        } else if (name in sig.optional) {
          delete block.params[name];
          this.workspace.dirty = true;
        } else {
          this.workspace.setParam(block.id, name, { t: "bool", v: false });
        }
        this.refresh();
      });
      label.append(box);
      return label;
    }

    const currentText =
      current === undefined
        ? ""
        : current.t === "var" || current.t === "str"
          ? current.v
          : String(current.v);
    const input = el("input", { type: "text", class: "param-input", value: currentText });
    input.addEventListener("change", () => {
      const text = input.value.trim();
      if (tag === "int") {
        const value = Number(text);
        if (!Number.isInteger(value) || text === "") {
          this.setStatus(`${name} needs an integer`);
          return;
        }
        this.workspace.setParam(block.id, name, { t: "int", v: value });
      } else if (tag === "num") {
        const opt = name in sig.optional;
        if (text === "" && opt) {
          delete block.params[name];
          this.workspace.dirty = true;
          this.refresh();
          return;
        }
        const parsed = parseNumInput(text);
        if (parsed === null) {
          this.setStatus(`${name} needs a number or variable name`);
          return;
        }
        this.workspace.setParam(block.id, name, parsed);
      } else {
        this.workspace.setParam(block.id, name, { t: "str", v: text });
      }
      this.refresh();
    });
    label.append(input);
    return label;
  }
}
