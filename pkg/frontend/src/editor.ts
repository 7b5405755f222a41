/**
 * Block editor workspace model.
 *
 * The canvas is a block tree mirroring the program document; the DOM layer
 * renders it and calls the mutation methods here. Everything observable is
 * derived: validation reruns on each mutation and serialization goes
 * through the same canonical writer the station uses, so an exported
 * document is byte-identical to what the station would produce for the
 * same structure.
 */

import {
  BLOCK_SCHEMA,
  BlockNode,
  Condition,
  ParamValue,
  ProgramDoc,
  Violation,
  serializeProgram,
  validateProgram,
} from "./program.js";

/** Where a block sits: the root sequence or a child slot of another block. */
export interface SlotRef {
  parentId: string | null;
  slot: string;
  index: number;
}

function defaultParam(kind: string, name: string, tag: string): ParamValue {
  if (tag === "int") {
    if (name === "count") return { t: "int", v: 2 };
    if (name === "n") return { t: "int", v: 4 };
    if (name === "drone") return { t: "int", v: 0 };
    return { t: "int", v: 0 };
  }
  if (tag === "num") {
    if (name === "z" || name === "altitude") return { t: "float", v: 1.0 };
    if (name === "speed") return { t: "float", v: 0.5 };
    if (name === "seconds") return { t: "float", v: 1.0 };
    if (name === "size" || name === "factor" || name === "rate") return { t: "float", v: 1.0 };
    return { t: "float", v: 0.0 };
  }
  if (tag === "str") {
    if (kind === "ApplyFormation") return { t: "str", v: "circle" };
    if (name === "effect") return { t: "str", v: "fill" };
    if (name === "group") return { t: "str", v: "all" };
    if (name === "var" || name === "name") return { t: "str", v: "x" };
    return { t: "str", v: "" };
  }
  if (tag === "bool") return { t: "bool", v: false };
  const cond: Condition = {
    lhs: { t: "var", v: "x" },
    op: "<",
    rhs: { t: "float", v: 1.0 },
  };
  return { t: "cond", v: cond };
}

/** A fresh block of the given kind with schema defaults filled in. */
export function newBlock(kind: string, id: string): BlockNode {
  const sig = BLOCK_SCHEMA[kind];
  if (sig === undefined) throw new Error(`unknown block kind ${kind}`);
  const params: Record<string, ParamValue> = {};
  for (const [name, tag] of Object.entries(sig.required)) {
    params[name] = defaultParam(kind, name, tag);
  }
  const children: Record<string, BlockNode[]> = {};
  for (const slot of sig.slots) children[slot] = [];
  return { id, kind, params, children };
}

export class EditorWorkspace {
  name = "untitled";
  blocks: BlockNode[] = [];
  dirty = false;
  private counter = 0;

  /** Validation of the current canvas; empty list means exportable. */
  validate(): Violation[] {
    return validateProgram(this.toDocument());
  }

  toDocument(): ProgramDoc {
    return { version: 1, name: this.name, blocks: this.blocks };
  }

  /** Canonical bytes for the canvas. Throws SchemaError while invalid. */
  serialize(): Uint8Array {
    return serializeProgram(this.toDocument());
  }

  /** Replace the canvas with an existing document (load for editing). */
  loadDocument(doc: ProgramDoc): void {
    this.name = doc.name;
    this.blocks = doc.blocks;
    this.dirty = false;
    // Continue id generation above anything already used.
    this.counter = 0;
    for (const [, block] of this.walk()) {
      const m = /^b(\d+)$/.exec(block.id);
      if (m) this.counter = Math.max(this.counter, parseInt(m[1], 10));
    }
  }

  freshId(): string {
    this.counter++;
    return `b${this.counter}`;
  }

  setName(name: string): void {
    this.name = name;
    this.dirty = true;
  }

  /** Insert a new block of `kind` at the given position and return it. */
  insert(kind: string, at: SlotRef): BlockNode {
    const block = newBlock(kind, this.freshId());
    const seq = this.resolveSlot(at);
    const index = Math.max(0, Math.min(at.index, seq.length));
    seq.splice(index, 0, block);
    this.dirty = true;
    return block;
  }

  remove(blockId: string): BlockNode | null {
    const found = this.locate(blockId);
    if (found === null) return null;
    const [seq, index] = found;
    const [block] = seq.splice(index, 1);
    this.dirty = true;
    return block;
  }

  /** Detach a block and reinsert it elsewhere (drag between slots). */
  move(blockId: string, to: SlotRef): boolean {
    // Refuse moves into the block's own subtree; that would orphan it.
    if (to.parentId !== null) {
      const block = this.find(blockId);
      if (block === null) return false;
      if (blockId === to.parentId || this.contains(block, to.parentId)) return false;
    }
    const found = this.locate(blockId);
    if (found === null) return false;
    const [seq, index] = found;
    const [block] = seq.splice(index, 1);
    const target = this.resolveSlot(to);
    const clamped = Math.max(0, Math.min(to.index, target.length));
    target.splice(clamped, 0, block);
    this.dirty = true;
    return true;
  }

  setParam(blockId: string, name: string, value: ParamValue): boolean {
    const block = this.find(blockId);
    if (block === null) return false;
    block.params[name] = value;
    this.dirty = true;
    return true;
  }

  find(blockId: string): BlockNode | null {
    for (const [, block] of this.walk()) {
      if (block.id === blockId) return block;
    }
    return null;
  }

  *walk(): Generator<[string, BlockNode]> {
    function* rec(blocks: BlockNode[], prefix: string): Generator<[string, BlockNode]> {
      for (let i = 0; i < blocks.length; i++) {
        const block = blocks[i];
        yield [`${prefix}[${i}]`, block];
        for (const slot of Object.keys(block.children).sort()) {
          yield* rec(block.children[slot], `${prefix}.${slot}`);
        }
      }
    }
    yield* rec(this.blocks, "blocks");
  }

  private contains(root: BlockNode, blockId: string): boolean {
    for (const kids of Object.values(root.children)) {
      for (const kid of kids) {
        if (kid.id === blockId || this.contains(kid, blockId)) return true;
      }
    }
    return false;
  }

  private resolveSlot(at: SlotRef): BlockNode[] {
    if (at.parentId === null) return this.blocks;
    const parent = this.find(at.parentId);
    if (parent === null) throw new Error(`no block ${at.parentId}`);
    const seq = parent.children[at.slot];
    if (seq === undefined) throw new Error(`block ${at.parentId} has no slot ${at.slot}`);
    return seq;
  }

  private locate(blockId: string): [BlockNode[], number] | null {
    const scan = (seq: BlockNode[]): [BlockNode[], number] | null => {
      for (let i = 0; i < seq.length; i++) {
        if (seq[i].id === blockId) return [seq, i];
        for (const kids of Object.values(seq[i].children)) {
          const hit = scan(kids);
          if (hit !== null) return hit;
        }
      }
      return null;
    };
    return scan(this.blocks);
  }
}
