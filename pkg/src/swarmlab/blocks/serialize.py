"""Canonical JSON serialization for block programs.

The on-disk and on-wire form is UTF-8 JSON with lexicographically sorted
keys and no insignificant whitespace, so structurally equal programs always
produce byte-identical documents and parse/serialize compose to identity.
"""

from __future__ import annotations

import json
from typing import Any, Dict, List, Union

from .model import (
    Block,
    BlockKind,
    BlockProgram,
    Condition,
    ProgramSyntaxError,
    SchemaError,
)

_KIND_BY_VALUE = {k.value: k for k in BlockKind}
_PROGRAM_KEYS = frozenset({"version", "name", "blocks"})
_BLOCK_KEYS = frozenset({"id", "kind", "params", "children"})
_COND_KEYS = frozenset({"lhs", "op", "rhs"})


def block_to_dict(b: Block) -> Dict[str, Any]:
    params: Dict[str, Any] = {}
    for name, value in b.params.items():
        if isinstance(value, Condition):
            params[name] = {"lhs": value.lhs, "op": value.op, "rhs": value.rhs}
        else:
            params[name] = value
    return {
        "id": b.id,
        "kind": b.kind.value,
        "params": params,
        "children": {
            slot: [block_to_dict(kid) for kid in kids]
            for slot, kids in b.children.items()
        },
    }


def program_to_dict(p: BlockProgram) -> Dict[str, Any]:
    return {
        "version": p.version,
        "name": p.name,
        "blocks": [block_to_dict(b) for b in p.blocks],
    }


def serialize(p: BlockProgram) -> bytes:
    """Validate and render a program to its canonical byte form."""
    p.validate()
    text = json.dumps(
        program_to_dict(p), sort_keys=True, separators=(",", ":"), ensure_ascii=False
    )
    return text.encode("utf-8")


def _reject_unknown(path: str, raw: Dict[str, Any], allowed: frozenset) -> None:
    unknown = set(raw) - allowed
    if unknown:
        raise SchemaError(f"{path}: unknown field(s) {sorted(unknown)}")


def _build_condition(path: str, raw: Any) -> Condition:
    if not isinstance(raw, dict):
        raise SchemaError(f"{path}: condition must be an object, got {raw!r}")
    _reject_unknown(path, raw, _COND_KEYS)
    for key in _COND_KEYS:
        if key not in raw:
            raise SchemaError(f"{path}: condition missing field {key!r}")
    try:
        return Condition(raw["lhs"], raw["op"], raw["rhs"])
    except ValueError as e:
        raise SchemaError(f"{path}: {e}") from e


def _build_block(path: str, raw: Any) -> Block:
    if not isinstance(raw, dict):
        raise SchemaError(f"{path}: block must be an object, got {raw!r}")
    _reject_unknown(path, raw, _BLOCK_KEYS)
    for key in ("id", "kind"):
        if key not in raw:
            raise SchemaError(f"{path}: block missing field {key!r}")
    if not isinstance(raw["kind"], str) or raw["kind"] not in _KIND_BY_VALUE:
        raise SchemaError(f"{path}: unknown block kind {raw['kind']!r}")
    kind = _KIND_BY_VALUE[raw["kind"]]

    raw_params = raw.get("params", {})
    if not isinstance(raw_params, dict):
        raise SchemaError(f"{path}: params must be an object")
    params: Dict[str, Any] = {}
    for name, value in raw_params.items():
        if kind in (BlockKind.WHILE, BlockKind.IF) and name == "cond":
            params[name] = _build_condition(f"{path}.params.cond", value)
        else:
            params[name] = value

    raw_children = raw.get("children", {})
    if not isinstance(raw_children, dict):
        raise SchemaError(f"{path}: children must be an object")
    children: Dict[str, List[Block]] = {}
    for slot, kids in raw_children.items():
        if not isinstance(kids, list):
            raise SchemaError(f"{path}.children.{slot}: expected a list of blocks")
        children[slot] = [
            _build_block(f"{path}.children.{slot}[{i}]", kid)
            for i, kid in enumerate(kids)
        ]
    return Block(id=raw.get("id"), kind=kind, params=params, children=children)


def parse(document: Union[bytes, str]) -> BlockProgram:
    """Parse and validate a program document.

    Raises:
        ProgramSyntaxError: the document is not UTF-8 or not JSON.
        SchemaError: the document violates the program schema.
    """
    if isinstance(document, (bytes, bytearray)):
        try:
            text = bytes(document).decode("utf-8")
        except UnicodeDecodeError as e:
            raise ProgramSyntaxError(f"document is not UTF-8: {e}") from e
    else:
        text = document
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise ProgramSyntaxError(f"document is not valid JSON: {e}") from e

    if not isinstance(raw, dict):
        raise SchemaError(f"top level must be an object, got {type(raw).__name__}")
    _reject_unknown("top level", raw, _PROGRAM_KEYS)
    for key in _PROGRAM_KEYS:
        if key not in raw:
            raise SchemaError(f"top level: missing field {key!r}")
    if not isinstance(raw["blocks"], list):
        raise SchemaError("top level: blocks must be a list")

    program = BlockProgram(
        name=raw["name"],
        blocks=tuple(
            _build_block(f"blocks[{i}]", b) for i, b in enumerate(raw["blocks"])
        ),
        version=raw["version"],
    )
    program.validate()
    return program
