"""Block program model: vocabulary, schema rules, and runtime state types.

A program is a tree of typed blocks. Sixteen block kinds cover swarm
actions (takeoff, navigation, formations, LEDs), timing, control flow
(loops, conditionals, functions) and variables. Validation is structural
and total: every reachable violation raises SchemaError with the offending
block id and path, so editors can point at the exact spot.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Iterator, Mapping, Optional, Sequence, Tuple, Union

from ..geometry import FormationKind
from ..sim.leds import EffectKind, LedGroup


class BlockError(Exception):
    """Base class for block-language errors."""


class ProgramSyntaxError(BlockError):
    """The document is not well-formed (bad encoding or bad JSON)."""


class SchemaError(BlockError):
    """The document is well-formed but violates the program schema."""


class InvalidName(BlockError):
    """A stored-program name falls outside the allowed charset."""


class NotFound(BlockError):
    """No stored program with the requested name."""


class StorageFailure(BlockError):
    """The program directory could not be read or written."""


class AlreadyRunning(BlockError):
    """A second execution was requested while one is active."""


class NotRunning(BlockError):
    """stop was requested with no active execution."""


class NotPrompting(BlockError):
    """A prompt answer arrived while no prompt was pending."""


class UndefinedVariable(BlockError):
    """A variable reference did not resolve at evaluation time."""


class BlockKind(Enum):
    TAKEOFF_ALL = "TakeoffAll"
    LAND_ALL = "LandAll"
    NAVIGATE = "Navigate"
    APPLY_FORMATION = "ApplyFormation"
    TRANSLATE = "Translate"
    ROTATE = "Rotate"
    SCALE = "Scale"
    LED_EFFECT = "LedEffect"
    WAIT = "Wait"
    REPEAT = "Repeat"
    WHILE = "While"
    IF = "If"
    DEFINE = "Define"
    CALL = "Call"
    PROMPT = "Prompt"
    SET_VAR = "SetVar"


CONTAINER_KINDS = frozenset(
    {BlockKind.REPEAT, BlockKind.WHILE, BlockKind.IF, BlockKind.DEFINE}
)

COMPARISON_OPS = ("<", "<=", ">", ">=", "==", "!=")

_VAR_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")

Operand = Union[int, float, str]


@dataclass(frozen=True)
class Condition:
    """A comparison between two operands.

    Operands are either number constants or variable-name strings that
    resolve when the condition is evaluated.
    """

    lhs: Operand
    op: str
    rhs: Operand

    def __post_init__(self) -> None:
        if self.op not in COMPARISON_OPS:
            raise ValueError(f"unknown comparison operator {self.op!r}")
        for side, v in (("lhs", self.lhs), ("rhs", self.rhs)):
            if isinstance(v, str):
                if not _VAR_RE.match(v):
                    raise ValueError(f"{side} is not a valid variable name: {v!r}")
            elif isinstance(v, bool) or not isinstance(v, (int, float)):
                raise ValueError(f"{side} must be a number or variable name, got {v!r}")
            elif not math.isfinite(v):
                raise ValueError(f"{side} must be finite, got {v!r}")


ParamValue = Union[bool, int, float, str, Condition]


@dataclass(frozen=True)
class Block:
    """One node of a block program."""

    id: str
    kind: BlockKind
    params: Mapping[str, ParamValue] = field(default_factory=dict)
    children: Mapping[str, Tuple["Block", ...]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "params", dict(self.params))
        object.__setattr__(
            self, "children", {slot: tuple(blocks) for slot, blocks in self.children.items()}
        )

    def child_seq(self, slot: str) -> Tuple["Block", ...]:
        return self.children.get(slot, ())


@dataclass(frozen=True)
class BlockProgram:
    """A named, versioned root sequence of blocks."""

    name: str
    blocks: Tuple[Block, ...] = ()
    version: int = 1

    def __post_init__(self) -> None:
        object.__setattr__(self, "blocks", tuple(self.blocks))

    def walk(self) -> Iterator[Tuple[str, Block]]:
        """Yield (path, block) for every block in document order."""

        def rec(prefix: str, seq: Sequence[Block]) -> Iterator[Tuple[str, Block]]:
            for i, b in enumerate(seq):
                path = f"{prefix}[{i}]"
                yield path, b
                for slot, kids in sorted(b.children.items()):
                    yield from rec(f"{path}.children.{slot}", kids)

        yield from rec("blocks", self.blocks)

    def defines(self) -> Dict[str, Block]:
        """Map of function name to its Define block. Assumes a valid program."""
        return {
            b.params["name"]: b
            for _, b in self.walk()
            if b.kind is BlockKind.DEFINE
        }

    def validate(self) -> None:
        """Raise SchemaError on the first violation found, in document order."""
        if self.version != 1 or isinstance(self.version, bool):
            raise SchemaError(f"unsupported program version {self.version!r}")
        if not isinstance(self.name, str):
            raise SchemaError(f"program name must be a string, got {self.name!r}")

        seen_ids: Dict[str, str] = {}
        define_names: Dict[str, str] = {}
        calls = []
        for path, b in self.walk():
            _validate_block(path, b)
            if b.id in seen_ids:
                raise SchemaError(
                    f"{path}: duplicate block id {b.id!r} (first at {seen_ids[b.id]})"
                )
            seen_ids[b.id] = path
            if b.kind is BlockKind.DEFINE:
                name = b.params["name"]
                if name in define_names:
                    raise SchemaError(
                        f"{path}: duplicate Define {name!r} "
                        f"(first at {define_names[name]})"
                    )
                define_names[name] = path
            elif b.kind is BlockKind.CALL:
                calls.append((path, b))
        for path, b in calls:
            if b.params["name"] not in define_names:
                raise SchemaError(
                    f"{path}: Call block {b.id!r} targets undefined "
                    f"function {b.params['name']!r}"
                )


class Status(Enum):
    IDLE = "idle"
    RUNNING = "running"
    PROMPTING = "prompting"
    STOPPING = "stopping"
    DONE = "done"
    ERRORED = "errored"


@dataclass
class ExecutionState:
    """Observable interpreter state."""

    status: Status = Status.IDLE
    current_block: Optional[str] = None
    variables: Dict[str, float] = field(default_factory=dict)
    error_message: Optional[str] = None


@dataclass(frozen=True)
class RuntimeParams:
    """Tunable execution parameters.

    Attributes:
        nav_tolerance: position slack, in meters, for a swarm op to count
            as complete.
        yaw_tolerance: yaw slack in radians.
        confirm_before_run: when true, run first raises a synthetic
            confirmation prompt; answering 0 cancels, anything else proceeds.
        block_timeout: seconds of sim time a single swarm op may take
            before the run errors out. Prompts are exempt.
    """

    nav_tolerance: float = 0.2
    yaw_tolerance: float = 0.1
    confirm_before_run: bool = False
    block_timeout: float = 60.0

    def __post_init__(self) -> None:
        if not self.nav_tolerance > 0.0:
            raise ValueError(f"nav_tolerance must be > 0, got {self.nav_tolerance}")
        if not self.yaw_tolerance > 0.0:
            raise ValueError(f"yaw_tolerance must be > 0, got {self.yaw_tolerance}")
        if not self.block_timeout > 0.0:
            raise ValueError(f"block_timeout must be > 0, got {self.block_timeout}")


# Parameter type tags. "num" accepts a number or a variable-name string so
# prompt answers can feed numeric slots; "int" and "str" are literal only.
_NUM = "num"
_INT = "int"
_STR = "str"
_BOOL = "bool"
_COND = "cond"


@dataclass(frozen=True)
class _Sig:
    required: Mapping[str, str] = field(default_factory=dict)
    optional: Mapping[str, str] = field(default_factory=dict)
    slots: Tuple[str, ...] = ()


_SCHEMA: Dict[BlockKind, _Sig] = {
    BlockKind.TAKEOFF_ALL: _Sig({"z": _NUM}),
    BlockKind.LAND_ALL: _Sig(),
    BlockKind.NAVIGATE: _Sig({"drone": _INT, "x": _NUM, "y": _NUM, "z": _NUM, "speed": _NUM}),
    BlockKind.APPLY_FORMATION: _Sig(
        {"kind": _STR, "n": _INT, "size": _NUM, "altitude": _NUM},
        optional={"height": _NUM},
    ),
    BlockKind.TRANSLATE: _Sig({"dx": _NUM, "dy": _NUM, "dz": _NUM}),
    BlockKind.ROTATE: _Sig({"angle": _NUM}),
    BlockKind.SCALE: _Sig({"factor": _NUM}),
    BlockKind.LED_EFFECT: _Sig(
        {"effect": _STR, "group": _STR, "r": _INT, "g": _INT, "b": _INT, "rate": _NUM}
    ),
    BlockKind.WAIT: _Sig({"seconds": _NUM}),
    BlockKind.REPEAT: _Sig({"count": _INT}, slots=("body",)),
    BlockKind.WHILE: _Sig({"cond": _COND}, slots=("body",)),
    BlockKind.IF: _Sig({"cond": _COND}, slots=("body", "else")),
    BlockKind.DEFINE: _Sig({"name": _STR}, slots=("body",)),
    BlockKind.CALL: _Sig({"name": _STR}),
    BlockKind.PROMPT: _Sig({"var": _STR, "message": _STR}),
    BlockKind.SET_VAR: _Sig({"var": _STR, "value": _NUM}, optional={"add": _BOOL}),
}

_FORMATION_NAMES = frozenset(k.value for k in FormationKind)
_EFFECT_NAMES = frozenset(k.value for k in EffectKind)
_GROUP_NAMES = frozenset(g.value for g in LedGroup)


def _check_param(path: str, b: Block, name: str, tag: str, value: ParamValue) -> None:
    where = f"{path}: block {b.id!r} param {name!r}"
    if tag == _NUM:
        if isinstance(value, str):
            if not _VAR_RE.match(value):
                raise SchemaError(f"{where}: not a valid variable name: {value!r}")
        elif isinstance(value, bool) or not isinstance(value, (int, float)):
            raise SchemaError(f"{where}: expected number or variable name, got {value!r}")
        elif not math.isfinite(value):
            raise SchemaError(f"{where}: must be finite, got {value!r}")
    elif tag == _INT:
        if isinstance(value, bool) or not isinstance(value, int):
            raise SchemaError(f"{where}: expected integer, got {value!r}")
    elif tag == _STR:
        if not isinstance(value, str):
            raise SchemaError(f"{where}: expected string, got {value!r}")
    elif tag == _BOOL:
        if not isinstance(value, bool):
            raise SchemaError(f"{where}: expected boolean, got {value!r}")
    elif tag == _COND:
        if not isinstance(value, Condition):
            raise SchemaError(f"{where}: expected a condition object, got {value!r}")


def _validate_block(path: str, b: Block) -> None:
    where = f"{path}: block {b.id!r}"
    if not isinstance(b.id, str) or not b.id:
        raise SchemaError(f"{path}: block id must be a non-empty string, got {b.id!r}")
    if not isinstance(b.kind, BlockKind):
        raise SchemaError(f"{where}: unknown kind {b.kind!r}")
    sig = _SCHEMA[b.kind]

    for name in sig.required:
        if name not in b.params:
            raise SchemaError(f"{where}: missing required param {name!r}")
    for name, value in b.params.items():
        tag = sig.required.get(name) or sig.optional.get(name)
        if tag is None:
            raise SchemaError(f"{where}: unknown param {name!r} for kind {b.kind.value}")
        _check_param(path, b, name, tag, value)

    for slot in b.children:
        if slot not in sig.slots:
            if b.kind in CONTAINER_KINDS:
                raise SchemaError(f"{where}: unknown child slot {slot!r}")
            raise SchemaError(f"{where}: kind {b.kind.value} takes no children")

    # Kind-specific value constraints beyond plain typing.
    if b.kind is BlockKind.REPEAT and b.params["count"] < 0:
        raise SchemaError(f"{where}: Repeat count must be >= 0, got {b.params['count']}")
    if b.kind is BlockKind.NAVIGATE and b.params["drone"] < -1:
        raise SchemaError(f"{where}: drone must be a drone id or -1 for all")
    if b.kind is BlockKind.APPLY_FORMATION:
        if b.params["kind"] not in _FORMATION_NAMES:
            raise SchemaError(
                f"{where}: unknown formation kind {b.params['kind']!r}; "
                f"expected one of {sorted(_FORMATION_NAMES)}"
            )
        if b.params["n"] < 1:
            raise SchemaError(f"{where}: formation n must be >= 1, got {b.params['n']}")
    if b.kind is BlockKind.LED_EFFECT:
        if b.params["effect"] not in _EFFECT_NAMES:
            raise SchemaError(
                f"{where}: unknown effect {b.params['effect']!r}; "
                f"expected one of {sorted(_EFFECT_NAMES)}"
            )
        if b.params["group"] not in _GROUP_NAMES:
            raise SchemaError(
                f"{where}: unknown group {b.params['group']!r}; "
                f"expected one of {sorted(_GROUP_NAMES)}"
            )
        for ch in ("r", "g", "b"):
            if not 0 <= b.params[ch] <= 255:
                raise SchemaError(f"{where}: channel {ch} out of range 0..255")
    if b.kind in (BlockKind.PROMPT, BlockKind.SET_VAR):
        var = b.params["var"]
        if not _VAR_RE.match(var):
            raise SchemaError(f"{where}: invalid variable name {var!r}")
    if b.kind in (BlockKind.DEFINE, BlockKind.CALL):
        name = b.params["name"]
        if not _VAR_RE.match(name):
            raise SchemaError(f"{where}: invalid function name {name!r}")
