"""Block programs: model, canonical serialization, storage, interpreter."""

from .interpreter import CONFIRM_VAR, INSTRUCTION_BUDGET, MAX_CALL_DEPTH, Interpreter
from .model import (
    AlreadyRunning,
    Block,
    BlockError,
    BlockKind,
    BlockProgram,
    Condition,
    ExecutionState,
    InvalidName,
    NotFound,
    NotPrompting,
    NotRunning,
    ProgramSyntaxError,
    RuntimeParams,
    SchemaError,
    Status,
    StorageFailure,
    UndefinedVariable,
)
from .serialize import block_to_dict, parse, program_to_dict, serialize
from .storage import NAME_RE, SUFFIX, ProgramStore

__all__ = [
    "CONFIRM_VAR",
    "INSTRUCTION_BUDGET",
    "MAX_CALL_DEPTH",
    "Interpreter",
    "AlreadyRunning",
    "Block",
    "BlockError",
    "BlockKind",
    "BlockProgram",
    "Condition",
    "ExecutionState",
    "InvalidName",
    "NotFound",
    "NotPrompting",
    "NotRunning",
    "ProgramSyntaxError",
    "RuntimeParams",
    "SchemaError",
    "Status",
    "StorageFailure",
    "UndefinedVariable",
    "block_to_dict",
    "parse",
    "program_to_dict",
    "serialize",
    "NAME_RE",
    "SUFFIX",
    "ProgramStore",
]
