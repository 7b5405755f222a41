"""Execution traces: one snapshot of the swarm per simulator tick.

File format is JSON lines (.trace.jsonl). Each line is
{"t": sim_time, "block": block_id | null, "drones": [row...]} where a row
carries exactly {id, x, y, z, yaw, mode, r, g, b, battery}. Keys are
sorted and whitespace-free so identical runs produce identical bytes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

ROW_FIELDS = frozenset({"id", "x", "y", "z", "yaw", "mode", "r", "g", "b", "battery"})


class TraceFormatError(ValueError):
    """A trace document does not match the trace file format."""


@dataclass(frozen=True)
class TraceEntry:
    t: float
    block: Optional[str]
    drones: tuple

    def to_dict(self) -> Dict[str, Any]:
        return {"t": self.t, "block": self.block, "drones": list(self.drones)}


@dataclass
class Trace:
    """An ordered list of per-tick snapshots plus an in-memory error marker.

    The error field records why a run ended early; it is not part of the
    file format.
    """

    entries: List[TraceEntry] = field(default_factory=list)
    error: Optional[str] = None

    def __len__(self) -> int:
        return len(self.entries)

    def append(self, t: float, block: Optional[str], rows: List[Dict[str, Any]]) -> None:
        self.entries.append(TraceEntry(t, block, tuple(rows)))

    def to_jsonl_bytes(self) -> bytes:
        lines = [
            json.dumps(e.to_dict(), sort_keys=True, separators=(",", ":"))
            for e in self.entries
        ]
        return ("\n".join(lines) + "\n").encode("utf-8") if lines else b""

    def save(self, path: Union[str, Path]) -> None:
        Path(path).write_bytes(self.to_jsonl_bytes())

    @staticmethod
    def from_jsonl(data: Union[bytes, str]) -> "Trace":
        if isinstance(data, (bytes, bytearray)):
            data = bytes(data).decode("utf-8")
        trace = Trace()
        for lineno, line in enumerate(data.splitlines(), start=1):
            if not line.strip():
                continue
            try:
                raw = json.loads(line)
            except json.JSONDecodeError as e:
                raise TraceFormatError(f"line {lineno}: not valid JSON: {e}") from e
            if not isinstance(raw, dict) or set(raw) != {"t", "block", "drones"}:
                raise TraceFormatError(f"line {lineno}: expected t/block/drones fields")
            if not isinstance(raw["drones"], list):
                raise TraceFormatError(f"line {lineno}: drones must be a list")
            for row in raw["drones"]:
                if not isinstance(row, dict) or set(row) != ROW_FIELDS:
                    raise TraceFormatError(
                        f"line {lineno}: drone rows carry exactly {sorted(ROW_FIELDS)}"
                    )
            trace.append(raw["t"], raw["block"], raw["drones"])
        return trace

    @staticmethod
    def load(path: Union[str, Path]) -> "Trace":
        return Trace.from_jsonl(Path(path).read_bytes())
