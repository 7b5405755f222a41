"""Wire protocol envelope for the station web socket.

Every frame is one JSON object with an "op" plus op-specific fields;
unknown fields are rejected so typos fail loudly instead of silently
doing nothing. Clients send subscribe/unsubscribe/publish/call; the
server sends response/event. See docs/protocol.md for payload schemas.
"""

from __future__ import annotations

import json
from typing import Any, Dict, Optional

CLIENT_OPS = frozenset({"subscribe", "unsubscribe", "publish", "call"})
SERVER_OPS = frozenset({"response", "event"})
_ALL_FIELDS = frozenset({"op", "topic", "service", "id", "ok", "payload"})

# The only topic clients may publish to; everything else is server-owned.
PUBLISH_ALLOWLIST = frozenset({"manual_cmd"})


class ProtocolError(ValueError):
    """The frame is malformed; the session must be closed."""


def decode_client_frame(text: str) -> Dict[str, Any]:
    """Parse and structurally validate one client frame.

    Raises:
        ProtocolError: not JSON, not an object, unknown op or fields,
            or missing op-specific required fields.
    """
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise ProtocolError(f"frame is not valid JSON: {e}") from e
    if not isinstance(raw, dict):
        raise ProtocolError("frame must be a JSON object")

    unknown = set(raw) - _ALL_FIELDS
    if unknown:
        raise ProtocolError(f"unknown frame field(s) {sorted(unknown)}")
    op = raw.get("op")
    if op in SERVER_OPS:
        raise ProtocolError(f"op {op!r} is server-to-client only")
    if op not in CLIENT_OPS:
        raise ProtocolError(f"unknown op {op!r}")

    if op in ("subscribe", "unsubscribe", "publish"):
        topic = raw.get("topic")
        if not isinstance(topic, str) or not topic:
            raise ProtocolError(f"op {op!r} requires a topic string")
        if "service" in raw:
            raise ProtocolError(f"op {op!r} does not take a service field")
    if op == "publish" and "payload" not in raw:
        raise ProtocolError("publish requires a payload")
    if op == "call":
        service = raw.get("service")
        if not isinstance(service, str) or not service:
            raise ProtocolError("call requires a service string")
        if not isinstance(raw.get("id"), str) or not raw["id"]:
            raise ProtocolError("call requires a string correlation id")
        if "topic" in raw:
            raise ProtocolError("call does not take a topic field")
    if "id" in raw and not isinstance(raw["id"], str):
        raise ProtocolError("id must be a string")
    if "ok" in raw:
        raise ProtocolError("ok is a response-only field")
    return raw


def encode_event(topic: str, payload: Any) -> str:
    return json.dumps(
        {"op": "event", "topic": topic, "payload": payload},
        separators=(",", ":"),
        sort_keys=True,
    )


def encode_response(
    correlation_id: Optional[str], ok: bool, payload: Any
) -> str:
    frame: Dict[str, Any] = {"op": "response", "ok": ok, "payload": payload}
    if correlation_id is not None:
        frame["id"] = correlation_id
    return json.dumps(frame, separators=(",", ":"), sort_keys=True)


def encode_protocol_error(reason: str) -> str:
    return encode_event("protocol_error", {"reason": reason})


def validate_manual_cmd(payload: Any) -> Dict[str, float]:
    """Shape-check a manual_cmd publish payload.

    Expected: {"drone": int, "vx": num, "vy": num, "vz": num,
    "yaw_rate": num (optional)}.
    """
    if not isinstance(payload, dict):
        raise ProtocolError("manual_cmd payload must be an object")
    unknown = set(payload) - {"drone", "vx", "vy", "vz", "yaw_rate"}
    if unknown:
        raise ProtocolError(f"unknown manual_cmd field(s) {sorted(unknown)}")
    drone = payload.get("drone")
    if isinstance(drone, bool) or not isinstance(drone, int):
        raise ProtocolError("manual_cmd drone must be an integer id")
    out: Dict[str, float] = {"drone": drone}
    for name in ("vx", "vy", "vz"):
        v = payload.get(name)
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ProtocolError(f"manual_cmd {name} must be a number")
        out[name] = float(v)
    rate = payload.get("yaw_rate", 0.0)
    if isinstance(rate, bool) or not isinstance(rate, (int, float)):
        raise ProtocolError("manual_cmd yaw_rate must be a number")
    out["yaw_rate"] = float(rate)
    return out
