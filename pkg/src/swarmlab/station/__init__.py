"""Ground-station layer: message bus, safe area, wire protocol, server."""

from .bus import MessageBus, Subscription, TopicInfo, UnknownTopic
from .messages import (
    PUBLISH_ALLOWLIST,
    ProtocolError,
    decode_client_frame,
    encode_event,
    encode_protocol_error,
    encode_response,
    validate_manual_cmd,
)
from .safearea import SafeArea, SafeAreaGuard
from .server import BindFailure, create_app, serve
from .station import Station, UnknownService

__all__ = [
    "BindFailure",
    "MessageBus",
    "ProtocolError",
    "PUBLISH_ALLOWLIST",
    "SafeArea",
    "SafeAreaGuard",
    "Station",
    "Subscription",
    "TopicInfo",
    "UnknownService",
    "UnknownTopic",
    "create_app",
    "decode_client_frame",
    "encode_event",
    "encode_protocol_error",
    "encode_response",
    "serve",
    "validate_manual_cmd",
]
