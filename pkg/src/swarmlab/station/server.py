"""HTTP and websocket front end for a running station.

The app exposes program storage over plain HTTP, run traces as JSONL,
and a single websocket endpoint speaking the framed protocol from
messages.py. Bus callbacks arrive on the station thread; each session
bridges them onto its event loop through call_soon_threadsafe and a
per-session outbound queue, so one slow client never blocks another.
"""

from __future__ import annotations

import asyncio
import json
import os
import socket
from pathlib import Path
from typing import Any, Dict, Optional

from fastapi import FastAPI, Request, WebSocket, WebSocketDisconnect
from fastapi.responses import HTMLResponse, JSONResponse, PlainTextResponse, Response
from fastapi.staticfiles import StaticFiles

from ..blocks.model import (
    AlreadyRunning,
    InvalidName,
    NotFound,
    NotPrompting,
    NotRunning,
    ProgramSyntaxError,
    SchemaError,
    StorageFailure,
)
from ..blocks.serialize import parse, serialize
from ..sim.engine import SimConfig
from .messages import (
    PUBLISH_ALLOWLIST,
    ProtocolError,
    decode_client_frame,
    encode_event,
    encode_protocol_error,
    encode_response,
    validate_manual_cmd,
)
from .station import Station, UnknownService

CALL_TIMEOUT = 10.0

_STATUS = {
    InvalidName: 400,
    SchemaError: 400,
    ProgramSyntaxError: 400,
    ValueError: 400,
    NotFound: 404,
    UnknownService: 404,
    AlreadyRunning: 409,
    NotRunning: 409,
    NotPrompting: 409,
    StorageFailure: 500,
}

_PLACEHOLDER = """<!DOCTYPE html>
<html><head><title>swarmlab station</title></head>
<body><h1>swarmlab station</h1>
<p>No UI build found. The API lives under /api and the websocket at /ws.</p>
</body></html>
"""


class BindFailure(OSError):
    """The requested port could not be bound."""


def _error_response(exc: Exception) -> JSONResponse:
    status = 500
    for klass, code in _STATUS.items():
        if isinstance(exc, klass):
            status = code
            break
    return JSONResponse(
        {"error": type(exc).__name__, "message": str(exc)}, status_code=status
    )


def default_ui_dir() -> Optional[Path]:
    """Locate the built front end, if any.

    SWARMLAB_UI_DIR overrides; otherwise we look for frontend/dist next
    to the package checkout.
    """
    env = os.environ.get("SWARMLAB_UI_DIR")
    if env:
        p = Path(env)
        return p if p.is_dir() else None
    p = Path(__file__).resolve().parents[3] / "frontend" / "dist"
    return p if p.is_dir() else None


def create_app(station: Station, ui_dir: Optional[Path] = None) -> FastAPI:
    app = FastAPI(title="swarmlab station", docs_url=None, redoc_url=None, openapi_url=None)

    @app.get("/healthz")
    async def healthz() -> JSONResponse:
        return JSONResponse({"ok": True})

    @app.get("/api/programs")
    async def list_programs() -> JSONResponse:
        try:
            result = await _call(station, "list_programs", {})
        except Exception as e:
            return _error_response(e)
        return JSONResponse(result)

    @app.get("/api/programs/{name}")
    async def get_program(name: str) -> Response:
        try:
            data = station.store.read_bytes(name)
        except Exception as e:
            return _error_response(e)
        return Response(content=data, media_type="application/json")

    @app.put("/api/programs/{name}")
    async def put_program(name: str, request: Request) -> Response:
        body = await request.body()
        try:
            program = parse(body)
            await _call(station, "store", {"name": name, "program": json.loads(serialize(program))})
        except Exception as e:
            return _error_response(e)
        return JSONResponse({"ok": True, "name": name})

    @app.get("/api/trace/{run_id}")
    async def get_trace(run_id: str) -> Response:
        trace = station.get_trace(run_id)
        if trace is None:
            return _error_response(NotFound(f"no trace for {run_id!r}"))
        return PlainTextResponse(
            trace.to_jsonl_bytes(), media_type="application/x-ndjson"
        )

    @app.websocket("/ws")
    async def ws_endpoint(ws: WebSocket) -> None:
        await _ws_session(station, ws)

    if ui_dir is not None and ui_dir.is_dir():
        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")
    else:
        @app.get("/")
        async def index() -> HTMLResponse:
            return HTMLResponse(_PLACEHOLDER)

    return app


async def _call(station: Station, service: str, payload: Dict[str, Any]) -> Any:
    fut = station.call_async(service, payload)
    return await asyncio.wait_for(asyncio.wrap_future(fut), timeout=CALL_TIMEOUT)


async def _ws_session(station: Station, ws: WebSocket) -> None:
    await ws.accept()
    loop = asyncio.get_running_loop()
    outbound: "asyncio.Queue[str]" = asyncio.Queue()
    subs: Dict[str, Any] = {}

    def fan_out(topic: str):
        def cb(payload: Any) -> None:
            loop.call_soon_threadsafe(outbound.put_nowait, encode_event(topic, payload))

        return cb

    async def sender() -> None:
        while True:
            frame = await outbound.get()
            await ws.send_text(frame)
            outbound.task_done()

    send_task = asyncio.create_task(sender())

    async def handle(msg: Dict[str, Any]) -> None:
        op = msg["op"]
        mid = msg.get("id")
        if op == "subscribe":
            topic = msg["topic"]
            if not station.bus.has_topic(topic):
                outbound.put_nowait(encode_response(
                    mid, False,
                    {"error": "UnknownTopic", "message": f"no topic named {topic!r}"},
                ))
                return
            if topic not in subs:
                subs[topic] = station.bus.subscribe(topic, fan_out(topic))
            if mid is not None:
                outbound.put_nowait(encode_response(mid, True, {"topic": topic}))
        elif op == "unsubscribe":
            sub = subs.pop(msg["topic"], None)
            if sub is not None:
                station.bus.unsubscribe(sub)
            if mid is not None:
                outbound.put_nowait(encode_response(mid, True, {"topic": msg["topic"]}))
        elif op == "publish":
            topic = msg["topic"]
            if topic not in PUBLISH_ALLOWLIST:
                outbound.put_nowait(encode_response(
                    mid, False,
                    {"error": "NotAllowed",
                     "message": f"clients may not publish on {topic!r}"},
                ))
                return
            payload = validate_manual_cmd(msg["payload"])
            station.bus.publish(topic, payload)
            if mid is not None:
                outbound.put_nowait(encode_response(mid, True, {"topic": topic}))
        elif op == "call":
            try:
                result = await _call(station, msg["service"], msg.get("payload") or {})
            except asyncio.TimeoutError:
                outbound.put_nowait(encode_response(
                    mid, False,
                    {"error": "Timeout", "message": "service call timed out"},
                ))
            except Exception as e:
                outbound.put_nowait(encode_response(
                    mid, False, {"error": type(e).__name__, "message": str(e)}
                ))
            else:
                outbound.put_nowait(encode_response(mid, True, result))

    try:
        while True:
            text = await ws.receive_text()
            try:
                msg = decode_client_frame(text)
                await handle(msg)
            except ProtocolError as e:
                outbound.put_nowait(encode_protocol_error(str(e)))
                try:
                    await asyncio.wait_for(outbound.join(), timeout=1.0)
                except asyncio.TimeoutError:
                    pass
                break
    except WebSocketDisconnect:
        pass
    finally:
        send_task.cancel()
        try:
            await send_task
        except (asyncio.CancelledError, Exception):
            pass
        for sub in subs.values():
            station.bus.unsubscribe(sub)
        try:
            await ws.close()
        except Exception:
            pass


def check_port_free(host: str, port: int) -> None:
    """Raise BindFailure if the port cannot be bound right now."""
    sock = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    try:
        sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        sock.bind((host, port))
    except OSError as e:
        raise BindFailure(f"cannot bind {host}:{port}: {e}") from e
    finally:
        sock.close()


def serve(
    host: str = "127.0.0.1",
    port: int = 8000,
    n_drones: int = 4,
    dt_ms: int = 50,
    program_dir: str = "programs",
    ui_dir: Optional[Path] = None,
) -> None:
    """Run a station and its web server until interrupted.

    Raises BindFailure before starting anything if the port is taken.
    """
    import uvicorn

    if not (isinstance(dt_ms, int) and dt_ms > 0):
        raise ValueError(f"dt_ms must be a positive integer, got {dt_ms!r}")
    check_port_free(host, port)
    station = Station(
        n_drones, SimConfig(tick_dt=dt_ms / 1000.0), program_dir, rtf_target=1.0
    )
    station.start()
    app = create_app(station, ui_dir if ui_dir is not None else default_ui_dir())
    try:
        uvicorn.run(app, host=host, port=port, log_level="warning")
    finally:
        station.shutdown(land=True)
