"""The station: one simulator, one bus, one program at a time.

All mutation funnels through an inbox drained between ticks on the
station's own thread, so concurrent sessions never race the tick loop.
Service calls return futures resolved with the handler's result (or its
exception) the next time the loop runs.

The loop each iteration: drain the inbox, step the interpreter, apply a
deferred land-all once the program has unwound, tick the simulator,
enforce the safe area, publish telemetry, record the active run's trace,
then (optionally) pace against the wall clock.
"""

from __future__ import annotations

import json
import threading
import time
from collections import OrderedDict
from concurrent.futures import Future
from dataclasses import asdict, replace
from queue import Empty, Queue
from typing import Any, Callable, Dict, Optional, Union

from ..blocks.interpreter import Interpreter
from ..blocks.model import AlreadyRunning, NotPrompting, NotRunning, RuntimeParams
from ..blocks.serialize import parse
from ..blocks.storage import ProgramStore
from ..geometry import Vec3
from ..sim.engine import SimConfig, SwarmSim
from ..sim.trace import Trace
from .bus import MessageBus
from .safearea import SafeArea, SafeAreaGuard

MAX_KEPT_TRACES = 8

TOPIC_KINDS = {
    "running": "bool",
    "block": "block_id",
    "error": "error",
    "prompt": "prompt",
    "telemetry": "telemetry",
    "safe_area_violation": "violation",
    "manual_cmd": "velocity",
}


class UnknownService(KeyError):
    """A call referenced a service outside the registry."""

    def __str__(self) -> str:
        # KeyError.__str__ reprs the argument; keep the plain message.
        return self.args[0] if self.args else "unknown service"


class Station:
    """Owns the simulator, the bus, program storage and the run lifecycle.

    Args:
        n_drones: initial swarm size.
        config: simulator config; tick_dt sets the loop rate.
        program_dir: directory for stored .sib.json programs.
        rtf_target: None runs the loop as fast as possible (tests);
            1.0 paces it to real time (serving).
        seed: simulator seed.
        params: default runtime parameters for runs.
    """

    def __init__(
        self,
        n_drones: int = 4,
        config: Optional[SimConfig] = None,
        program_dir: Union[str, "Path"] = "programs",
        rtf_target: Optional[float] = None,
        seed: int = 0,
        params: Optional[RuntimeParams] = None,
    ):
        self.sim = SwarmSim(n_drones, config or SimConfig(), seed=seed)
        self.bus = MessageBus(clock=lambda: self.sim.sim_time)
        for topic, kind in TOPIC_KINDS.items():
            self.bus.register_topic(topic, kind)
        self.store = ProgramStore(program_dir)
        self.guard = SafeAreaGuard()
        self.params = params or RuntimeParams()
        self.rtf_target = rtf_target

        self._inbox: "Queue[Callable[[], None]]" = Queue()
        self._interp: Optional[Interpreter] = None
        self._run_id: Optional[str] = None
        self._run_counter = 0
        self._traces: "OrderedDict[str, Trace]" = OrderedDict()
        self._pending_land = False
        self._shutdown = threading.Event()
        self._thread: Optional[threading.Thread] = None

        self.bus.subscribe("manual_cmd", self._on_manual_cmd)

        self._services: Dict[str, Callable[[Dict[str, Any]], Any]] = {
            "run": self._svc_run,
            "stop": self._svc_stop,
            "store": self._svc_store,
            "load": self._svc_load,
            "list_programs": self._svc_list_programs,
            "land_all": self._svc_land_all,
            "set_safe_area": self._svc_set_safe_area,
            "get_safe_area": self._svc_get_safe_area,
            "list_topics": self._svc_list_topics,
            "spawn": self._svc_spawn,
            "answer_prompt": self._svc_answer_prompt,
            "set_params": self._svc_set_params,
        }

    # ------------------------------------------------------------------
    # Calls from any thread

    def service_names(self) -> list:
        return sorted(self._services)

    def call_async(self, service: str, payload: Optional[Dict[str, Any]] = None) -> Future:
        """Queue a service call; the future resolves after the next drain."""
        fut: Future = Future()
        handler = self._services.get(service)
        if handler is None:
            fut.set_exception(UnknownService(f"unknown service {service!r}"))
            return fut
        body = payload if payload is not None else {}

        def job() -> None:
            try:
                fut.set_result(handler(body))
            except Exception as e:
                fut.set_exception(e)

        self._inbox.put(job)
        return fut

    def call(self, service: str, payload: Optional[Dict[str, Any]] = None,
             timeout: float = 10.0) -> Any:
        """Blocking convenience wrapper around call_async.

        Only valid while the loop is being driven (thread or manual
        step_once calls from another thread).
        """
        return self.call_async(service, payload).result(timeout)

    def get_trace(self, run_id: str) -> Optional[Trace]:
        return self._traces.get(run_id)

    @property
    def active_run_id(self) -> Optional[str]:
        return self._run_id if self._interp is not None else None

    # ------------------------------------------------------------------
    # Loop

    def step_once(self) -> None:
        """One loop iteration without pacing. Tests drive this directly."""
        while True:
            try:
                job = self._inbox.get_nowait()
            except Empty:
                break
            job()

        if self._interp is not None:
            self._interp.step()
            if self._interp.finished:
                self._finish_run()
        if self._pending_land and self._interp is None:
            self.sim.command_land_all()
            self._pending_land = False

        self.sim.tick()
        for violation in self.guard.check(self.sim):
            self.bus.publish("safe_area_violation", violation)
        if self.sim.telemetry_due:
            self.bus.publish(
                "telemetry", {"t": self.sim.sim_time, "drones": self.sim.telemetry_rows()}
            )
        if self._interp is not None and self._run_id is not None:
            trace = self._traces[self._run_id]
            trace.append(
                self.sim.sim_time, self._interp.state.current_block, self.sim.trace_rows()
            )

    def _finish_run(self) -> None:
        if self._run_id is not None and self._run_id in self._traces:
            self._traces[self._run_id].error = self._interp.state.error_message
        self._interp = None

    def _run_loop(self) -> None:
        wall_start = time.perf_counter()
        sim_start = self.sim.sim_time
        while not self._shutdown.is_set():
            self.step_once()
            if self.rtf_target is not None:
                due = wall_start + (self.sim.sim_time - sim_start) / self.rtf_target
                delay = due - time.perf_counter()
                if delay > 0.0:
                    time.sleep(delay)

    def start(self) -> None:
        if self._thread is not None and self._thread.is_alive():
            return
        self._shutdown.clear()
        self._thread = threading.Thread(target=self._run_loop, name="station-loop", daemon=True)
        self._thread.start()

    def shutdown(self, land: bool = True, timeout: float = 30.0) -> None:
        """Stop the loop; by default lands every drone first."""
        if self._thread is not None and self._thread.is_alive() and land:
            try:
                self.call("land_all", timeout=5.0)
                deadline = time.monotonic() + timeout
                while not self.sim.all_landed() and time.monotonic() < deadline:
                    time.sleep(0.01)
            except Exception:
                pass
        self._shutdown.set()
        if self._thread is not None:
            self._thread.join(timeout=5.0)
            self._thread = None

    # ------------------------------------------------------------------
    # Manual control

    def _on_manual_cmd(self, payload: Dict[str, Any]) -> None:
        def job() -> None:
            try:
                self.sim.command_manual_velocity(
                    int(payload["drone"]),
                    Vec3(
                        float(payload.get("vx", 0.0)),
                        float(payload.get("vy", 0.0)),
                        float(payload.get("vz", 0.0)),
                    ),
                    float(payload.get("yaw_rate", 0.0)),
                )
            except Exception as e:
                self.bus.publish("error", {"message": f"manual_cmd: {e}", "block": None})

        self._inbox.put(job)

    # ------------------------------------------------------------------
    # Services (all run on the loop thread)

    def _svc_run(self, payload: Dict[str, Any]) -> Dict[str, Any]:
        if self._interp is not None:
            raise AlreadyRunning(f"run {self._run_id} is still active")
        params = self.params
        overrides = payload.get("params")
        if overrides is not None:
            if not isinstance(overrides, dict):
                raise ValueError("params must be an object")
            params = replace(params, **overrides)
        if "name" in payload:
            program = self.store.load(payload["name"])
        elif "program" in payload:
            program = parse(json.dumps(payload["program"]))
        else:
            raise ValueError("run needs a stored program name or an inline program")

        self._run_counter += 1
        run_id = f"run-{self._run_counter:03d}"
        self._interp = Interpreter(program, params, self.sim, self.bus.publish)
        self._run_id = run_id
        trace = Trace()
        trace.append(self.sim.sim_time, None, self.sim.trace_rows())
        self._traces[run_id] = trace
        while len(self._traces) > MAX_KEPT_TRACES:
            self._traces.popitem(last=False)
        return {"run_id": run_id}

    def _svc_stop(self, payload: Dict[str, Any]) -> Dict[str, Any]:
        if self._interp is None or self._interp.finished:
            raise NotRunning("no program is running")
        self._interp.request_stop()
        return {"stopping": True}

    def _svc_store(self, payload: Dict[str, Any]) -> Dict[str, Any]:
        if "name" not in payload or "program" not in payload:
            raise ValueError("store needs name and program")
        program = parse(json.dumps(payload["program"]))
        return {"name": self.store.store(payload["name"], program)}

    def _svc_load(self, payload: Dict[str, Any]) -> Dict[str, Any]:
        if "name" not in payload:
            raise ValueError("load needs a name")
        data = self.store.read_bytes(payload["name"])
        return {"name": payload["name"], "program": json.loads(data)}

    def _svc_list_programs(self, payload: Dict[str, Any]) -> Dict[str, Any]:
        return {"programs": self.store.list_names()}

    def _svc_land_all(self, payload: Dict[str, Any]) -> Dict[str, Any]:
        if self._interp is not None and not self._interp.finished:
            self._interp.request_stop()
            self._pending_land = True
        else:
            self.sim.command_land_all()
        return {"landing": True}

    def _svc_set_safe_area(self, payload: Dict[str, Any]) -> Dict[str, Any]:
        area = SafeArea.from_dict(payload)
        self.guard.set_area(area)
        return area.to_dict()

    def _svc_get_safe_area(self, payload: Dict[str, Any]) -> Dict[str, Any]:
        return self.guard.area.to_dict()

    def _svc_list_topics(self, payload: Dict[str, Any]) -> Dict[str, Any]:
        return {"topics": [asdict(t) for t in self.bus.topics()]}

    def _svc_spawn(self, payload: Dict[str, Any]) -> Dict[str, Any]:
        if self._interp is not None:
            raise AlreadyRunning("cannot respawn while a program is running")
        n = payload.get("n")
        if isinstance(n, bool) or not isinstance(n, int):
            raise ValueError("spawn needs an integer n")
        self.sim.respawn(n)
        self.guard.reset_episodes()
        return {"n": n}

    def _svc_answer_prompt(self, payload: Dict[str, Any]) -> Dict[str, Any]:
        if self._interp is None:
            raise NotPrompting("no program is running")
        value = payload.get("value")
        self._interp.answer(value)
        return {"answered": True}

    def _svc_set_params(self, payload: Dict[str, Any]) -> Dict[str, Any]:
        fields = dict(payload)
        d_safe = fields.pop("d_safe", None)
        if fields:
            self.params = replace(self.params, **fields)
        if d_safe is not None:
            if not (isinstance(d_safe, (int, float)) and d_safe > 0):
                raise ValueError(f"d_safe must be > 0, got {d_safe!r}")
            self.sim.config = replace(self.sim.config, d_safe=float(d_safe))
        out = asdict(self.params)
        out["d_safe"] = self.sim.config.d_safe
        return out
