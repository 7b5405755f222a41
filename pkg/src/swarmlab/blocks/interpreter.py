"""Direct AST interpretation of block programs against a simulator.

The interpreter is a coroutine: step() advances execution until it needs a
simulator tick (a wait, a flight leg in progress, a pending prompt), then
returns so the driver can tick the engine. Nothing is compiled and no
dynamic code evaluation exists anywhere; blocks are walked as data.

Topic publications follow a fixed rule the tests mirror with an
independent counting oracle: every block publishes its id on "block" once
before executing, except While, which publishes once per condition
evaluation that passes. "running" carries true exactly once at start and
false exactly once at the terminal status. Every error path publishes
exactly one "error" message before the status becomes Errored.

Cancellation is cooperative and thread-safe: request_stop and answer may
be called from any thread; the running program observes them at block
boundaries and wait ticks, within two simulator ticks.
"""

from __future__ import annotations

import operator
import queue
import threading
from dataclasses import replace
from typing import Callable, Dict, Generator, List, Optional, Sequence, Tuple

from ..avoidance import Unresolvable
from ..geometry import (
    Formation,
    FormationKind,
    FormationSpec,
    InvalidFactor,
    InvalidSpec,
    Pose,
    SizeMismatch,
    Vec3,
    assign,
    generate,
    normalize_yaw,
    rotate,
    scale,
    translate,
)
from ..sim.drone import Mode
from ..sim.engine import InvalidCommand, NotAirborne, SwarmSim, UnknownDrone
from ..sim.leds import Color, EffectKind, EffectSpec, LedGroup
from .model import (
    Block,
    BlockKind,
    BlockProgram,
    Condition,
    ExecutionState,
    NotPrompting,
    RuntimeParams,
    Status,
    UndefinedVariable,
)

# Hard ceiling on zero-time block executions, so a loop that never yields
# (all sim-time-free blocks) cannot hang the driving thread.
INSTRUCTION_BUDGET = 200_000
MAX_CALL_DEPTH = 32

CONFIRM_VAR = "__confirm__"

_OPS: Dict[str, Callable[[float, float], bool]] = {
    "<": operator.lt,
    "<=": operator.le,
    ">": operator.gt,
    ">=": operator.ge,
    "==": operator.eq,
    "!=": operator.ne,
}


class _StopRequested(Exception):
    pass


class _Abort(Exception):
    def __init__(self, message: str, block_id: Optional[str]):
        super().__init__(message)
        self.message = message
        self.block_id = block_id


class Interpreter:
    """One execution of one program against one simulator.

    The caller drives it: repeatedly call step(), then tick the simulator,
    until finished. The runtime tolerances are pushed into the simulator
    config at construction so engine mode transitions and block completion
    agree on what "arrived" means.

    Args:
        program: a valid BlockProgram (validated again here).
        params: runtime tolerances and confirmation/timeout settings.
        sim: the simulator to command.
        publish: callable(topic, payload) for the running/block/error/prompt
            topics; defaults to a no-op.
    """

    def __init__(
        self,
        program: BlockProgram,
        params: RuntimeParams,
        sim: SwarmSim,
        publish: Optional[Callable[[str, object], None]] = None,
    ):
        program.validate()
        self.program = program
        self.params = params
        self.sim = sim
        self._publish = publish or (lambda topic, payload: None)
        self.state = ExecutionState()
        self._defines = program.defines()
        self._stop_event = threading.Event()
        self._answers: "queue.Queue[float]" = queue.Queue()
        self._inject_lock = threading.Lock()
        self._injected: Optional[str] = None
        self._gen: Optional[Generator[None, None, None]] = None
        self._budget = INSTRUCTION_BUDGET
        self._block_stack: List[str] = []
        self._call_stack: List[str] = []

        sim.config = replace(
            sim.config,
            nav_tolerance=params.nav_tolerance,
            yaw_tolerance=params.yaw_tolerance,
        )

    # ------------------------------------------------------------------
    # External control (thread-safe)

    @property
    def finished(self) -> bool:
        return self.state.status in (Status.DONE, Status.ERRORED)

    def request_stop(self) -> None:
        """Ask the program to stop; observed within two ticks. Idempotent."""
        if self.state.status in (Status.RUNNING, Status.PROMPTING):
            self.state.status = Status.STOPPING
        self._stop_event.set()

    def answer(self, value: float) -> None:
        """Deliver a prompt answer.

        Raises:
            NotPrompting: no prompt is pending.
            ValueError: the value is not a number.
        """
        if self.state.status is not Status.PROMPTING:
            raise NotPrompting("no prompt is pending")
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ValueError(f"prompt answers are numbers, got {value!r}")
        self._answers.put(float(value))

    def inject_error(self, message: str) -> None:
        """Abort the run with a runtime error at the next checkpoint."""
        with self._inject_lock:
            self._injected = message

    # ------------------------------------------------------------------
    # Driving

    def step(self) -> None:
        """Advance until the program needs a simulator tick or finishes."""
        if self.finished:
            return
        if self._gen is None:
            self._gen = self._main()
        try:
            next(self._gen)
        except StopIteration:
            pass

    def _main(self) -> Generator[None, None, None]:
        self.state.status = Status.RUNNING
        self._publish("running", True)
        outcome_error: Optional[_Abort] = None
        stopped = False
        try:
            if self.params.confirm_before_run:
                answer = yield from self._ask(None, CONFIRM_VAR, "confirm program start")
                if answer == 0.0:
                    stopped = True
            if not stopped:
                yield from self._exec_seq(self.program.blocks)
        except _StopRequested:
            stopped = True
        except _Abort as e:
            outcome_error = e

        if outcome_error is not None:
            self._publish(
                "error",
                {"message": outcome_error.message, "block": outcome_error.block_id},
            )
            self.state.error_message = outcome_error.message
            self.state.status = Status.ERRORED
            self.sim.command_hover_all()
        else:
            if stopped:
                self.sim.command_hover_all()
            self.state.status = Status.DONE
        self.state.current_block = None
        self._block_stack.clear()
        self._publish("running", False)

    # ------------------------------------------------------------------
    # Execution machinery

    def _checkpoint(self) -> None:
        with self._inject_lock:
            injected, self._injected = self._injected, None
        if injected is not None:
            raise _Abort(injected, self.state.current_block)
        if self._stop_event.is_set():
            raise _StopRequested()

    def _spend(self) -> None:
        self._budget -= 1
        if self._budget <= 0:
            raise _Abort(
                f"instruction budget of {INSTRUCTION_BUDGET} exceeded; "
                "the program loops without making progress",
                self.state.current_block,
            )

    def _enter(self, block: Block) -> None:
        self._block_stack.append(block.id)
        self.state.current_block = block.id
        self._publish("block", block.id)

    def _exit(self) -> None:
        self._block_stack.pop()
        self.state.current_block = self._block_stack[-1] if self._block_stack else None

    def _exec_seq(self, blocks: Sequence[Block]) -> Generator[None, None, None]:
        for block in blocks:
            yield from self._exec_block(block)

    def _exec_block(self, block: Block) -> Generator[None, None, None]:
        self._checkpoint()
        self._spend()
        if block.kind is BlockKind.WHILE:
            yield from self._exec_while(block)
            return
        self._enter(block)
        try:
            yield from self._dispatch(block)
        finally:
            self._exit()

    def _exec_while(self, block: Block) -> Generator[None, None, None]:
        while True:
            self._checkpoint()
            self._spend()
            if not self._eval_cond(block, block.params["cond"]):
                return
            self._enter(block)
            try:
                yield from self._exec_seq(block.child_seq("body"))
            finally:
                self._exit()

    def _dispatch(self, block: Block) -> Generator[None, None, None]:
        kind = block.kind
        if kind is BlockKind.WAIT:
            yield from self._op_wait(block)
        elif kind is BlockKind.TAKEOFF_ALL:
            yield from self._op_takeoff(block)
        elif kind is BlockKind.LAND_ALL:
            yield from self._op_land(block)
        elif kind is BlockKind.NAVIGATE:
            yield from self._op_navigate(block)
        elif kind is BlockKind.APPLY_FORMATION:
            yield from self._op_formation(block)
        elif kind in (BlockKind.TRANSLATE, BlockKind.ROTATE, BlockKind.SCALE):
            yield from self._op_transform(block)
        elif kind is BlockKind.LED_EFFECT:
            self._op_led(block)
        elif kind is BlockKind.REPEAT:
            count = block.params["count"]
            for _ in range(count):
                self._checkpoint()
                self._spend()
                yield from self._exec_seq(block.child_seq("body"))
        elif kind is BlockKind.IF:
            branch = "body" if self._eval_cond(block, block.params["cond"]) else "else"
            yield from self._exec_seq(block.child_seq(branch))
        elif kind is BlockKind.DEFINE:
            pass
        elif kind is BlockKind.CALL:
            yield from self._op_call(block)
        elif kind is BlockKind.PROMPT:
            yield from self._ask(block, block.params["var"], block.params["message"])
        elif kind is BlockKind.SET_VAR:
            self._op_set_var(block)

    # ------------------------------------------------------------------
    # Values and conditions

    def _num(self, block: Block, name: str) -> float:
        value = block.params[name]
        if isinstance(value, str):
            if value not in self.state.variables:
                raise _Abort(
                    f"undefined variable {value!r} in param {name!r}", block.id
                )
            return float(self.state.variables[value])
        return float(value)

    def _operand(self, block: Block, value) -> float:
        if isinstance(value, str):
            if value not in self.state.variables:
                raise _Abort(f"undefined variable {value!r} in condition", block.id)
            return float(self.state.variables[value])
        return float(value)

    def _eval_cond(self, block: Block, cond: Condition) -> bool:
        lhs = self._operand(block, cond.lhs)
        rhs = self._operand(block, cond.rhs)
        return _OPS[cond.op](lhs, rhs)

    def _op_set_var(self, block: Block) -> None:
        name = block.params["var"]
        value = self._num(block, "value")
        if block.params.get("add", False):
            if name not in self.state.variables:
                raise _Abort(f"undefined variable {name!r} in SetVar add", block.id)
            self.state.variables[name] = float(self.state.variables[name]) + value
        else:
            self.state.variables[name] = value

    # ------------------------------------------------------------------
    # Prompting

    def _ask(
        self, block: Optional[Block], var: str, message: str
    ) -> Generator[None, None, float]:
        block_id = block.id if block is not None else None
        self.state.status = Status.PROMPTING
        self._publish("prompt", {"block": block_id, "var": var, "message": message})
        while True:
            self._checkpoint()
            try:
                value = self._answers.get_nowait()
                break
            except queue.Empty:
                yield
        self.state.status = Status.RUNNING
        self.state.variables[var] = value
        return value

    # ------------------------------------------------------------------
    # Swarm operations

    def _await(
        self, block: Block, done: Callable[[], bool]
    ) -> Generator[None, None, None]:
        start = self.sim.sim_time
        while not done():
            self._checkpoint()
            if self.sim.sim_time - start > self.params.block_timeout:
                raise _Abort(
                    f"block timed out after {self.params.block_timeout} s of sim time",
                    block.id,
                )
            yield

    def _command(self, block: Block, fn: Callable[[], object]) -> object:
        try:
            return fn()
        except (
            UnknownDrone,
            NotAirborne,
            InvalidCommand,
            Unresolvable,
            InvalidSpec,
            InvalidFactor,
            SizeMismatch,
            ValueError,
        ) as e:
            raise _Abort(str(e), block.id) from e

    def _op_wait(self, block: Block) -> Generator[None, None, None]:
        seconds = self._num(block, "seconds")
        if seconds < 0.0:
            raise _Abort(f"wait duration must be >= 0, got {seconds}", block.id)
        deadline = self.sim.sim_time + seconds
        while self.sim.sim_time < deadline - 1e-12:
            self._checkpoint()
            yield

    def _op_takeoff(self, block: Block) -> Generator[None, None, None]:
        z = self._num(block, "z")
        ids = self._command(block, lambda: self.sim.command_takeoff_all(z))
        tol = self.params.nav_tolerance

        def done() -> bool:
            return all(
                abs(self.sim.drones[i].pose.position.z - z) <= tol for i in ids
            )

        yield from self._await(block, done)

    def _op_land(self, block: Block) -> Generator[None, None, None]:
        self._command(block, self.sim.command_land_all)

        def done() -> bool:
            return all(d.mode is Mode.LANDED for d in self.sim.drones)

        yield from self._await(block, done)

    def _op_navigate(self, block: Block) -> Generator[None, None, None]:
        drone = block.params["drone"]
        x = self._num(block, "x")
        y = self._num(block, "y")
        z = self._num(block, "z")
        speed = self._num(block, "speed")
        goal = Vec3(x, y, z)
        ids, _ = self._command(
            block, lambda: self.sim.command_navigate(drone, x, y, z, speed)
        )
        tol = self.params.nav_tolerance

        def done() -> bool:
            return all(
                self.sim.drones[i].pose.position.distance_to(goal) <= tol for i in ids
            )

        yield from self._await(block, done)

    def _steerable_drones(self, block: Block):
        drones = [
            d for d in self.sim.drones if d.mode in (Mode.HOVERING, Mode.NAVIGATING)
        ]
        if not drones:
            raise _Abort("no airborne drones to command", block.id)
        return drones

    def _transition(
        self, block: Block, targets: List[Tuple[int, Pose]]
    ) -> Generator[None, None, None]:
        resolved = self._command(block, lambda: self.sim.set_targets(targets))
        tol = self.params.nav_tolerance
        yaw_tol = self.params.yaw_tolerance

        def done() -> bool:
            for drone_id, goal, _delay in resolved:
                d = self.sim.drones[drone_id]
                if d.pose.position.distance_to(goal.position) > tol:
                    return False
                if abs(normalize_yaw(d.pose.yaw - goal.yaw)) > yaw_tol:
                    return False
            return True

        yield from self._await(block, done)

    def _op_formation(self, block: Block) -> Generator[None, None, None]:
        kind = FormationKind(block.params["kind"])
        n = block.params["n"]
        size = self._num(block, "size")
        height = self._num(block, "height") if "height" in block.params else 0.0
        altitude = self._num(block, "altitude")
        spec = FormationSpec(
            kind=kind, n=n, size_param=size, height=height, altitude=altitude
        )
        formation = self._command(block, lambda: generate(spec))

        drones = self._steerable_drones(block)
        if len(drones) != n:
            raise _Abort(
                f"formation wants {n} drones but {len(drones)} are airborne", block.id
            )
        current = [d.pose.position for d in drones]
        matching = self._command(block, lambda: assign(current, formation))
        targets = [
            (d.id, formation.slots[matching.slot_of[i]]) for i, d in enumerate(drones)
        ]
        yield from self._transition(block, targets)

    def _op_transform(self, block: Block) -> Generator[None, None, None]:
        drones = self._steerable_drones(block)
        formation = Formation(tuple(d.pose for d in drones))
        if block.kind is BlockKind.TRANSLATE:
            shift = Vec3(
                self._num(block, "dx"), self._num(block, "dy"), self._num(block, "dz")
            )
            moved = self._command(block, lambda: translate(formation, shift))
        elif block.kind is BlockKind.ROTATE:
            angle = self._num(block, "angle")
            moved = self._command(block, lambda: rotate(formation, angle))
        else:
            factor = self._num(block, "factor")
            moved = self._command(block, lambda: scale(formation, factor))
        targets = [(d.id, moved.slots[i]) for i, d in enumerate(drones)]
        yield from self._transition(block, targets)

    def _op_led(self, block: Block) -> None:
        rate = self._num(block, "rate")
        spec = self._command(
            block,
            lambda: EffectSpec(
                EffectKind(block.params["effect"]),
                LedGroup(block.params["group"]),
                Color(block.params["r"], block.params["g"], block.params["b"]),
                rate,
            ),
        )
        self.sim.command_led(spec)

    def _op_call(self, block: Block) -> Generator[None, None, None]:
        name = block.params["name"]
        if name in self._call_stack:
            raise _Abort(f"recursive call to {name!r}", block.id)
        if len(self._call_stack) >= MAX_CALL_DEPTH:
            raise _Abort(f"call depth limit of {MAX_CALL_DEPTH} exceeded", block.id)
        define = self._defines[name]
        self._call_stack.append(name)
        try:
            yield from self._exec_seq(define.child_seq("body"))
        finally:
            self._call_stack.pop()
