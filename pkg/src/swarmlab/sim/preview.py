"""Program execution drivers: fast preview and real-time local runs.

Both modes share one drive loop (step the interpreter, tick the engine,
record a trace entry), so a preview is tick-for-tick identical to a live
run with the same program, parameters, seed and swarm size. Preview is
wall-clock unconstrained; live mode paces each tick against the wall
clock at a requested real-time factor.
"""

from __future__ import annotations

import time
from collections import deque
from typing import Callable, Iterable, Optional

from ..blocks.interpreter import Interpreter
from ..blocks.model import BlockProgram, RuntimeParams, Status
from .engine import SimConfig, SwarmSim
from .trace import Trace


def _drive(
    program: BlockProgram,
    params: RuntimeParams,
    n: int,
    seed: int,
    config: Optional[SimConfig],
    publish: Optional[Callable[[str, object], None]],
    answers: Iterable[float],
    rtf_target: Optional[float],
) -> Trace:
    sim = SwarmSim(n, config or SimConfig(), seed=seed)
    interp = Interpreter(program, params, sim, publish)
    pending = deque(answers)

    trace = Trace()
    trace.append(sim.sim_time, None, sim.trace_rows())
    wall_start = time.perf_counter()

    while True:
        interp.step()
        if interp.finished:
            break
        if interp.state.status is Status.PROMPTING:
            if pending:
                interp.answer(pending.popleft())
            else:
                interp.inject_error("prompt was not answered (no scripted answer left)")
        sim.tick()
        trace.append(sim.sim_time, interp.state.current_block, sim.trace_rows())
        if rtf_target is not None:
            due = wall_start + sim.sim_time / rtf_target
            delay = due - time.perf_counter()
            if delay > 0.0:
                time.sleep(delay)

    trace.error = interp.state.error_message
    return trace


def preview_run(
    program: BlockProgram,
    params: Optional[RuntimeParams] = None,
    n: int = 1,
    seed: int = 0,
    config: Optional[SimConfig] = None,
    publish: Optional[Callable[[str, object], None]] = None,
    answers: Iterable[float] = (),
) -> Trace:
    """Run a program as fast as possible on a private simulator.

    Args:
        program: the program to execute.
        params: runtime parameters; defaults apply when omitted.
        n: swarm size.
        seed: simulator seed; identical inputs yield identical traces.
        config: simulator config override.
        publish: optional topic sink receiving the running/block/error/prompt
            stream.
        answers: scripted prompt answers, consumed in order. A prompt with
            no scripted answer left ends the run with a runtime error
            recorded as the trace's terminal event.

    Returns:
        The full per-tick Trace; trace.error carries the terminal error
        message when the run did not finish cleanly.
    """
    return _drive(program, params or RuntimeParams(), n, seed, config, publish, answers, None)


def live_run(
    program: BlockProgram,
    params: Optional[RuntimeParams] = None,
    n: int = 1,
    seed: int = 0,
    config: Optional[SimConfig] = None,
    publish: Optional[Callable[[str, object], None]] = None,
    answers: Iterable[float] = (),
    rtf_target: float = 1.0,
) -> Trace:
    """Run a program paced against the wall clock (rtf_target=1 is real time)."""
    if not rtf_target > 0.0:
        raise ValueError(f"rtf_target must be > 0, got {rtf_target}")
    return _drive(
        program, params or RuntimeParams(), n, seed, config, publish, answers, rtf_target
    )
