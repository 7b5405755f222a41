"""Kinematic swarm simulator: engine, LED effects, traces, RTF tooling.

The preview/live drivers live in swarmlab.sim.preview; they are not
re-exported here because they sit above the block interpreter in the
layering.
"""

from .drone import ALLOWED_TRANSITIONS, DroneState, Mode
from .engine import (
    MAX_SWARM_SIZE,
    Event,
    InvalidCommand,
    InvalidCount,
    NotAirborne,
    SimConfig,
    SwarmSim,
    UnknownDrone,
    spawn_swarm,
)
from .leds import (
    OFF,
    Color,
    EffectKind,
    EffectSpec,
    LedGroup,
    group_members,
    hue_color,
    led_frame,
)
from .rtf import BenchRow, RtfSample, bench, measure_rtf
from .trace import Trace, TraceEntry, TraceFormatError

__all__ = [
    "ALLOWED_TRANSITIONS",
    "DroneState",
    "Mode",
    "MAX_SWARM_SIZE",
    "Event",
    "InvalidCommand",
    "InvalidCount",
    "NotAirborne",
    "SimConfig",
    "SwarmSim",
    "UnknownDrone",
    "spawn_swarm",
    "OFF",
    "Color",
    "EffectKind",
    "EffectSpec",
    "LedGroup",
    "group_members",
    "hue_color",
    "led_frame",
    "BenchRow",
    "RtfSample",
    "bench",
    "measure_rtf",
    "Trace",
    "TraceEntry",
    "TraceFormatError",
]
