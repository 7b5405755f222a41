"""swarmlab: block-programmed drone swarm simulation and ground station.

Layers, lowest first: geometry (formations, assignment), avoidance
(CPA conflict detection and resolution), sim (kinematic swarm engine,
LED effects, traces, preview, RTF benchmark), blocks (the visual-block
program model, canonical serialization, storage, interpreter) and
station (bus, safe area, wire protocol, HTTP/websocket server).
"""

from . import avoidance, blocks, geometry, sim, station
from .geometry import (
    Formation,
    FormationKind,
    FormationSpec,
    Pose,
    Vec3,
    assign,
    generate,
)
from .avoidance import Trajectory, cpa, detect, resolve
from .blocks.interpreter import Interpreter
from .blocks.model import BlockProgram, Block, RuntimeParams, Status
from .blocks.serialize import parse, serialize
from .blocks.storage import ProgramStore
from .sim.engine import SimConfig, SwarmSim, spawn_swarm
from .sim.preview import live_run, preview_run
from .sim.rtf import bench, measure_rtf
from .sim.trace import Trace
from .station.station import Station

__version__ = "0.1.0"

__all__ = [
    "Block",
    "BlockProgram",
    "Formation",
    "FormationKind",
    "FormationSpec",
    "Interpreter",
    "Pose",
    "ProgramStore",
    "RuntimeParams",
    "SimConfig",
    "Station",
    "Status",
    "SwarmSim",
    "Trace",
    "Trajectory",
    "Vec3",
    "__version__",
    "assign",
    "bench",
    "cpa",
    "detect",
    "generate",
    "live_run",
    "measure_rtf",
    "parse",
    "preview_run",
    "resolve",
    "serialize",
    "spawn_swarm",
    "avoidance",
    "blocks",
    "geometry",
    "sim",
    "station",
]
