"""Real-time factor measurement and the scaling benchmark.

RTF is simulated seconds per wall-clock second; 1.0 means the simulation
keeps up with real time exactly. measure_rtf runs a standard workload
(take off, then every drone orbits waypoints around its spawn point) with
the loop unpaced, so the sample reflects raw compute cost. Per-tick work
grows with the swarm, which is what the benchmark is meant to expose.
"""

from __future__ import annotations

import math
import statistics
import time
from dataclasses import dataclass
from typing import List, Optional, Sequence

from .drone import Mode
from .engine import SimConfig, SwarmSim

ORBIT_RADIUS = 2.0
ORBIT_POINTS = 8
ORBIT_ALTITUDE = 1.0


@dataclass(frozen=True)
class RtfSample:
    """One RTF measurement over a window."""

    window_wall: float
    window_sim: float
    rtf: float

    def __post_init__(self) -> None:
        if not self.window_wall > 0.0:
            raise ValueError(f"window_wall must be > 0, got {self.window_wall}")
        if self.rtf < 0.0:
            raise ValueError(f"rtf must be >= 0, got {self.rtf}")


@dataclass(frozen=True)
class BenchRow:
    n_drones: int
    rtf_median: float
    rtf_min: float
    rtf_max: float
    runs: int


def measure_rtf(
    n_drones: int,
    sim_duration: float,
    config: Optional[SimConfig] = None,
    seed: int = 0,
) -> RtfSample:
    """Run the hover-and-orbit workload and report sim time over wall time.

    Args:
        n_drones: swarm size, >= 1.
        sim_duration: seconds of sim time to run, > 0.
        config: simulator config override.
        seed: simulator seed.
    """
    if n_drones < 1:
        raise ValueError(f"n_drones must be >= 1, got {n_drones}")
    if not sim_duration > 0.0:
        raise ValueError(f"sim_duration must be > 0, got {sim_duration}")

    sim = SwarmSim(n_drones, config or SimConfig(), seed=seed)
    centers = [d.pose.position for d in sim.drones]
    waypoints = [
        [
            (
                c.x + ORBIT_RADIUS * math.cos(2.0 * math.pi * k / ORBIT_POINTS),
                c.y + ORBIT_RADIUS * math.sin(2.0 * math.pi * k / ORBIT_POINTS),
                ORBIT_ALTITUDE,
            )
            for k in range(ORBIT_POINTS)
        ]
        for c in centers
    ]
    next_wp = [0] * n_drones

    sim.command_takeoff_all(ORBIT_ALTITUDE)
    start = time.perf_counter()
    while sim.sim_time < sim_duration - 1e-9:
        for d in sim.drones:
            if d.mode is Mode.HOVERING:
                x, y, z = waypoints[d.id][next_wp[d.id]]
                next_wp[d.id] = (next_wp[d.id] + 1) % ORBIT_POINTS
                sim.command_navigate(d.id, x, y, z, sim.config.max_speed)
        sim.tick()
    wall = max(time.perf_counter() - start, 1e-9)
    window_sim = sim.sim_time
    return RtfSample(window_wall=wall, window_sim=window_sim, rtf=window_sim / wall)


def bench(
    drone_counts: Sequence[int],
    duration: float,
    runs: int,
    config: Optional[SimConfig] = None,
) -> List[BenchRow]:
    """Median/min/max RTF per swarm size, sorted ascending by size."""
    if not drone_counts:
        raise ValueError("drone_counts must be non-empty")
    if runs < 1:
        raise ValueError(f"runs must be >= 1, got {runs}")
    rows = []
    for n in sorted(set(drone_counts)):
        samples = [measure_rtf(n, duration, config, seed=k).rtf for k in range(runs)]
        rows.append(
            BenchRow(
                n_drones=n,
                rtf_median=statistics.median(samples),
                rtf_min=min(samples),
                rtf_max=max(samples),
                runs=runs,
            )
        )
    return rows
