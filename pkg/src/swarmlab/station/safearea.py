"""Safe-area enforcement: a closed box outside which drones are landed."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Dict, List, Set

from ..geometry import Vec3
from ..sim.engine import SwarmSim


@dataclass(frozen=True)
class SafeArea:
    """A closed axis-aligned operating box.

    Points exactly on the boundary count as inside. A disabled area never
    triggers enforcement.
    """

    min: Vec3 = Vec3(0.0, 0.0, 0.0)
    max: Vec3 = Vec3(0.0, 0.0, 0.0)
    enabled: bool = False

    def __post_init__(self) -> None:
        if self.enabled:
            if not (
                self.min.x <= self.max.x
                and self.min.y <= self.max.y
                and self.min.z <= self.max.z
            ):
                raise ValueError("safe area min must be <= max componentwise")

    def contains(self, p: Vec3) -> bool:
        return (
            self.min.x <= p.x <= self.max.x
            and self.min.y <= p.y <= self.max.y
            and self.min.z <= p.z <= self.max.z
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "min": [self.min.x, self.min.y, self.min.z],
            "max": [self.max.x, self.max.y, self.max.z],
            "enabled": self.enabled,
        }

    @staticmethod
    def from_dict(raw: Dict[str, Any]) -> "SafeArea":
        unknown = set(raw) - {"min", "max", "enabled"}
        if unknown:
            raise ValueError(f"unknown safe area field(s) {sorted(unknown)}")
        lo = raw.get("min", [0.0, 0.0, 0.0])
        hi = raw.get("max", [0.0, 0.0, 0.0])
        for name, v in (("min", lo), ("max", hi)):
            if not (isinstance(v, (list, tuple)) and len(v) == 3):
                raise ValueError(f"safe area {name} must be [x, y, z]")
        return SafeArea(
            min=Vec3(float(lo[0]), float(lo[1]), float(lo[2])),
            max=Vec3(float(hi[0]), float(hi[1]), float(hi[2])),
            enabled=bool(raw.get("enabled", False)),
        )


class SafeAreaGuard:
    """Per-tick enforcement with one violation event per episode per drone.

    A violation episode starts when an airborne drone leaves the box and
    ends when it is back inside (regardless of mode); only the start emits
    an event. Run check() immediately after every simulator tick so the
    landing command is issued within the same tick as the violation.
    """

    def __init__(self, area: SafeArea = SafeArea()):
        self.area = area
        self._violating: Set[int] = set()

    def set_area(self, area: SafeArea) -> None:
        self.area = area
        self._violating.clear()

    def reset_episodes(self) -> None:
        """Forget open episodes; call when the swarm is replaced."""
        self._violating.clear()

    def check(self, sim: SwarmSim) -> List[Dict[str, Any]]:
        """Land violators; return one event payload per new episode."""
        if not self.area.enabled:
            return []
        events: List[Dict[str, Any]] = []
        for d in sim.drones:
            p = d.pose.position
            if self.area.contains(p):
                self._violating.discard(d.id)
                continue
            if not d.airborne:
                continue
            sim.command_force_land(d.id)
            if d.id not in self._violating:
                self._violating.add(d.id)
                events.append(
                    {"drone": d.id, "t": sim.sim_time, "x": p.x, "y": p.y, "z": p.z}
                )
        return events
