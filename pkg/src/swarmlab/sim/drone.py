"""Per-drone state for the kinematic simulator."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, Optional

from ..geometry import Pose, Vec3
from .leds import OFF, Color


class Mode(Enum):
    LANDED = "landed"
    TAKING_OFF = "taking_off"
    HOVERING = "hovering"
    NAVIGATING = "navigating"
    LANDING = "landing"


# The only legal mode transitions. Used by tests to audit tick output.
ALLOWED_TRANSITIONS = frozenset(
    {
        (Mode.LANDED, Mode.TAKING_OFF),
        (Mode.TAKING_OFF, Mode.HOVERING),
        (Mode.HOVERING, Mode.NAVIGATING),
        (Mode.NAVIGATING, Mode.HOVERING),
        (Mode.HOVERING, Mode.LANDING),
        (Mode.NAVIGATING, Mode.LANDING),
        (Mode.TAKING_OFF, Mode.LANDING),
        (Mode.LANDING, Mode.LANDED),
    }
)


@dataclass
class DroneState:
    """Mutable working state of one simulated drone.

    Attributes:
        id: stable identifier, 0-based.
        pose: current position and yaw.
        velocity: instantaneous velocity in m/s, world frame.
        mode: flight mode; see Mode.
        led: current LED color.
        battery: remaining charge fraction in [0, 1].
        cpu: synthetic CPU load fraction in [0, 1].
        target: pose the drone is flying toward, if any.
        max_speed: speed limit for the current leg, m/s.
        depart_time: absolute sim time before which the drone holds
            position instead of flying at its target.
    """

    id: int
    pose: Pose
    velocity: Vec3 = field(default_factory=lambda: Vec3(0.0, 0.0, 0.0))
    mode: Mode = Mode.LANDED
    led: Color = OFF
    battery: float = 1.0
    cpu: float = 0.2
    target: Optional[Pose] = None
    max_speed: float = 1.0
    depart_time: float = 0.0
    manual_velocity: Optional[Vec3] = None
    manual_yaw_rate: float = 0.0
    manual_until: float = 0.0

    @property
    def airborne(self) -> bool:
        return self.mode is not Mode.LANDED

    def trace_row(self) -> Dict[str, Any]:
        """Snapshot with the exact field set of the trace file format."""
        return {
            "id": self.id,
            "x": self.pose.position.x,
            "y": self.pose.position.y,
            "z": self.pose.position.z,
            "yaw": self.pose.yaw,
            "mode": self.mode.value,
            "r": self.led.r,
            "g": self.led.g,
            "b": self.led.b,
            "battery": self.battery,
        }

    def telemetry_row(self) -> Dict[str, Any]:
        """Trace fields plus live-dashboard extras."""
        row = self.trace_row()
        row["cpu"] = self.cpu
        row["vx"] = self.velocity.x
        row["vy"] = self.velocity.y
        row["vz"] = self.velocity.z
        return row
