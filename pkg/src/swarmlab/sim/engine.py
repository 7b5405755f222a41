"""Deterministic kinematic swarm simulator.

The engine owns all drone state and advances it in fixed ticks. Commands
never mutate state directly: they validate immediately, then stage a
closure that is applied atomically at the start of the next tick, so
concurrent callers observe a consistent world and identical command
sequences replay identically.

Motion is first order: each tick a drone with an active target moves
toward it at min(max_speed, distance/dt), which lands exactly on the
target on the final tick of a leg. Formation transitions requested via
set_targets are routed through collision-avoidance resolution before
they are accepted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Dict, List, Optional, Sequence, Set, Tuple

from ..avoidance import Trajectory, resolve
from ..geometry import Pose, Vec3, normalize_yaw
from .drone import DroneState, Mode
from .leds import OFF, EffectSpec, LedGroup, led_frame

MAX_SWARM_SIZE = 256


class InvalidCount(ValueError):
    """Requested swarm size is outside 1..256."""


class UnknownDrone(KeyError):
    """A command referenced a drone id that does not exist."""


class NotAirborne(RuntimeError):
    """A flight command targeted a drone that cannot accept it."""


class InvalidCommand(ValueError):
    """A command carried an out-of-range argument."""


@dataclass(frozen=True)
class SimConfig:
    """Simulator tuning knobs.

    Attributes:
        tick_dt: seconds of sim time per tick.
        max_speed: global hard speed limit in m/s; per-leg speeds are
            capped here.
        battery_duration: seconds of airborne time from full charge to
            empty.
        d_safe: minimum allowed inter-drone separation for planned
            transitions, in meters.
        nav_tolerance: slack used by mode transitions (takeoff complete,
            touchdown), in meters.
        yaw_tolerance: yaw slack in radians for arrival checks.
        max_yaw_rate: yaw turn rate limit in rad/s.
        spawn_spacing: spacing of the initial line of drones, in meters.
        manual_timeout: seconds of sim time a manual velocity command
            stays in effect without being refreshed.
        telemetry_interval: seconds of sim time between telemetry frames.
    """

    tick_dt: float = 0.05
    max_speed: float = 1.0
    battery_duration: float = 600.0
    d_safe: float = 0.5
    nav_tolerance: float = 0.2
    yaw_tolerance: float = 0.1
    max_yaw_rate: float = math.pi
    spawn_spacing: float = 1.0
    manual_timeout: float = 0.6
    telemetry_interval: float = 0.1

    def __post_init__(self) -> None:
        if not self.tick_dt > 0.0:
            raise ValueError(f"tick_dt must be > 0, got {self.tick_dt}")
        if not self.max_speed > 0.0:
            raise ValueError(f"max_speed must be > 0, got {self.max_speed}")
        if not self.d_safe > 0.0:
            raise ValueError(f"d_safe must be > 0, got {self.d_safe}")


@dataclass(frozen=True)
class Event:
    """Something that happened during a tick."""

    kind: str
    t: float
    drone_id: Optional[int] = None
    data: Dict[str, Any] = field(default_factory=dict)


@dataclass
class _ActiveEffect:
    spec: EffectSpec
    start_tick: int
    seed: int


def spawn_swarm(n: int, spacing: float, cpu_load: Optional[float] = None) -> List[DroneState]:
    """Initial states: n landed drones in a line along x at z=0, ids 0..n-1."""
    if not isinstance(n, int) or isinstance(n, bool) or not 1 <= n <= MAX_SWARM_SIZE:
        raise InvalidCount(f"swarm size must be 1..{MAX_SWARM_SIZE}, got {n!r}")
    cpu = min(1.0, 0.2 + 0.01 * n) if cpu_load is None else cpu_load
    return [
        DroneState(id=i, pose=Pose(Vec3(i * spacing, 0.0, 0.0), 0.0), cpu=cpu)
        for i in range(n)
    ]


class SwarmSim:
    """The tick-driven simulator for one swarm."""

    def __init__(self, n: int, config: Optional[SimConfig] = None, seed: int = 0):
        self.config = config or SimConfig()
        self.seed = seed
        self.tick_count = 0
        self.drones: List[DroneState] = spawn_swarm(n, self.config.spawn_spacing)
        self.last_events: List[Event] = []
        self.telemetry_due = False
        self._staged: List[Callable[[], None]] = []
        self._effect: Optional[_ActiveEffect] = None

    # ------------------------------------------------------------------
    # Clock and snapshots

    @property
    def sim_time(self) -> float:
        return self.tick_count * self.config.tick_dt

    @property
    def n(self) -> int:
        return len(self.drones)

    def drone(self, drone_id: int) -> DroneState:
        if not 0 <= drone_id < len(self.drones):
            raise UnknownDrone(f"no drone with id {drone_id}")
        return self.drones[drone_id]

    def trace_rows(self) -> List[Dict[str, Any]]:
        return [d.trace_row() for d in self.drones]

    def telemetry_rows(self) -> List[Dict[str, Any]]:
        return [d.telemetry_row() for d in self.drones]

    def all_landed(self) -> bool:
        return all(d.mode is Mode.LANDED for d in self.drones)

    # ------------------------------------------------------------------
    # Commands (validate now, apply at the next tick boundary)

    def respawn(self, n: int) -> None:
        """Replace the swarm with a fresh landed line; the clock keeps running."""
        drones = spawn_swarm(n, self.config.spawn_spacing)

        def apply() -> None:
            self.drones = drones
            self._effect = None

        self._staged.append(apply)

    def command_takeoff_all(self, z: float) -> List[int]:
        """All landed drones climb straight up to altitude z.

        Returns the ids commanded, for arrival tracking.
        """
        if not (isinstance(z, (int, float)) and math.isfinite(z) and z > 0.0):
            raise InvalidCommand(f"takeoff altitude must be > 0, got {z!r}")
        ids = [d.id for d in self.drones if d.mode is Mode.LANDED]

        def apply() -> None:
            for i in ids:
                d = self.drones[i]
                if d.mode is not Mode.LANDED:
                    continue
                p = d.pose.position
                d.mode = Mode.TAKING_OFF
                d.target = Pose(Vec3(p.x, p.y, float(z)), d.pose.yaw)
                d.max_speed = self.config.max_speed
                d.depart_time = 0.0
                d.manual_velocity = None

        self._staged.append(apply)
        return ids

    def command_land_all(self) -> List[int]:
        """Every airborne drone descends to the ground where it stands."""
        ids = [d.id for d in self.drones if d.airborne and d.mode is not Mode.LANDING]

        def apply() -> None:
            for i in ids:
                d = self.drones[i]
                if not d.airborne or d.mode is Mode.LANDING:
                    continue
                self._start_landing(d)

        self._staged.append(apply)
        return ids

    def command_force_land(self, drone_id: int) -> bool:
        """Land one drone immediately (safe-area guardian hook)."""
        d = self.drone(drone_id)
        if not d.airborne or d.mode is Mode.LANDING:
            return False

        def apply() -> None:
            dd = self.drones[drone_id]
            if dd.airborne and dd.mode is not Mode.LANDING:
                self._start_landing(dd)

        self._staged.append(apply)
        return True

    def _start_landing(self, d: DroneState) -> None:
        p = d.pose.position
        d.mode = Mode.LANDING
        d.target = Pose(Vec3(p.x, p.y, 0.0), d.pose.yaw)
        d.max_speed = self.config.max_speed
        d.depart_time = 0.0
        d.manual_velocity = None

    def _steerable(self, drone_id: int) -> DroneState:
        d = self.drone(drone_id)
        if d.mode not in (Mode.HOVERING, Mode.NAVIGATING):
            raise NotAirborne(
                f"drone {drone_id} is {d.mode.value}; it must be hovering or "
                f"navigating to accept steering commands"
            )
        return d

    def command_navigate(
        self, drone_id: int, x: float, y: float, z: float, speed: float
    ) -> Tuple[List[int], Pose]:
        """Send one drone (or, with drone_id=-1, every steerable drone) to a point.

        Returns (commanded ids, goal pose). The raw navigate command does not
        route through conflict resolution; formation transitions do.
        """
        for name, v in (("x", x), ("y", y), ("z", z)):
            if not (isinstance(v, (int, float)) and math.isfinite(v)):
                raise InvalidCommand(f"navigate {name} must be finite, got {v!r}")
        if not (isinstance(speed, (int, float)) and speed > 0.0):
            raise InvalidCommand(f"navigate speed must be > 0, got {speed!r}")
        if drone_id == -1:
            ids = [
                d.id for d in self.drones if d.mode in (Mode.HOVERING, Mode.NAVIGATING)
            ]
            if not ids:
                raise NotAirborne("no drone is airborne to navigate")
        else:
            ids = [self._steerable(drone_id).id]
        leg_speed = min(float(speed), self.config.max_speed)
        goal = Vec3(float(x), float(y), float(z))

        def apply() -> None:
            for i in ids:
                d = self.drones[i]
                if d.mode not in (Mode.HOVERING, Mode.NAVIGATING):
                    continue
                d.mode = Mode.NAVIGATING
                d.target = Pose(goal, d.pose.yaw)
                d.max_speed = leg_speed
                d.depart_time = 0.0
                d.manual_velocity = None

        self._staged.append(apply)
        return ids, Pose(goal, 0.0)

    def set_targets(
        self,
        targets: Sequence[Tuple[int, Pose]],
        speed: Optional[float] = None,
    ) -> List[Tuple[int, Pose, float]]:
        """Plan a multi-drone transition through conflict resolution.

        Every drone not in the target list is treated as a stationary
        obstacle at its current position. Raises Unresolvable when the
        resolution ladder cannot clear the plan; nothing is staged then.

        Returns [(drone_id, resolved goal pose, departure delay s)]. The
        resolved goal may sit 0.5 m above the requested one when an
        altitude offset was the only way to clear a conflict.
        """
        if not targets:
            return []
        if speed is not None and not (isinstance(speed, (int, float)) and speed > 0.0):
            raise InvalidCommand(f"transition speed must be > 0, got {speed!r}")
        ids = [t[0] for t in targets]
        if len(set(ids)) != len(ids):
            raise InvalidCommand(f"duplicate drone ids in targets: {ids}")
        for i in ids:
            self._steerable(i)
        cruise = min(float(speed), self.config.max_speed) if speed is not None else self.config.max_speed

        moving = {}
        plan = []
        for i, pose in targets:
            start = self.drones[i].pose.position
            goal = pose.position
            leg_speed = cruise if start.distance_to(goal) > 0.0 else 0.0
            plan.append(Trajectory(i, start, goal, leg_speed))
            moving[i] = pose
        for d in self.drones:
            if d.id not in moving:
                p = d.pose.position
                plan.append(Trajectory(d.id, p, p, 0.0))

        resolved = resolve(plan, self.config.d_safe)
        out: List[Tuple[int, Pose, float]] = []
        legs: List[Tuple[int, Pose, float, float]] = []
        for traj in resolved.trajectories:
            if traj.drone_id not in moving:
                continue
            goal_pose = Pose(traj.goal, moving[traj.drone_id].yaw)
            out.append((traj.drone_id, goal_pose, traj.depart_time))
            legs.append((traj.drone_id, goal_pose, traj.depart_time, traj.speed))

        def apply() -> None:
            now = self.sim_time
            for i, goal_pose, delay, leg_speed in legs:
                d = self.drones[i]
                if d.mode not in (Mode.HOVERING, Mode.NAVIGATING):
                    continue
                d.mode = Mode.NAVIGATING
                d.target = goal_pose
                d.max_speed = leg_speed if leg_speed > 0.0 else self.config.max_speed
                d.depart_time = now + delay
                d.manual_velocity = None

        self._staged.append(apply)
        return out

    def command_led(self, spec: EffectSpec) -> None:
        """Start an LED effect; it replaces any active one at the next tick."""
        if not isinstance(spec, EffectSpec):
            raise InvalidCommand(f"expected an EffectSpec, got {spec!r}")

        def apply() -> None:
            start = self.tick_count
            effect_seed = (self.seed * 2654435761 + start) % (2**32)
            self._effect = _ActiveEffect(spec, start, effect_seed)

        self._staged.append(apply)

    def command_manual_velocity(
        self, drone_id: int, velocity: Vec3, yaw_rate: float = 0.0
    ) -> None:
        """Direct velocity control for one drone (FPV flying).

        The command expires after manual_timeout seconds of sim time unless
        refreshed; speed is clamped to the global limit. Manual input
        bypasses conflict resolution but not safe-area enforcement.
        """
        d = self._steerable(drone_id)
        if not (isinstance(yaw_rate, (int, float)) and math.isfinite(yaw_rate)):
            raise InvalidCommand(f"yaw_rate must be finite, got {yaw_rate!r}")
        speed = velocity.norm()
        if speed > self.config.max_speed:
            velocity = velocity.scaled(self.config.max_speed / speed)
        rate = max(-self.config.max_yaw_rate, min(self.config.max_yaw_rate, float(yaw_rate)))

        def apply() -> None:
            dd = self.drones[d.id]
            if dd.mode not in (Mode.HOVERING, Mode.NAVIGATING):
                return
            dd.mode = Mode.HOVERING
            dd.target = None
            dd.manual_velocity = velocity
            dd.manual_yaw_rate = rate
            dd.manual_until = self.sim_time + self.config.manual_timeout

        self._staged.append(apply)

    def command_hover_all(self) -> None:
        """Halt active flight: climbing and navigating drones hold position."""

        def apply() -> None:
            for d in self.drones:
                if d.mode in (Mode.TAKING_OFF, Mode.NAVIGATING):
                    d.mode = Mode.HOVERING
                    d.target = None
                d.manual_velocity = None
                d.velocity = Vec3(0.0, 0.0, 0.0)

        self._staged.append(apply)

    # ------------------------------------------------------------------
    # The tick loop

    def tick(self) -> List[Event]:
        """Advance the world by one tick of tick_dt seconds."""
        for fn in self._staged:
            fn()
        self._staged.clear()

        dt = self.config.tick_dt
        t_start = self.sim_time
        self.tick_count += 1
        now = self.sim_time
        events: List[Event] = []

        for d in self.drones:
            self._advance(d, dt, t_start, now, events)
        self._drain_battery(dt, now, events)
        self._apply_leds()

        stride = max(1, round(self.config.telemetry_interval / dt))
        self.telemetry_due = self.tick_count % stride == 0
        self.last_events = events
        return events

    def _advance(
        self, d: DroneState, dt: float, t_start: float, now: float, events: List[Event]
    ) -> None:
        if d.manual_velocity is not None and d.mode is Mode.HOVERING:
            if t_start >= d.manual_until - 1e-12:
                d.manual_velocity = None
                d.manual_yaw_rate = 0.0
                d.velocity = Vec3(0.0, 0.0, 0.0)
            else:
                d.velocity = d.manual_velocity
                p = d.pose.position + d.manual_velocity.scaled(dt)
                yaw = normalize_yaw(d.pose.yaw + d.manual_yaw_rate * dt)
                d.pose = Pose(p, yaw)
            return

        if d.target is None or d.mode not in (Mode.TAKING_OFF, Mode.NAVIGATING, Mode.LANDING):
            d.velocity = Vec3(0.0, 0.0, 0.0)
            return

        if t_start + 1e-12 < d.depart_time:
            d.velocity = Vec3(0.0, 0.0, 0.0)
            return

        pos = d.pose.position
        goal = d.target.position
        delta = goal - pos
        dist = delta.norm()
        if dist <= d.max_speed * dt * (1.0 + 1e-12):
            new_pos = goal
            d.velocity = delta.scaled(1.0 / dt) if dist > 0.0 else Vec3(0.0, 0.0, 0.0)
        else:
            step = d.max_speed * dt
            d.velocity = delta.scaled(d.max_speed / dist)
            new_pos = pos + delta.scaled(step / dist)

        yaw = d.pose.yaw
        want = d.target.yaw
        diff = normalize_yaw(want - yaw)
        max_turn = self.config.max_yaw_rate * dt
        if abs(diff) <= max_turn:
            yaw = want
        else:
            yaw = normalize_yaw(yaw + math.copysign(max_turn, diff))
        d.pose = Pose(new_pos, yaw)

        tol = self.config.nav_tolerance
        if d.mode is Mode.TAKING_OFF:
            if abs(d.pose.position.z - goal.z) <= tol:
                d.mode = Mode.HOVERING
                d.target = None
                d.velocity = Vec3(0.0, 0.0, 0.0)
                events.append(Event("takeoff_complete", now, d.id))
        elif d.mode is Mode.NAVIGATING:
            arrived = d.pose.position.distance_to(goal) <= 1e-12
            yaw_ok = abs(normalize_yaw(d.pose.yaw - want)) <= self.config.yaw_tolerance
            if arrived and yaw_ok:
                d.mode = Mode.HOVERING
                d.target = None
                d.velocity = Vec3(0.0, 0.0, 0.0)
                events.append(Event("arrived", now, d.id))
        elif d.mode is Mode.LANDING:
            if d.pose.position.z <= tol:
                d.mode = Mode.LANDED
                d.target = None
                d.velocity = Vec3(0.0, 0.0, 0.0)
                events.append(Event("landed", now, d.id))

    def _drain_battery(self, dt: float, now: float, events: List[Event]) -> None:
        drain = dt / self.config.battery_duration
        for d in self.drones:
            if not d.airborne:
                continue
            before = d.battery
            d.battery = max(0.0, d.battery - drain)
            if d.battery == 0.0 and before > 0.0:
                events.append(Event("battery_empty", now, d.id))
            if d.battery == 0.0 and d.mode not in (Mode.LANDING, Mode.LANDED):
                self._start_landing(d)
                events.append(Event("forced_landing", now, d.id, {"reason": "battery"}))

    def _formation2d_members(self) -> Set[int]:
        tol = self.config.nav_tolerance
        zs = [d.pose.position.z for d in self.drones]
        best_count = -1
        best_z = 0.0
        for d in self.drones:
            z = d.pose.position.z
            count = sum(1 for other in zs if abs(other - z) <= tol)
            if count > best_count:
                best_count = count
                best_z = z
        return {d.id for d in self.drones if abs(d.pose.position.z - best_z) <= tol}

    def _apply_leds(self) -> None:
        if self._effect is None:
            return
        eff = self._effect
        members = None
        if eff.spec.group is LedGroup.FORMATION_2D:
            members = self._formation2d_members()
        frame = self.tick_count - 1 - eff.start_tick
        colors = led_frame(
            eff.spec,
            len(self.drones),
            frame,
            eff.seed,
            frame_dt=self.config.tick_dt,
            members=members,
        )
        for d, color in zip(self.drones, colors):
            if color is not None:
                d.led = color
