"""Pairwise conflict detection and resolution for swarm transitions.

Each drone transition is a straight line flown at constant speed: the drone
holds its start position until depart_time, moves to the goal, then holds
the goal. Conflicts are found by exact closest-point-of-approach analysis
on every motion piece and resolved with departure delays and, as a last
resort, a goal altitude offset.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Dict, List, Sequence, Tuple

from .geometry import Vec3

_PARALLEL_EPS = 1e-9


class Unresolvable(RuntimeError):
    """The adjustment ladder was exhausted without clearing all conflicts."""


class DuplicateDroneId(ValueError):
    """A transition plan referenced the same drone id twice."""


class Scenario(Enum):
    STATIONARY_MOVING = "stationary_moving"
    PARALLEL = "parallel"
    NON_PARALLEL = "non_parallel"


class AdjustmentKind(Enum):
    DELAY = "delay"
    ALTITUDE_OFFSET = "altitude_offset"


@dataclass(frozen=True)
class Trajectory:
    """One drone's planned transition; speed 0 encodes a stationary drone."""

    drone_id: int
    start: Vec3
    goal: Vec3
    speed: float
    depart_time: float = 0.0

    def __post_init__(self) -> None:
        if self.speed < 0.0:
            raise ValueError(f"speed must be >= 0, got {self.speed}")
        if self.speed == 0.0 and self.start != self.goal:
            raise ValueError("a zero-speed trajectory must have start == goal")
        if self.depart_time < 0.0:
            raise ValueError(f"depart_time must be >= 0, got {self.depart_time}")

    @property
    def travel_time(self) -> float:
        if self.speed == 0.0:
            return 0.0
        return self.start.distance_to(self.goal) / self.speed

    @property
    def arrival_time(self) -> float:
        return self.depart_time + self.travel_time

    def velocity(self) -> Vec3:
        """Nominal cruise velocity (zero for stationary or zero-length legs)."""
        d = self.goal - self.start
        n = d.norm()
        if self.speed == 0.0 or n == 0.0:
            return Vec3(0.0, 0.0, 0.0)
        return d.scaled(self.speed / n)

    def position_at(self, t: float) -> Vec3:
        if t <= self.depart_time:
            return self.start
        if t >= self.arrival_time:
            return self.goal
        return self.start + self.velocity().scaled(t - self.depart_time)


@dataclass(frozen=True)
class Conflict:
    """Closest approach below the safety distance for one drone pair."""

    pair: Tuple[int, int]
    t_star: float
    d_star: float
    scenario: Scenario


@dataclass(frozen=True)
class Adjustment:
    drone_id: int
    kind: AdjustmentKind
    amount: float


@dataclass(frozen=True)
class ResolvedPlan:
    trajectories: Tuple[Trajectory, ...]
    adjustments: Tuple[Adjustment, ...]


def _classify(a: Trajectory, b: Trajectory) -> Scenario:
    va, vb = a.velocity(), b.velocity()
    na, nb = va.norm(), vb.norm()
    if na == 0.0 or nb == 0.0:
        return Scenario.STATIONARY_MOVING
    cross = va.scaled(1.0 / na).cross(vb.scaled(1.0 / nb))
    if cross.norm() < _PARALLEL_EPS:
        return Scenario.PARALLEL
    return Scenario.NON_PARALLEL


def cpa(a: Trajectory, b: Trajectory) -> Conflict:
    """Closest point of approach over the whole maneuver.

    The separation is minimized piecewise over every interval delimited by
    either drone's departure or arrival, including the holds before
    departure and after arrival, so the reported minimum covers the full
    timeline [0, latest arrival]. Ties resolve to the earliest time.
    """
    if a.drone_id == b.drone_id:
        raise DuplicateDroneId(f"cpa of drone {a.drone_id} with itself")

    horizon = max(a.arrival_time, b.arrival_time, 0.0)
    cuts = sorted({0.0, a.depart_time, a.arrival_time, b.depart_time, b.arrival_time, horizon})
    cuts = [t for t in cuts if 0.0 <= t <= horizon]

    best_d2 = math.inf
    best_t = 0.0

    def consider(t: float, d2: float) -> None:
        nonlocal best_d2, best_t
        if d2 < best_d2 - 1e-15 or (abs(d2 - best_d2) <= 1e-15 and t < best_t):
            best_d2, best_t = d2, t

    def piece_velocity(traj: Trajectory, t0: float, t1: float) -> Vec3:
        # Cuts include every depart/arrival, so (t0, t1) is all-hold or all-cruise.
        if traj.depart_time <= t0 and t1 <= traj.arrival_time:
            return traj.velocity()
        return Vec3(0.0, 0.0, 0.0)

    for t0, t1 in zip(cuts, cuts[1:] + [cuts[-1]]):
        r0 = a.position_at(t0) - b.position_at(t0)
        consider(t0, r0.dot(r0))
        if t1 <= t0:
            continue
        rv = piece_velocity(a, t0, t1) - piece_velocity(b, t0, t1)
        rv2 = rv.dot(rv)
        if rv2 > 0.0:
            t_min = t0 - r0.dot(rv) / rv2
            if t0 < t_min < t1:
                r = r0 + rv.scaled(t_min - t0)
                consider(t_min, r.dot(r))
        r1 = a.position_at(t1) - b.position_at(t1)
        consider(t1, r1.dot(r1))

    lo, hi = sorted((a.drone_id, b.drone_id))
    return Conflict((lo, hi), best_t, math.sqrt(max(0.0, best_d2)), _classify(a, b))


def detect(plan: Sequence[Trajectory], d_safe: float) -> List[Conflict]:
    """All pairs whose closest approach falls below d_safe, sorted by (t, pair)."""
    if d_safe <= 0.0:
        raise ValueError(f"d_safe must be > 0, got {d_safe}")
    ids = [t.drone_id for t in plan]
    if len(set(ids)) != len(ids):
        raise DuplicateDroneId(f"duplicate drone ids in plan: {sorted(ids)}")

    conflicts = []
    for i in range(len(plan)):
        for j in range(i + 1, len(plan)):
            c = cpa(plan[i], plan[j])
            if c.d_star < d_safe:
                conflicts.append(c)
    conflicts.sort(key=lambda c: (c.t_star, c.pair))
    return conflicts


_MAX_DELAYS_PER_DRONE = 20
_ALTITUDE_OFFSET = 0.5


def resolve(plan: Sequence[Trajectory], d_safe: float) -> ResolvedPlan:
    """Clear every conflict by adjusting the lower-priority drone.

    Priority is ascending drone id: the higher id of a conflicting pair is
    adjusted, first with departure delays in steps of d_safe/speed (up to
    20), then with a single +0.5 m altitude offset on its goal. A drone
    that cannot move (zero speed) defers adjustment to its peer. Raises
    Unresolvable when the ladder is exhausted.
    """
    work: List[Trajectory] = list(plan)
    index: Dict[int, int] = {t.drone_id: i for i, t in enumerate(work)}
    if len(index) != len(work):
        raise DuplicateDroneId(f"duplicate drone ids in plan: {[t.drone_id for t in work]}")

    delays_used: Dict[int, int] = {t.drone_id: 0 for t in work}
    offset_used: Dict[int, bool] = {t.drone_id: False for t in work}
    total_delay: Dict[int, float] = {t.drone_id: 0.0 for t in work}

    budget = (_MAX_DELAYS_PER_DRONE + 1) * len(work) + 1
    for _ in range(budget):
        conflicts = detect(work, d_safe)
        if not conflicts:
            break
        lo, hi = conflicts[0].pair
        loser = hi if work[index[hi]].speed > 0.0 else lo
        traj = work[index[loser]]
        if traj.speed <= 0.0:
            raise Unresolvable(
                f"drones {lo} and {hi} conflict but neither can be adjusted"
            )
        if delays_used[loser] < _MAX_DELAYS_PER_DRONE:
            step = d_safe / traj.speed
            work[index[loser]] = replace(traj, depart_time=traj.depart_time + step)
            delays_used[loser] += 1
            total_delay[loser] += step
        elif not offset_used[loser]:
            lifted = traj.goal + Vec3(0.0, 0.0, _ALTITUDE_OFFSET)
            work[index[loser]] = replace(traj, goal=lifted)
            offset_used[loser] = True
        else:
            raise Unresolvable(
                f"adjustment ladder exhausted for drone {loser} "
                f"(pair {lo}/{hi} still within {d_safe} m)"
            )
    else:
        raise Unresolvable("conflict resolution budget exhausted")

    adjustments: List[Adjustment] = []
    for t in plan:
        if total_delay[t.drone_id] > 0.0:
            adjustments.append(
                Adjustment(t.drone_id, AdjustmentKind.DELAY, total_delay[t.drone_id])
            )
        if offset_used[t.drone_id]:
            adjustments.append(
                Adjustment(t.drone_id, AdjustmentKind.ALTITUDE_OFFSET, _ALTITUDE_OFFSET)
            )
    return ResolvedPlan(tuple(work), tuple(adjustments))
