"""Formation geometry for drone swarms.

Generates slot positions for named formation shapes, applies affine edits
(translate / scale / rotate about the formation centroid), and computes the
minimum-cost matching of drones to formation slots.

All coordinates are meters in a z-up world frame; yaw is radians about +z.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, List, Sequence, Tuple

import numpy as np
from scipy.optimize import linear_sum_assignment

TWO_PI = 2.0 * math.pi
GOLDEN_RATIO = (1.0 + math.sqrt(5.0)) / 2.0


class InvalidSpec(ValueError):
    """Formation spec violates its constraints (bad count or size)."""


class InvalidFactor(ValueError):
    """Scale factor must be strictly positive."""


class SizeMismatch(ValueError):
    """Drone list and formation have different lengths."""


def normalize_yaw(yaw: float) -> float:
    """Normalize an angle to the interval [-pi, pi)."""
    y = math.fmod(yaw + math.pi, TWO_PI)
    if y < 0.0:
        y += TWO_PI
    return y - math.pi


@dataclass(frozen=True)
class Vec3:
    """Point or displacement in meters. Components must be finite."""

    x: float
    y: float
    z: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x) and math.isfinite(self.y) and math.isfinite(self.z)):
            raise ValueError(f"non-finite vector component: {(self.x, self.y, self.z)}")

    def __add__(self, other: "Vec3") -> "Vec3":
        return Vec3(self.x + other.x, self.y + other.y, self.z + other.z)

    def __sub__(self, other: "Vec3") -> "Vec3":
        return Vec3(self.x - other.x, self.y - other.y, self.z - other.z)

    def scaled(self, k: float) -> "Vec3":
        return Vec3(self.x * k, self.y * k, self.z * k)

    def dot(self, other: "Vec3") -> float:
        return self.x * other.x + self.y * other.y + self.z * other.z

    def cross(self, other: "Vec3") -> "Vec3":
        return Vec3(
            self.y * other.z - self.z * other.y,
            self.z * other.x - self.x * other.z,
            self.x * other.y - self.y * other.x,
        )

    def norm(self) -> float:
        return math.sqrt(self.dot(self))

    def distance_to(self, other: "Vec3") -> float:
        return (self - other).norm()

    def as_tuple(self) -> Tuple[float, float, float]:
        return (self.x, self.y, self.z)


@dataclass(frozen=True)
class Pose:
    """Position plus heading. Yaw is stored normalized to [-pi, pi)."""

    position: Vec3
    yaw: float = 0.0

    def __post_init__(self) -> None:
        if not math.isfinite(self.yaw):
            raise ValueError(f"non-finite yaw: {self.yaw}")
        object.__setattr__(self, "yaw", normalize_yaw(self.yaw))


class FormationKind(Enum):
    LINE = "line"
    CIRCLE = "circle"
    SQUARE = "square"
    TRIANGLE = "triangle"
    CUBE = "cube"
    PYRAMID = "pyramid"
    SPHERE = "sphere"


@dataclass(frozen=True)
class FormationSpec:
    """Request for a formation shape.

    size_param is the spacing for LINE, radius for CIRCLE/SPHERE, side for
    SQUARE/TRIANGLE, edge for CUBE, and base side for PYRAMID. altitude is
    the vertical offset of the shape (plane height for planar shapes, base
    or center height for 3D ones). height applies to PYRAMID only.
    """

    kind: FormationKind
    n: int
    size_param: float
    height: float = 0.0
    altitude: float = 0.0

    def validate(self) -> None:
        if not isinstance(self.n, int) or self.n < 1:
            raise InvalidSpec(f"drone count must be a positive integer, got {self.n!r}")
        if not (math.isfinite(self.size_param) and self.size_param > 0.0):
            raise InvalidSpec(f"size parameter must be > 0, got {self.size_param!r}")
        if self.kind is FormationKind.PYRAMID and not (
            math.isfinite(self.height) and self.height > 0.0
        ):
            raise InvalidSpec(f"pyramid height must be > 0, got {self.height!r}")
        if not math.isfinite(self.altitude):
            raise InvalidSpec(f"altitude must be finite, got {self.altitude!r}")


@dataclass(frozen=True)
class Formation:
    """An ordered list of target poses, one slot per drone."""

    slots: Tuple[Pose, ...]

    @property
    def n(self) -> int:
        return len(self.slots)

    def positions(self) -> np.ndarray:
        """Slot positions as an (n, 3) float array."""
        return np.array([p.position.as_tuple() for p in self.slots], dtype=float)

    def centroid(self) -> Vec3:
        c = self.positions().mean(axis=0)
        return Vec3(float(c[0]), float(c[1]), float(c[2]))

    def to_json_dict(self) -> dict:
        return {
            "slots": [
                {"x": p.position.x, "y": p.position.y, "z": p.position.z, "yaw": p.yaw}
                for p in self.slots
            ]
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True, separators=(",", ":"))


@dataclass(frozen=True)
class Assignment:
    """Drone-to-slot matching: slot_of[i] is the slot for drone i."""

    slot_of: Tuple[int, ...]
    total_cost: float


# --- generators -------------------------------------------------------------
#
# Conventions (all deterministic):
#   Line      along +x from the origin, one slot per spacing step.
#   Circle    centered on the origin, slot k at angle 2*pi*k/n CCW from +x.
#   Square    n slots at arc length k*P/n along the perimeter, CCW from the
#             vertex (-side/2, -side/2).
#   Triangle  equilateral, centroid at origin, CCW from the top vertex.
#   Cube      m^3 lattice (m = ceil(n^(1/3))), spacing edge/(m-1), filled
#             x-fastest, truncated to n, min corner at the origin.
#   Pyramid   square layers base-first with side counts L, L-1, ..., 1;
#             L is the smallest integer whose square-pyramidal number >= n.
#   Sphere    Fibonacci lattice scaled by the radius.


def _line(n: int, spacing: float, alt: float) -> List[Vec3]:
    return [Vec3(k * spacing, 0.0, alt) for k in range(n)]


def _circle(n: int, radius: float, alt: float) -> List[Vec3]:
    out = []
    for k in range(n):
        a = TWO_PI * k / n
        out.append(Vec3(radius * math.cos(a), radius * math.sin(a), alt))
    return out


def _perimeter_walk(vertices: Sequence[Tuple[float, float]], n: int, alt: float) -> List[Vec3]:
    """Place n points at equal arc-length steps along a closed polygon."""
    m = len(vertices)
    edge_len = [
        math.dist(vertices[i], vertices[(i + 1) % m]) for i in range(m)
    ]
    perimeter = sum(edge_len)
    out = []
    for k in range(n):
        d = perimeter * k / n
        i = 0
        while i < m - 1 and d >= edge_len[i]:
            d -= edge_len[i]
            i += 1
        ax, ay = vertices[i]
        bx, by = vertices[(i + 1) % m]
        f = d / edge_len[i]
        out.append(Vec3(ax + (bx - ax) * f, ay + (by - ay) * f, alt))
    return out


def _square(n: int, side: float, alt: float) -> List[Vec3]:
    h = side / 2.0
    return _perimeter_walk([(-h, -h), (h, -h), (h, h), (-h, h)], n, alt)


def _triangle(n: int, side: float, alt: float) -> List[Vec3]:
    circum = side / math.sqrt(3.0)
    inr = side / (2.0 * math.sqrt(3.0))
    top = (0.0, circum)
    left = (-side / 2.0, -inr)
    right = (side / 2.0, -inr)
    return _perimeter_walk([top, left, right], n, alt)


def _cube(n: int, edge: float, alt: float) -> List[Vec3]:
    if n == 1:
        return [Vec3(0.0, 0.0, alt)]
    m = 1
    while m ** 3 < n:
        m += 1
    step = edge / (m - 1)
    out = []
    for idx in range(n):
        ix = idx % m
        iy = (idx // m) % m
        iz = idx // (m * m)
        out.append(Vec3(ix * step, iy * step, alt + iz * step))
    return out


def _pyramid(n: int, base_side: float, height: float, alt: float) -> List[Vec3]:
    layers = 1
    while layers * (layers + 1) * (2 * layers + 1) // 6 < n:
        layers += 1
    if layers == 1:
        return [Vec3(0.0, 0.0, alt)]
    step = base_side / (layers - 1)
    dz = height / (layers - 1)
    out: List[Vec3] = []
    for j in range(layers):
        side_count = layers - j
        z = alt + j * dz
        half = (side_count - 1) / 2.0
        for iy in range(side_count):
            for ix in range(side_count):
                if len(out) == n:
                    return out
                out.append(Vec3((ix - half) * step, (iy - half) * step, z))
    return out


def _sphere(n: int, radius: float, alt: float) -> List[Vec3]:
    frac = 1.0 - 1.0 / GOLDEN_RATIO
    out = []
    for k in range(n):
        z = 1.0 - 2.0 * (k + 0.5) / n
        az = TWO_PI * k * frac
        r_xy = math.sqrt(max(0.0, 1.0 - z * z))
        out.append(
            Vec3(radius * r_xy * math.cos(az), radius * r_xy * math.sin(az), alt + radius * z)
        )
    return out


def generate(spec: FormationSpec) -> Formation:
    """Generate slot poses for the requested shape. All yaws are 0."""
    spec.validate()
    n, size, alt = spec.n, spec.size_param, spec.altitude

    if n == 1 and spec.kind not in (FormationKind.CIRCLE, FormationKind.SPHERE):
        # Degenerate lattices (cube/pyramid spacing would divide by zero)
        # collapse to a single slot at the shape origin. Circle and sphere
        # keep their formula so the single slot still sits on the radius.
        positions = [Vec3(0.0, 0.0, alt)]
    elif spec.kind is FormationKind.LINE:
        positions = _line(n, size, alt)
    elif spec.kind is FormationKind.CIRCLE:
        positions = _circle(n, size, alt)
    elif spec.kind is FormationKind.SQUARE:
        positions = _square(n, size, alt)
    elif spec.kind is FormationKind.TRIANGLE:
        positions = _triangle(n, size, alt)
    elif spec.kind is FormationKind.CUBE:
        positions = _cube(n, size, alt)
    elif spec.kind is FormationKind.PYRAMID:
        positions = _pyramid(n, size, spec.height, alt)
    elif spec.kind is FormationKind.SPHERE:
        positions = _sphere(n, size, alt)
    else:  # pragma: no cover - enum is closed
        raise InvalidSpec(f"unknown formation kind {spec.kind!r}")

    return Formation(tuple(Pose(p, 0.0) for p in positions))


# --- transformations --------------------------------------------------------


def translate(f: Formation, v: Vec3) -> Formation:
    """Shift every slot by v. Yaws are unchanged."""
    return Formation(tuple(Pose(p.position + v, p.yaw) for p in f.slots))


def scale(f: Formation, factor: float) -> Formation:
    """Scale slot positions about the formation centroid."""
    if not (math.isfinite(factor) and factor > 0.0):
        raise InvalidFactor(f"scale factor must be > 0, got {factor!r}")
    c = f.centroid()
    return Formation(
        tuple(Pose(c + (p.position - c).scaled(factor), p.yaw) for p in f.slots)
    )


def rotate(f: Formation, yaw_angle: float) -> Formation:
    """Rotate slots about the vertical axis through the centroid.

    Slot yaws are incremented by the same angle and renormalized.
    """
    c = f.centroid()
    ca, sa = math.cos(yaw_angle), math.sin(yaw_angle)
    slots = []
    for p in f.slots:
        r = p.position - c
        slots.append(
            Pose(
                Vec3(c.x + ca * r.x - sa * r.y, c.y + sa * r.x + ca * r.y, c.z + r.z),
                p.yaw + yaw_angle,
            )
        )
    return Formation(tuple(slots))


# --- assignment -------------------------------------------------------------

MAX_ASSIGN_SIZE = 256
_COST_TOL = 1e-9


def _optimal_cost(cost: np.ndarray) -> float:
    if cost.size == 0:
        return 0.0
    rows, cols = linear_sum_assignment(cost)
    return float(cost[rows, cols].sum())


def assign(current: Sequence[Vec3], target: Formation) -> Assignment:
    """Match drones to slots minimizing the total squared distance.

    Among cost-optimal matchings (within 1e-9) the lexicographically
    smallest slot_of is returned, so equal-cost inputs assign predictably.
    """
    n = len(current)
    if n != target.n:
        raise SizeMismatch(f"{n} drones vs {target.n} slots")
    if n > MAX_ASSIGN_SIZE:
        raise SizeMismatch(f"assignment limited to {MAX_ASSIGN_SIZE} drones, got {n}")

    cur = np.array([p.as_tuple() for p in current], dtype=float)
    tgt = target.positions()
    diff = cur[:, None, :] - tgt[None, :, :]
    cost = np.einsum("ijk,ijk->ij", diff, diff)

    best_total = _optimal_cost(cost)
    tol = _COST_TOL * max(1.0, abs(best_total))

    # Fix rows one at a time, always choosing the smallest slot index that
    # still admits an optimal completion of the remaining drones.
    remaining = list(range(n))
    slot_of = [0] * n
    prefix = 0.0
    for i in range(n):
        rest_rows = np.arange(i + 1, n)
        for pos, j in enumerate(remaining):
            rest_cols = remaining[:pos] + remaining[pos + 1 :]
            sub = cost[np.ix_(rest_rows, rest_cols)] if len(rest_rows) else np.empty((0, 0))
            if prefix + cost[i, j] + _optimal_cost(sub) <= best_total + tol:
                slot_of[i] = j
                prefix += cost[i, j]
                remaining.pop(pos)
                break
        else:  # pragma: no cover - the optimum always admits a completion
            raise RuntimeError("assignment refinement failed to complete")

    total = float(sum(cost[i, slot_of[i]] for i in range(n)))
    return Assignment(tuple(slot_of), total)
