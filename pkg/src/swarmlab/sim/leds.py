"""LED effect engine: deterministic per-frame colors for the whole swarm.

Every effect is a pure function of (spec, n, frame_index, seed), so light
shows replay identically for a given seed. Group selectors mask drones out
of an effect by returning None for them, which means "keep previous color".

Effect formulas (t = frame_index * frame_dt, rate in Hz):

    fill          constant base color
    fade          channel scale = frac(t * rate), repeating black-to-color ramp
    flash         base color while t < 1/rate, then off permanently
    blink         on when floor(2 * rate * t) is even
    blink_fast    on when floor(8 * rate * t) is even (4x blink frequency)
    wipe          drones 0..min(n, floor(t * rate) + 1)-1 colored, rest off
    rainbow       static hue_k = 360 * k / n per drone k
    rainbow_fill  shared hue(t) = 360 * rate * t mod 360

Example:
    >>> spec = EffectSpec(EffectKind.FILL, LedGroup.ALL, Color(255, 0, 0), 1.0)
    >>> led_frame(spec, 3, 0, seed=0)
    [Color(r=255, g=0, b=0), Color(r=255, g=0, b=0), Color(r=255, g=0, b=0)]
"""

from __future__ import annotations

import colorsys
import math
import random
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Set


class EffectKind(Enum):
    FILL = "fill"
    FADE = "fade"
    FLASH = "flash"
    BLINK = "blink"
    BLINK_FAST = "blink_fast"
    WIPE = "wipe"
    RAINBOW = "rainbow"
    RAINBOW_FILL = "rainbow_fill"


class LedGroup(Enum):
    ALL = "all"
    RANDOM = "random"
    EVEN = "even"
    ODD = "odd"
    FORMATION_2D = "formation_2d"


@dataclass(frozen=True)
class Color:
    """One RGB LED color with 8-bit channels."""

    r: int
    g: int
    b: int

    def __post_init__(self) -> None:
        for name in ("r", "g", "b"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, int):
                raise ValueError(f"channel {name} must be an integer, got {v!r}")
            if not 0 <= v <= 255:
                raise ValueError(f"channel {name} out of range 0..255: {v}")

    def scaled(self, factor: float) -> "Color":
        """Scale each channel by factor in [0, 1], rounding to nearest."""
        return Color(round(self.r * factor), round(self.g * factor), round(self.b * factor))

    def as_tuple(self) -> tuple:
        return (self.r, self.g, self.b)


OFF = Color(0, 0, 0)


@dataclass(frozen=True)
class EffectSpec:
    """A requested light show: what to display and which drones join in."""

    effect: EffectKind
    group: LedGroup
    base_color: Color
    rate: float

    def __post_init__(self) -> None:
        if not isinstance(self.effect, EffectKind):
            raise ValueError(f"effect must be an EffectKind, got {self.effect!r}")
        if not isinstance(self.group, LedGroup):
            raise ValueError(f"group must be a LedGroup, got {self.group!r}")
        if not (isinstance(self.rate, (int, float)) and self.rate > 0.0):
            raise ValueError(f"rate must be > 0, got {self.rate!r}")


def hue_color(hue_deg: float) -> Color:
    """Fully saturated, full-value color for a hue in degrees."""
    h = (hue_deg % 360.0) / 360.0
    r, g, b = colorsys.hsv_to_rgb(h, 1.0, 1.0)
    return Color(round(255 * r), round(255 * g), round(255 * b))


def group_members(
    group: LedGroup,
    n: int,
    seed: int,
    members: Optional[Set[int]] = None,
) -> Set[int]:
    """Drone ids participating in an effect.

    Args:
        group: the group selector.
        n: swarm size; ids are 0..n-1.
        seed: fixed at effect start; the Random group draws one Bernoulli(1/2)
            per drone id in order from this seed.
        members: externally computed membership, required meaning for
            Formation2D (the engine supplies drones at the swarm's modal
            altitude); ignored by the other groups.
    """
    if group is LedGroup.ALL:
        return set(range(n))
    if group is LedGroup.EVEN:
        return {i for i in range(n) if i % 2 == 0}
    if group is LedGroup.ODD:
        return {i for i in range(n) if i % 2 == 1}
    if group is LedGroup.RANDOM:
        rng = random.Random(seed)
        return {i for i in range(n) if rng.random() < 0.5}
    if members is None:
        return set(range(n))
    return {i for i in members if 0 <= i < n}


def _effect_color(spec: EffectSpec, n: int, drone_id: int, t: float) -> Color:
    kind = spec.effect
    base = spec.base_color
    rate = spec.rate
    if kind is EffectKind.FILL:
        return base
    if kind is EffectKind.FADE:
        frac = (t * rate) - math.floor(t * rate)
        return base.scaled(frac)
    if kind is EffectKind.FLASH:
        return base if t < 1.0 / rate else OFF
    if kind is EffectKind.BLINK:
        return base if math.floor(2.0 * rate * t) % 2 == 0 else OFF
    if kind is EffectKind.BLINK_FAST:
        return base if math.floor(8.0 * rate * t) % 2 == 0 else OFF
    if kind is EffectKind.WIPE:
        colored = min(n, math.floor(t * rate) + 1)
        return base if drone_id < colored else OFF
    if kind is EffectKind.RAINBOW:
        return hue_color(360.0 * drone_id / n)
    return hue_color(360.0 * rate * t)


def led_frame(
    spec: EffectSpec,
    n: int,
    frame_index: int,
    seed: int,
    frame_dt: float = 0.05,
    members: Optional[Set[int]] = None,
) -> List[Optional[Color]]:
    """Colors for one frame of an effect.

    Returns a list of length n; entry k is drone k's color, or None when the
    drone is outside the effect's group and must keep its previous color.
    Deterministic: identical arguments always produce identical output.

    Args:
        spec: the active effect.
        n: swarm size (>= 1).
        frame_index: frames elapsed since the effect started, from 0.
        seed: the seed fixed when the effect started.
        frame_dt: seconds of effect time per frame.
        members: Formation2D membership computed by the caller.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if frame_index < 0:
        raise ValueError(f"frame_index must be >= 0, got {frame_index}")
    active = group_members(spec.group, n, seed, members)
    t = frame_index * frame_dt
    return [
        _effect_color(spec, n, i, t) if i in active else None
        for i in range(n)
    ]
