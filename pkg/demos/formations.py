"""Generate a formation, transform it, and assign drones to its slots."""

import math

from swarmlab.geometry import (
    FormationKind,
    FormationSpec,
    assign,
    generate,
    rotate,
    scale,
)


def show(label, f):
    print(label)
    for i, slot in enumerate(f.slots):
        p = slot.position
        print(f"  slot {i}: ({p.x:6.2f}, {p.y:6.2f}, {p.z:5.2f})  yaw {slot.yaw:5.2f}")


def main():
    circle = generate(FormationSpec(FormationKind.CIRCLE, 6, 2.0, altitude=1.2))
    show("circle of six, radius 2.0 m:", circle)

    turned = rotate(scale(circle, 0.75), math.pi / 6)
    show("scaled to 75% and rotated 30 degrees:", turned)

    spawn = generate(FormationSpec(FormationKind.LINE, 6, 1.0, altitude=0.0))
    a = assign([s.position for s in spawn.slots], turned)
    print(f"assignment from the spawn line (total squared cost {a.total_cost:.3f}):")
    for drone, slot in enumerate(a.slot_of):
        print(f"  drone {drone} -> slot {slot}")


if __name__ == "__main__":
    main()
