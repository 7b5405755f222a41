"""Detect a crossing conflict and watch the resolver clear it."""

from swarmlab.avoidance import Trajectory, cpa, detect, resolve
from swarmlab.geometry import Vec3


def main():
    # drone 1 cuts straight through drone 0's departure point
    plan = [
        Trajectory(0, Vec3(0.0, 0.0, 1.0), Vec3(0.0, 2.0, 1.0), 1.0),
        Trajectory(1, Vec3(0.6, 0.0, 1.0), Vec3(-1.4, 0.0, 1.0), 1.0),
    ]

    c = cpa(plan[0], plan[1])
    print(f"unresolved: closest approach {c.d_star:.3f} m at t={c.t_star:.2f} s "
          f"({c.scenario.value})")
    for found in detect(plan, d_safe=0.5):
        print(f"conflict between {found.pair}: below the 0.5 m bubble")

    out = resolve(plan, d_safe=0.5)
    for adj in out.adjustments:
        print(f"adjustment: drone {adj.drone_id} {adj.kind.value} {adj.amount:+.2f}")

    fixed = list(out.trajectories)
    c = cpa(fixed[0], fixed[1])
    print(f"resolved: closest approach {c.d_star:.3f} m at t={c.t_star:.2f} s")
    print("remaining conflicts:", detect(fixed, 0.5) or "none")


if __name__ == "__main__":
    main()
