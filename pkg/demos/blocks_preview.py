"""Author a block program in JSON, preview it offline, and plot the paths."""

import json
from pathlib import Path

from swarmlab.blocks.serialize import parse
from swarmlab.plotsvg import plot_trace
from swarmlab.sim.preview import preview_run

PROGRAM = {
    "version": 1,
    "name": "square-dance",
    "blocks": [
        {"id": "to", "kind": "TakeoffAll", "params": {"z": 1.0}, "children": {}},
        {"id": "form", "kind": "ApplyFormation",
         "params": {"kind": "square", "n": 4, "size": 2.0, "altitude": 1.0},
         "children": {}},
        {"id": "spin", "kind": "Repeat", "params": {"count": 2},
         "children": {"body": [
             {"id": "rot", "kind": "Rotate", "params": {"angle": 0.7853981633974483},
              "children": {}},
         ]}},
        {"id": "glow", "kind": "LedEffect",
         "params": {"effect": "rainbow", "group": "all", "r": 0, "g": 0, "b": 0,
                    "rate": 1.0},
         "children": {}},
        {"id": "home", "kind": "LandAll", "params": {}, "children": {}},
    ],
}


def main():
    program = parse(json.dumps(PROGRAM))
    trace = preview_run(program, n=4, seed=1)
    if trace.error:
        raise SystemExit(f"run failed: {trace.error}")

    last = trace.entries[-1]
    print(f"previewed {len(trace)} ticks ({last.t:.2f} s of sim time)")
    for row in last.drones:
        print(f"  drone {row['id']}: ({row['x']:5.2f}, {row['y']:5.2f}, "
              f"{row['z']:4.2f})  battery {row['battery']:.3f}")

    out = Path("square-dance.svg")
    plot_trace(trace, out)
    trace.save("square-dance.trace.jsonl")
    print(f"wrote {out} and square-dance.trace.jsonl")


if __name__ == "__main__":
    main()
