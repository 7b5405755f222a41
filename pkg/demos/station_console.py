"""Drive a headless station through its service console, no HTTP involved."""

import tempfile
import time

from swarmlab.station.station import Station

PROGRAM = {
    "version": 1,
    "name": "hop",
    "blocks": [
        {"id": "to", "kind": "TakeoffAll", "params": {"z": 1.0}, "children": {}},
        {"id": "w", "kind": "Wait", "params": {"seconds": 1.0}, "children": {}},
        {"id": "la", "kind": "LandAll", "params": {}, "children": {}},
    ],
}


def main():
    with tempfile.TemporaryDirectory() as tmp:
        station = Station(n_drones=3, program_dir=tmp, rtf_target=None)
        station.bus.subscribe("running", lambda on: print(f"event: running={on}"))
        station.bus.subscribe("block", lambda bid: print(f"event: block {bid}"))
        station.start()
        try:
            print("services:", ", ".join(station.service_names()))
            station.call("set_safe_area",
                         {"min": [-10, -10, 0], "max": [10, 10, 5], "enabled": True})
            station.call("store", {"name": "hop", "program": PROGRAM})
            print("stored programs:", station.call("list_programs")["programs"])

            run_id = station.call("run", {"name": "hop"})["run_id"]
            print(f"started {run_id}")
            deadline = time.monotonic() + 30.0
            while station.active_run_id is not None:
                if time.monotonic() > deadline:
                    raise SystemExit("run did not finish in time")
                time.sleep(0.02)

            trace = station.get_trace(run_id)
            print(f"{run_id} finished: {len(trace)} ticks recorded, "
                  f"error={trace.error!r}")
            for info in station.call("list_topics")["topics"]:
                print(f"  topic {info['name']}: {info['publish_count']} messages")
        finally:
            station.shutdown(land=True)
        print("station shut down, all drones landed:", station.sim.all_landed())


if __name__ == "__main__":
    main()
