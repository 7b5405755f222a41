"""Bus, safe-area, wire message and station service tests."""

import json

import pytest

from swarmlab.blocks.model import AlreadyRunning, NotPrompting, NotRunning
from swarmlab.geometry import Vec3
from swarmlab.sim.drone import Mode
from swarmlab.sim.engine import SimConfig, SwarmSim
from swarmlab.station.bus import MessageBus, UnknownTopic
from swarmlab.station.messages import (
    PUBLISH_ALLOWLIST,
    ProtocolError,
    decode_client_frame,
    encode_event,
    encode_protocol_error,
    encode_response,
    validate_manual_cmd,
)
from swarmlab.station.safearea import SafeArea, SafeAreaGuard
from swarmlab.station.station import MAX_KEPT_TRACES, Station, UnknownService

WAIT_PROGRAM = {
    "version": 1,
    "name": "waiter",
    "blocks": [
        {"id": "to", "kind": "TakeoffAll", "params": {"z": 1.0}, "children": {}},
        {"id": "w", "kind": "Wait", "params": {"seconds": 60.0}, "children": {}},
    ],
}

TINY_PROGRAM = {
    "version": 1,
    "name": "tiny",
    "blocks": [
        {"id": "s", "kind": "SetVar", "params": {"var": "x", "value": 1.0},
         "children": {}},
    ],
}


def make_station(tmp_path, n=2, **kw):
    return Station(n_drones=n, program_dir=tmp_path / "programs", **kw)


def resolve(station, fut, max_steps=5):
    for _ in range(max_steps):
        station.step_once()
        if fut.done():
            return fut.result(timeout=0)
    raise AssertionError("future did not resolve")


class TestBus:
    def test_register_and_publish_counts(self):
        bus = MessageBus(clock=lambda: 1.5)
        bus.register_topic("a", "thing")
        got = []
        bus.subscribe("a", got.append)
        bus.publish("a", 1)
        bus.publish("a", 2)
        assert got == [1, 2]
        info = bus.topics()[0]
        assert info.publish_count == 2
        assert info.last_publish_sim_time == 1.5
        assert info.message_kind == "thing"

    def test_duplicate_topic_rejected(self):
        bus = MessageBus()
        bus.register_topic("a", "x")
        with pytest.raises(ValueError):
            bus.register_topic("a", "x")

    def test_unknown_topic(self):
        bus = MessageBus()
        with pytest.raises(UnknownTopic):
            bus.publish("ghost", 0)
        with pytest.raises(UnknownTopic):
            bus.subscribe("ghost", print)

    def test_unsubscribe_stops_delivery(self):
        bus = MessageBus()
        bus.register_topic("a", "x")
        got = []
        sub = bus.subscribe("a", got.append)
        bus.publish("a", 1)
        bus.unsubscribe(sub)
        bus.publish("a", 2)
        assert got == [1]

    def test_raising_callback_detached(self):
        bus = MessageBus()
        bus.register_topic("a", "x")
        calls = []

        def bad(payload):
            calls.append(payload)
            raise RuntimeError("boom")

        good = []
        bus.subscribe("a", bad)
        bus.subscribe("a", good.append)
        bus.publish("a", 1)
        bus.publish("a", 2)
        assert calls == [1]
        assert good == [1, 2]
        assert bus.dropped_callbacks and "boom" in bus.dropped_callbacks[0]

    def test_topics_sorted(self):
        bus = MessageBus()
        for name in ("zeta", "alpha", "mid"):
            bus.register_topic(name, "x")
        assert [t.name for t in bus.topics()] == ["alpha", "mid", "zeta"]


class TestSafeArea:
    def test_boundary_is_inside(self):
        area = SafeArea(Vec3(-1, -1, 0), Vec3(1, 1, 2), enabled=True)
        assert area.contains(Vec3(1.0, 1.0, 2.0))
        assert area.contains(Vec3(-1.0, -1.0, 0.0))
        assert not area.contains(Vec3(1.0000001, 0.0, 1.0))

    def test_enabled_requires_ordered_bounds(self):
        with pytest.raises(ValueError):
            SafeArea(Vec3(1, 0, 0), Vec3(0, 1, 1), enabled=True)
        SafeArea(Vec3(1, 0, 0), Vec3(0, 1, 1), enabled=False)

    def test_dict_roundtrip(self):
        area = SafeArea(Vec3(-2, -2, 0), Vec3(2, 2, 3), enabled=True)
        assert SafeArea.from_dict(area.to_dict()) == area

    def test_from_dict_rejects_unknown(self):
        with pytest.raises(ValueError):
            SafeArea.from_dict({"min": [0, 0, 0], "max": [1, 1, 1], "shape": "box"})
        with pytest.raises(ValueError):
            SafeArea.from_dict({"min": [0, 0]})

    def test_disabled_guard_never_fires(self):
        sim = SwarmSim(1, SimConfig())
        guard = SafeAreaGuard()
        sim.command_takeoff_all(5.0)
        for _ in range(40):
            sim.tick()
            assert guard.check(sim) == []

    def test_one_event_per_episode_and_landing(self):
        sim = SwarmSim(1, SimConfig())
        guard = SafeAreaGuard(SafeArea(Vec3(-10, -10, 0), Vec3(10, 10, 0.5),
                                       enabled=True))
        sim.command_takeoff_all(2.0)
        events = []
        landing_tick = None
        violation_tick = None
        for k in range(200):
            sim.tick()
            new = guard.check(sim)
            events.extend(new)
            if new and violation_tick is None:
                violation_tick = k
            d = sim.drones[0]
            if landing_tick is None and d.mode is Mode.LANDING:
                landing_tick = k
            if d.mode is Mode.LANDED:
                break
        assert len(events) == 1
        assert events[0]["drone"] == 0
        assert events[0]["z"] > 0.5
        # force-land staged by the check lands the drone on the next tick
        assert landing_tick is not None and landing_tick - violation_tick <= 1
        assert guard.check(sim) == []

    def test_landed_outside_is_not_a_violation(self):
        sim = SwarmSim(1, SimConfig())
        guard = SafeAreaGuard(SafeArea(Vec3(5, 5, 0), Vec3(6, 6, 1), enabled=True))
        sim.tick()
        assert guard.check(sim) == []


class TestMessages:
    def test_decode_ops(self):
        assert decode_client_frame('{"op":"subscribe","topic":"telemetry"}') == {
            "op": "subscribe", "topic": "telemetry",
        }
        frame = decode_client_frame(
            '{"op":"call","service":"run","id":"7","payload":{}}'
        )
        assert frame["service"] == "run"

    @pytest.mark.parametrize("text", [
        "not json",
        "[1,2]",
        '{"op":"event","topic":"t"}',
        '{"op":"response","ok":true}',
        '{"op":"fly"}',
        '{"op":"subscribe"}',
        '{"op":"subscribe","topic":""}',
        '{"op":"subscribe","topic":"t","service":"s"}',
        '{"op":"subscribe","topic":"t","extra":1}',
        '{"op":"publish","topic":"t"}',
        '{"op":"call","service":"run"}',
        '{"op":"call","service":"run","id":7}',
        '{"op":"call","service":"run","id":"7","topic":"t"}',
        '{"op":"call","service":"","id":"7"}',
        '{"op":"subscribe","topic":"t","ok":true}',
    ])
    def test_decode_rejects(self, text):
        with pytest.raises(ProtocolError):
            decode_client_frame(text)

    def test_allowlist_is_manual_cmd_only(self):
        assert PUBLISH_ALLOWLIST == frozenset({"manual_cmd"})

    def test_manual_cmd_validation(self):
        out = validate_manual_cmd({"drone": 0, "vx": 1, "vy": 0.5, "vz": -0.5})
        assert out == {"drone": 0, "vx": 1.0, "vy": 0.5, "vz": -0.5, "yaw_rate": 0.0}
        for bad in (
            None,
            [],
            {"drone": "0", "vx": 0, "vy": 0, "vz": 0},
            {"drone": True, "vx": 0, "vy": 0, "vz": 0},
            {"drone": 0, "vx": "fast", "vy": 0, "vz": 0},
            {"drone": 0, "vx": 0, "vy": 0},
            {"drone": 0, "vx": 0, "vy": 0, "vz": 0, "boost": 1},
            {"drone": 0, "vx": 0, "vy": 0, "vz": 0, "yaw_rate": "spin"},
        ):
            with pytest.raises(ProtocolError):
                validate_manual_cmd(bad)

    def test_encode_shapes(self):
        assert json.loads(encode_event("running", True)) == {
            "op": "event", "topic": "running", "payload": True,
        }
        assert json.loads(encode_response("5", True, {"a": 1})) == {
            "op": "response", "ok": True, "id": "5", "payload": {"a": 1},
        }
        assert json.loads(encode_response(None, False, None)) == {
            "op": "response", "ok": False, "payload": None,
        }
        doc = json.loads(encode_protocol_error("bad frame"))
        assert doc["topic"] == "protocol_error"
        assert doc["payload"] == {"reason": "bad frame"}


class TestStationServices:
    def test_run_lifecycle_and_events(self, tmp_path):
        st = make_station(tmp_path)
        seen = []
        for topic in ("running", "block", "error"):
            st.bus.subscribe(topic, lambda p, t=topic: seen.append((t, p)))
        fut = st.call_async("run", {"program": TINY_PROGRAM})
        out = resolve(st, fut)
        assert out == {"run_id": "run-001"}
        for _ in range(5):
            st.step_once()
        assert st.active_run_id is None
        assert seen == [("running", True), ("block", "s"), ("running", False)]
        trace = st.get_trace("run-001")
        assert trace is not None and trace.error is None
        assert len(trace) >= 1

    def test_run_ids_increment(self, tmp_path):
        st = make_station(tmp_path)
        assert resolve(st, st.call_async("run", {"program": TINY_PROGRAM}))[
            "run_id"] == "run-001"
        for _ in range(5):
            st.step_once()
        assert resolve(st, st.call_async("run", {"program": TINY_PROGRAM}))[
            "run_id"] == "run-002"

    def test_already_running(self, tmp_path):
        st = make_station(tmp_path)
        resolve(st, st.call_async("run", {"program": WAIT_PROGRAM}))
        fut = st.call_async("run", {"program": TINY_PROGRAM})
        st.step_once()
        with pytest.raises(AlreadyRunning):
            fut.result(timeout=0)

    def test_stop_requires_active_run(self, tmp_path):
        st = make_station(tmp_path)
        fut = st.call_async("stop")
        st.step_once()
        with pytest.raises(NotRunning):
            fut.result(timeout=0)

    def test_stop_ends_run(self, tmp_path):
        st = make_station(tmp_path)
        resolve(st, st.call_async("run", {"program": WAIT_PROGRAM}))
        for _ in range(30):
            st.step_once()
        assert st.active_run_id == "run-001"
        resolve(st, st.call_async("stop"))
        st.step_once()
        st.step_once()
        assert st.active_run_id is None

    def test_land_all_during_run(self, tmp_path):
        st = make_station(tmp_path)
        resolve(st, st.call_async("run", {"program": WAIT_PROGRAM}))
        while not all(d.mode is Mode.HOVERING for d in st.sim.drones):
            st.step_once()
        fut = st.call_async("land_all")
        st.step_once()
        assert fut.result(timeout=0) == {"landing": True}
        st.step_once()
        assert all(d.mode in (Mode.LANDING, Mode.LANDED) for d in st.sim.drones)
        assert st.active_run_id is None

    def test_land_all_idle(self, tmp_path):
        st = make_station(tmp_path)
        st.sim.command_takeoff_all(1.0)
        while not all(d.mode is Mode.HOVERING for d in st.sim.drones):
            st.step_once()
        resolve(st, st.call_async("land_all"))
        for _ in range(60):
            st.step_once()
        assert st.sim.all_landed()

    def test_store_load_list(self, tmp_path):
        st = make_station(tmp_path)
        out = resolve(st, st.call_async("store", {"name": "tiny",
                                                  "program": TINY_PROGRAM}))
        assert out == {"name": "tiny"}
        out = resolve(st, st.call_async("list_programs"))
        assert out == {"programs": ["tiny"]}
        out = resolve(st, st.call_async("load", {"name": "tiny"}))
        assert out["program"]["name"] == "tiny"
        # stored wire form is canonical: parse(serialize) is idempotent
        assert out["program"]["blocks"][0]["kind"] == "SetVar"

    def test_run_stored_program(self, tmp_path):
        st = make_station(tmp_path)
        resolve(st, st.call_async("store", {"name": "tiny", "program": TINY_PROGRAM}))
        out = resolve(st, st.call_async("run", {"name": "tiny"}))
        assert out["run_id"] == "run-001"

    def test_spawn(self, tmp_path):
        st = make_station(tmp_path, n=2)
        out = resolve(st, st.call_async("spawn", {"n": 5}))
        assert out == {"n": 5}
        st.step_once()
        assert st.sim.n == 5

    def test_spawn_rejects_bad_n(self, tmp_path):
        st = make_station(tmp_path)
        for bad in (None, "5", True, 1.5):
            fut = st.call_async("spawn", {"n": bad})
            st.step_once()
            with pytest.raises(ValueError):
                fut.result(timeout=0)

    def test_spawn_blocked_during_run(self, tmp_path):
        st = make_station(tmp_path)
        resolve(st, st.call_async("run", {"program": WAIT_PROGRAM}))
        fut = st.call_async("spawn", {"n": 3})
        st.step_once()
        with pytest.raises(AlreadyRunning):
            fut.result(timeout=0)

    def test_answer_prompt(self, tmp_path):
        st = make_station(tmp_path)
        prog = {
            "version": 1,
            "name": "ask",
            "blocks": [
                {"id": "p", "kind": "Prompt",
                 "params": {"var": "x", "message": "value?"}, "children": {}},
            ],
        }
        prompts = []
        st.bus.subscribe("prompt", prompts.append)
        resolve(st, st.call_async("run", {"program": prog}))
        st.step_once()
        assert prompts == [{"block": "p", "var": "x", "message": "value?"}]
        resolve(st, st.call_async("answer_prompt", {"value": 2.5}))
        for _ in range(5):
            st.step_once()
        assert st.active_run_id is None
        assert st.get_trace("run-001").error is None

    def test_answer_prompt_requires_run(self, tmp_path):
        st = make_station(tmp_path)
        fut = st.call_async("answer_prompt", {"value": 1.0})
        st.step_once()
        with pytest.raises(NotPrompting):
            fut.result(timeout=0)

    def test_safe_area_services_and_violation(self, tmp_path):
        st = make_station(tmp_path, n=1)
        violations = []
        st.bus.subscribe("safe_area_violation", violations.append)
        out = resolve(st, st.call_async("set_safe_area", {
            "min": [-10, -10, 0], "max": [10, 10, 0.5], "enabled": True,
        }))
        assert out["enabled"] is True
        assert resolve(st, st.call_async("get_safe_area")) == out
        st.sim.command_takeoff_all(2.0)
        for _ in range(100):
            st.step_once()
            if st.sim.drones[0].mode is Mode.LANDED:
                break
        assert len(violations) == 1
        assert violations[0]["drone"] == 0

    def test_set_params_merges(self, tmp_path):
        st = make_station(tmp_path)
        out = resolve(st, st.call_async("set_params", {
            "nav_tolerance": 0.1, "d_safe": 0.7,
        }))
        assert out["nav_tolerance"] == 0.1
        assert out["d_safe"] == 0.7
        assert st.sim.config.d_safe == 0.7
        assert st.params.nav_tolerance == 0.1

    def test_set_params_validation(self, tmp_path):
        st = make_station(tmp_path)
        fut = st.call_async("set_params", {"d_safe": -1.0})
        st.step_once()
        with pytest.raises(ValueError):
            fut.result(timeout=0)
        fut = st.call_async("set_params", {"warp_speed": 9})
        st.step_once()
        with pytest.raises(TypeError):
            fut.result(timeout=0)

    def test_list_topics(self, tmp_path):
        st = make_station(tmp_path)
        out = resolve(st, st.call_async("list_topics"))
        names = {t["name"] for t in out["topics"]}
        assert names == {
            "running", "block", "error", "prompt", "telemetry",
            "safe_area_violation", "manual_cmd",
        }

    def test_unknown_service(self, tmp_path):
        st = make_station(tmp_path)
        fut = st.call_async("reboot")
        with pytest.raises(UnknownService) as exc_info:
            fut.result(timeout=0)
        assert "reboot" in str(exc_info.value)

    def test_trace_retention_cap(self, tmp_path):
        st = make_station(tmp_path)
        ids = []
        for _ in range(MAX_KEPT_TRACES + 2):
            out = resolve(st, st.call_async("run", {"program": TINY_PROGRAM}))
            ids.append(out["run_id"])
            for _ in range(5):
                st.step_once()
        assert st.get_trace(ids[0]) is None
        assert st.get_trace(ids[1]) is None
        for run_id in ids[2:]:
            assert st.get_trace(run_id) is not None

    def test_run_rejects_bad_payload(self, tmp_path):
        st = make_station(tmp_path)
        fut = st.call_async("run", {})
        st.step_once()
        with pytest.raises(ValueError):
            fut.result(timeout=0)
        fut = st.call_async("run", {"params": "fast", "program": TINY_PROGRAM})
        st.step_once()
        with pytest.raises(ValueError):
            fut.result(timeout=0)


class TestStationTelemetryAndManual:
    def test_telemetry_cadence_and_shape(self, tmp_path):
        cfg = SimConfig(tick_dt=0.05, telemetry_interval=0.1)
        st = make_station(tmp_path, n=2, config=cfg)
        frames = []
        st.bus.subscribe("telemetry", frames.append)
        for _ in range(20):
            st.step_once()
        assert len(frames) == 10
        assert set(frames[0]) == {"t", "drones"}
        assert len(frames[0]["drones"]) == 2
        assert "vx" in frames[0]["drones"][0]

    def test_manual_cmd_topic_drives_sim(self, tmp_path):
        st = make_station(tmp_path, n=1)
        st.sim.command_takeoff_all(1.0)
        while st.sim.drones[0].mode is not Mode.HOVERING:
            st.step_once()
        x0 = st.sim.drones[0].pose.position.x
        st.bus.publish("manual_cmd", {"drone": 0, "vx": 0.5, "vy": 0, "vz": 0})
        for _ in range(4):
            st.step_once()
        assert st.sim.drones[0].pose.position.x > x0

    def test_manual_cmd_error_reported_on_bus(self, tmp_path):
        st = make_station(tmp_path, n=1)
        errors = []
        st.bus.subscribe("error", errors.append)
        st.bus.publish("manual_cmd", {"drone": 0, "vx": 0.5, "vy": 0, "vz": 0})
        st.step_once()
        assert len(errors) == 1
        assert errors[0]["block"] is None
        assert "manual_cmd" in errors[0]["message"]

    def test_threaded_loop_and_shutdown(self, tmp_path):
        st = make_station(tmp_path, n=2, rtf_target=None)
        st.start()
        try:
            out = st.call("run", {"program": WAIT_PROGRAM}, timeout=5.0)
            assert out == {"run_id": "run-001"}
            deadline = 200
            while st.active_run_id is None and deadline:
                deadline -= 1
        finally:
            st.shutdown(land=True)
        assert st.sim.all_landed()
        assert st._thread is None
