"""Acceptance checklist: the package's top-level guarantees, one test each.

Every test covers one shipped guarantee end to end and prints a single
checklist line (visible with -s, and on failure), so a verbose run doubles
as an acceptance report. Expected values come from the independent oracles
in oracles.py, never from the code under test.
"""

import json
import math
import random
import time
from contextlib import contextmanager

import numpy as np

from swarmlab.avoidance import Trajectory, Unresolvable, cpa, resolve
from swarmlab.blocks.interpreter import Interpreter
from swarmlab.blocks.model import (
    Block,
    BlockKind,
    BlockProgram,
    RuntimeParams,
    Status,
)
from swarmlab.blocks.serialize import parse, serialize
from swarmlab.blocks.storage import ProgramStore
from swarmlab.geometry import (
    Formation,
    FormationKind,
    FormationSpec,
    Pose,
    Vec3,
    assign,
    generate,
    normalize_yaw,
    rotate,
    scale,
    translate,
)
from swarmlab.sim.drone import Mode
from swarmlab.sim.engine import SimConfig, SwarmSim
from swarmlab.sim.leds import Color, EffectKind, EffectSpec, LedGroup, led_frame
from swarmlab.sim.preview import preview_run
from swarmlab.sim.rtf import bench
from swarmlab.station.safearea import SafeArea, SafeAreaGuard
from oracles import (
    brute_force_assign,
    hsv_channels,
    led_reference,
    publication_oracle,
    random_program,
    sampled_min_separation,
    sampled_pair_min,
)


@contextmanager
def criterion(name):
    start = time.perf_counter()
    try:
        yield
    except BaseException:
        print(f"[ACCEPTANCE] {name}: FAIL")
        raise
    print(f"[ACCEPTANCE] {name}: PASS ({time.perf_counter() - start:.2f}s)")


def spec_for(kind, n, size=2.0, altitude=1.0):
    height = 1.5 if kind is FormationKind.PYRAMID else 0.0
    return FormationSpec(kind, n, size, height=height, altitude=altitude)


def pairwise_distances(f):
    pos = f.positions()
    diff = pos[:, None, :] - pos[None, :, :]
    return np.sqrt((diff ** 2).sum(axis=2))


def random_formation(rng):
    kind = rng.choice(list(FormationKind))
    f = generate(spec_for(kind, rng.randint(1, 12), rng.uniform(0.5, 5.0)))
    return translate(f, Vec3(rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(0, 3)))


def test_geometry_suite():
    """Every kind generates valid slots for n 1..12; shape invariants hold."""
    with criterion("geometry suite"):
        start = time.perf_counter()

        for kind in FormationKind:
            for n in range(1, 13):
                f = generate(spec_for(kind, n))
                assert f.n == n, (kind, n)

        # circle and sphere: every slot sits on the commanded radius
        for kind in (FormationKind.CIRCLE, FormationKind.SPHERE):
            for n in range(1, 13):
                f = generate(spec_for(kind, n, 2.0, altitude=1.0))
                for slot in f.slots:
                    p = slot.position
                    r = math.sqrt(p.x ** 2 + p.y ** 2 + (p.z - 1.0) ** 2)
                    assert abs(r - 2.0) <= 1e-9, (kind, n)

        # square n=4: the four exact corners, in walk order
        f = generate(spec_for(FormationKind.SQUARE, 4, 2.0, altitude=1.0))
        want = [(-1.0, -1.0, 1.0), (1.0, -1.0, 1.0), (1.0, 1.0, 1.0), (-1.0, 1.0, 1.0)]
        for slot, w in zip(f.slots, want):
            got = slot.position.as_tuple()
            assert max(abs(g - v) for g, v in zip(got, w)) <= 1e-9, (got, w)

        # triangle n=3: equilateral with the commanded side length
        side = 2.0
        f = generate(spec_for(FormationKind.TRIANGLE, 3, side, altitude=0.0))
        d = pairwise_distances(f)
        for i in range(3):
            for j in range(3):
                if i != j:
                    assert abs(d[i, j] - side) <= 1e-9
        assert abs(f.slots[0].position.x) <= 1e-9
        assert abs(f.slots[0].position.y - side / math.sqrt(3)) <= 1e-9

        # cube n=8 with size 1: the unit-cube corners
        f = generate(spec_for(FormationKind.CUBE, 8, 1.0, altitude=0.0))
        got = sorted(s.position.as_tuple() for s in f.slots)
        want = sorted(
            (float(x), float(y), float(z))
            for x in (0, 1) for y in (0, 1) for z in (0, 1)
        )
        for g, w in zip(got, want):
            assert max(abs(a - b) for a, b in zip(g, w)) <= 1e-9, (g, w)

        assert time.perf_counter() - start < 1.0


def test_transformation_isometry():
    """1000 random formations: rotate/translate are isometries, scale is linear."""
    with criterion("transformation isometry"):
        rng = random.Random(20260817)
        for _ in range(1000):
            f = random_formation(rng)
            d0 = pairwise_distances(f)

            angle = rng.uniform(-2 * math.pi, 2 * math.pi)
            assert np.abs(pairwise_distances(rotate(f, angle)) - d0).max() <= 1e-9

            v = Vec3(rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-2, 2))
            assert np.abs(pairwise_distances(translate(f, v)) - d0).max() <= 1e-9

            factor = rng.uniform(0.2, 3.0)
            d1 = pairwise_distances(scale(f, factor))
            assert np.abs(d1 - d0 * factor).max() <= 1e-9

            full = rotate(f, 2 * math.pi)
            for a, b in zip(full.slots, f.slots):
                assert abs(a.position.x - b.position.x) <= 1e-9
                assert abs(a.position.y - b.position.y) <= 1e-9
                assert abs(a.position.z - b.position.z) <= 1e-9
                assert abs(normalize_yaw(a.yaw - b.yaw)) <= 1e-9


def test_assignment_optimality():
    """100 random instances per n in 2..6 match the brute-force optimum."""
    with criterion("assignment optimality"):
        start = time.perf_counter()
        rng = random.Random(4)
        for n in range(2, 7):
            for _ in range(100):
                current = [
                    Vec3(rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(0, 3))
                    for _ in range(n)
                ]
                targets = [
                    Vec3(rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(0, 3))
                    for _ in range(n)
                ]
                target = Formation(tuple(Pose(p, 0.0) for p in targets))
                a = assign(current, target)
                _, want_cost = brute_force_assign(
                    [p.as_tuple() for p in current],
                    [p.as_tuple() for p in targets],
                )
                assert abs(a.total_cost - want_cost) <= 1e-9, (n, a.total_cost, want_cost)
                assert sorted(a.slot_of) == list(range(n))
        assert time.perf_counter() - start < 10.0


def test_cpa_oracle():
    """Analytic closest approach agrees with 1 ms dense sampling on 1000 pairs."""
    with criterion("closest-approach oracle"):
        rng = random.Random(11)

        def random_traj(i):
            start = Vec3(rng.uniform(-6, 6), rng.uniform(-6, 6), rng.uniform(0, 4))
            goal = Vec3(rng.uniform(-6, 6), rng.uniform(-6, 6), rng.uniform(0, 4))
            depart = rng.choice([0.0, 0.0, rng.uniform(0.0, 3.0)])
            return Trajectory(i, start, goal, rng.uniform(0.4, 2.5), depart)

        for _ in range(1000):
            a, b = random_traj(0), random_traj(1)
            c = cpa(a, b)
            _, d_sampled = sampled_pair_min(a, b, dt=1e-3)
            assert abs(c.d_star - d_sampled) <= 1e-3, (c, d_sampled)
            # the sampled grid can only overestimate the true minimum
            assert c.d_star <= d_sampled + 1e-6, (c, d_sampled)


def test_resolution_safety():
    """200 random 10-drone transitions: safe plan or Unresolvable, nothing else."""
    with criterion("resolution safety"):
        rng = random.Random(77)
        d_safe = 0.5

        def spaced_points(n, min_gap):
            pts = []
            while len(pts) < n:
                cand = (rng.uniform(-8, 8), rng.uniform(-8, 8), rng.uniform(0.5, 3.0))
                if all(math.dist(cand, p) >= min_gap for p in pts):
                    pts.append(cand)
            return pts

        solved = unresolvable = 0
        for _ in range(200):
            starts = spaced_points(10, 2.0 * d_safe)
            goals = spaced_points(10, 2.0 * d_safe)
            plan = []
            for i in range(10):
                if rng.random() < 0.15:
                    plan.append(Trajectory(i, Vec3(*starts[i]), Vec3(*starts[i]), 0.0))
                else:
                    plan.append(Trajectory(i, Vec3(*starts[i]), Vec3(*goals[i]),
                                           rng.uniform(0.5, 2.0)))
            try:
                out = resolve(plan, d_safe)
            except Unresolvable:
                unresolvable += 1
                continue
            solved += 1
            sep = sampled_min_separation(out.trajectories)
            assert sep >= 0.499, f"resolved plan separates only {sep:.4f} m"

        # any outcome besides a safe plan or Unresolvable fails the test
        assert solved + unresolvable == 200
        assert solved > 0


def test_interpreter_lifecycle():
    """Publication order, stop latency and serialization roundtrips hold."""
    with criterion("interpreter lifecycle"):
        rng = random.Random(20260817)
        programs = []
        for _ in range(500):
            d, answers = random_program(rng)
            programs.append((d, answers))
            p = parse(json.dumps(d).encode())
            published = []
            preview_run(p, n=1,
                        publish=lambda t, pl: published.append((t, pl)),
                        answers=answers)
            blocks = [pl for t, pl in published if t == "block"]
            assert blocks == publication_oracle(d, answers)
            running = [pl for t, pl in published if t == "running"]
            assert running == [True, False]

        # stop latency: a run in a long wait finishes within two steps
        program = BlockProgram(name="slow", blocks=(
            Block("to", BlockKind.TAKEOFF_ALL, {"z": 1.0}),
            Block("w", BlockKind.WAIT, {"seconds": 60.0}),
        ))
        sim = SwarmSim(1, SimConfig(), seed=0)
        published = []
        interp = Interpreter(program, RuntimeParams(), sim,
                             lambda t, pl: published.append((t, pl)))
        while sim.sim_time < 2.0:
            interp.step()
            sim.tick()
        assert interp.state.status is Status.RUNNING
        interp.request_stop()
        steps = 0
        while not interp.finished:
            interp.step()
            sim.tick()
            steps += 1
        assert steps <= 2
        assert [pl for t, pl in published if t == "running"] == [True, False]


def test_serialization_roundtrips(tmp_path):
    """parse/serialize and store/load reproduce documents byte for byte."""
    with criterion("serialization roundtrips"):
        rng = random.Random(5)
        store = ProgramStore(tmp_path)
        for i in range(50):
            d, _ = random_program(rng)
            data = serialize(parse(json.dumps(d).encode()))
            assert serialize(parse(data)) == data
            name = f"prog-{i}"
            store.store(name, parse(data))
            assert store.read_bytes(name) == data
            assert serialize(store.load(name)) == data


def test_trace_determinism():
    """Identical (program, seed, params, n) gives bitwise-identical traces."""
    with criterion("trace determinism"):
        flight = BlockProgram(name="flight", blocks=(
            Block("to", BlockKind.TAKEOFF_ALL, {"z": 1.0}),
            Block("nav", BlockKind.NAVIGATE,
                  {"drone": -1, "x": 1.0, "y": 1.0, "z": 1.0, "speed": 1.0}),
            Block("led", BlockKind.LED_EFFECT,
                  {"effect": "rainbow_fill", "group": "random", "r": 0, "g": 0,
                   "b": 0, "rate": 1.0}),
            Block("la", BlockKind.LAND_ALL),
        ))
        params = RuntimeParams(nav_tolerance=0.15, block_timeout=30.0)
        for n in (1, 3):
            for seed in (0, 7):
                first = preview_run(flight, params=params, n=n, seed=seed)
                second = preview_run(flight, params=params, n=n, seed=seed)
                assert first.to_jsonl_bytes() == second.to_jsonl_bytes()

        rng = random.Random(13)
        for _ in range(8):
            d, answers = random_program(rng)
            p = parse(json.dumps(d).encode())
            first = preview_run(p, n=2, seed=3, answers=answers)
            second = preview_run(p, n=2, seed=3, answers=answers)
            assert first.to_jsonl_bytes() == second.to_jsonl_bytes()
            assert first.error == second.error


def test_safe_area():
    """A boundary crossing lands the drone within a tick, one event per episode."""
    with criterion("safe-area interlock"):
        sim = SwarmSim(1, SimConfig(), seed=0)
        area = SafeArea(min=Vec3(-5.0, -5.0, 0.0), max=Vec3(2.0, 5.0, 3.0),
                        enabled=True)
        guard = SafeAreaGuard(area)
        events = []

        def step():
            sim.tick()
            new = guard.check(sim)
            events.extend(new)
            return new

        drone = sim.drones[0]
        sim.command_takeoff_all(1.0)
        for _ in range(60):
            step()
            if drone.mode is Mode.HOVERING:
                break
        assert drone.mode is Mode.HOVERING
        assert events == []

        sim.command_navigate(0, 4.0, 0.0, 1.0, 1.0)
        for _ in range(400):
            if step():
                break
        assert len(events) == 1
        assert drone.pose.position.x > 2.0
        # the landing command is staged by the check that saw the violation
        if drone.mode is not Mode.LANDING:
            step()
        assert drone.mode is Mode.LANDING

        for _ in range(400):
            if not drone.airborne:
                break
            step()
        assert not drone.airborne

        # taking off again while still outside stays inside the same episode
        sim.command_takeoff_all(1.0)
        for _ in range(40):
            step()
        assert len(events) == 1
        assert not drone.airborne

        # re-arming the guard opens a fresh episode: exactly one more event
        guard.set_area(area)
        sim.command_takeoff_all(1.0)
        for _ in range(40):
            if step():
                break
        assert len(events) == 2
        if drone.mode is not Mode.LANDING:
            step()
        # so close to the ground the forced landing may finish the same tick
        assert drone.mode in (Mode.LANDING, Mode.LANDED)


def test_rtf_bench():
    """Median RTF is non-increasing in swarm size and n=50 runs clean."""
    with criterion("rtf bench trend"):
        start = time.perf_counter()
        rows = bench([1, 2, 5, 10, 20, 50], 10.0, 5)
        elapsed = time.perf_counter() - start

        assert [r.n_drones for r in rows] == [1, 2, 5, 10, 20, 50]
        for r in rows:
            assert r.runs == 5
            assert math.isfinite(r.rtf_median) and r.rtf_min > 0.0
            assert r.rtf_min <= r.rtf_median <= r.rtf_max
        for prev, cur in zip(rows, rows[1:]):
            assert cur.rtf_median <= prev.rtf_median * 1.05, (
                f"median rtf rose from {prev.rtf_median:.2f} (n={prev.n_drones}) "
                f"to {cur.rtf_median:.2f} (n={cur.n_drones})"
            )
        assert elapsed < 600.0


def test_led_closed_forms():
    """Each effect matches its closed form over 100 frames on six drones."""
    with criterion("led closed forms"):
        base = Color(200, 120, 40)
        rate = 1.3
        n, dt = 6, 0.05
        for kind in EffectKind:
            spec = EffectSpec(kind, LedGroup.ALL, base, rate)
            for frame in range(100):
                got = led_frame(spec, n, frame, seed=0, frame_dt=dt)
                t = frame * dt
                for k in range(n):
                    want = led_reference(kind.value, base.as_tuple(), rate, n, k, t)
                    for g, w in zip(got[k].as_tuple(), want):
                        # produced 8-bit channels sit within half a unit of
                        # the exact value; rounding ties may fall either way
                        assert abs(g - w) <= 0.5 + 1e-6, (kind, frame, k, got[k], want)

        # six drones land exactly on the cardinal hues 0,60,...,300
        spec = EffectSpec(EffectKind.RAINBOW, LedGroup.ALL, base, 1.0)
        got = led_frame(spec, 6, 0, seed=0)
        want = [Color(*(round(c) for c in hsv_channels(60.0 * k))) for k in range(6)]
        assert got == want
        assert want == [
            Color(255, 0, 0), Color(255, 255, 0), Color(0, 255, 0),
            Color(0, 255, 255), Color(0, 0, 255), Color(255, 0, 255),
        ]
