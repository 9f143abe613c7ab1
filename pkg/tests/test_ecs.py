"""Core ECS behavior: identity, storage, queries, systems, events, ticks."""

import random

import pytest

from agentworld.ecs import EntityId, World
from agentworld.errors import (
    CapacityExhausted,
    CycleDetected,
    DispatchDepthExceeded,
    DuplicateSystemName,
    StaleEntityError,
    UnknownComponentKind,
    UnknownDependency,
)


def make_world(**kwargs) -> World:
    return World(seed=7, **kwargs)


# -- entity lifecycle ----------------------------------------------------------


def test_first_allocation_is_index_zero_generation_zero():
    world = make_world()
    assert world.create_entity() == EntityId(0, 0)


def test_slot_reuse_bumps_generation():
    world = make_world()
    first = world.create_entity()
    world.destroy_entity(first)
    again = world.create_entity()
    assert again == EntityId(0, 1)
    assert not world.is_live(first)
    assert world.is_live(again)


def test_thousand_creates_are_pairwise_distinct():
    world = make_world()
    ids = [world.create_entity() for _ in range(1000)]
    assert len(set(ids)) == 1000
    assert all(world.is_live(eid) for eid in ids)


def test_capacity_cap_is_enforced():
    world = make_world(max_entities=2)
    world.create_entity()
    world.create_entity()
    with pytest.raises(CapacityExhausted):
        world.create_entity()
    # freed slots can still be recycled under the cap
    world.destroy_entity(world.handle(0))
    world.create_entity()


def test_destroy_clears_membership_everywhere():
    world = make_world()
    for kind in ("a", "b", "c"):
        world.register_component(kind)
    eid = world.create_entity()
    other = world.create_entity()
    for kind in ("a", "b", "c"):
        world.add_component(eid, kind, {"v": 1})
        world.add_component(other, kind, {"v": 2})
    sizes_before = {kind: len(world.store(kind)) for kind in ("a", "b", "c")}
    world.destroy_entity(eid)
    for kind in ("a", "b", "c"):
        assert eid.index not in world.store(kind) or not world.is_live(eid)
        assert len(world.store(kind)) == sizes_before[kind] - 1


def test_operations_on_destroyed_entity_raise_stale():
    world = make_world()
    world.register_component("pos")
    eid = world.create_entity()
    world.add_component(eid, "pos", {"x": 0})
    world.destroy_entity(eid)
    with pytest.raises(StaleEntityError):
        world.get_component(eid, "pos")
    with pytest.raises(StaleEntityError):
        world.add_component(eid, "pos", {"x": 1})
    with pytest.raises(StaleEntityError):
        world.destroy_entity(eid)
    with pytest.raises(StaleEntityError):
        world.has_component(eid, "pos")


# -- component storage -----------------------------------------------------------


def test_read_your_write():
    world = make_world()
    world.register_component("position")
    eid = world.create_entity()
    world.add_component(eid, "position", {"x": 0, "y": 0})
    assert world.get_component(eid, "position") == {"x": 0, "y": 0}


def test_last_write_wins():
    world = make_world()
    world.register_component("position")
    eid = world.create_entity()
    world.add_component(eid, "position", {"x": 1})
    world.add_component(eid, "position", {"x": 2})
    assert world.get_component(eid, "position") == {"x": 2}
    assert len(world.store("position")) == 1


def test_unknown_component_kind_rejected():
    world = make_world()
    eid = world.create_entity()
    with pytest.raises(UnknownComponentKind):
        world.add_component(eid, "nope", {})
    with pytest.raises(UnknownComponentKind):
        world.query(["nope"])


def test_thousand_position_components_stay_dense():
    world = make_world()
    store = world.register_component("position")
    for i in range(1000):
        eid = world.create_entity()
        world.add_component(eid, "position", {"x": i, "y": 0})
    assert len(store) == 1000
    assert len(store.records) == len(store.entity_indexes) == 1000
    assert sorted(store.entity_indexes) == list(range(1000))


def test_store_compactness_under_random_churn():
    rng = random.Random(1234)
    world = make_world()
    kinds = [f"k{i}" for i in range(4)]
    for kind in kinds:
        world.register_component(kind)
    live = []
    holders = {kind: set() for kind in kinds}
    for _ in range(3000):
        roll = rng.random()
        if roll < 0.4 or not live:
            eid = world.create_entity()
            live.append(eid)
        elif roll < 0.75:
            eid = rng.choice(live)
            kind = rng.choice(kinds)
            world.add_component(eid, kind, {"n": rng.randrange(10)})
            holders[kind].add(eid.index)
        elif roll < 0.9:
            eid = rng.choice(live)
            kind = rng.choice(kinds)
            world.remove_component(eid, kind)
            holders[kind].discard(eid.index)
        else:
            eid = live.pop(rng.randrange(len(live)))
            world.destroy_entity(eid)
            for kind in kinds:
                holders[kind].discard(eid.index)
    for kind in kinds:
        store = world.store(kind)
        assert len(store) == len(holders[kind])
        assert set(store.entity_indexes) == holders[kind]
        assert len(store.positions) == len(store.records)


# -- queries ---------------------------------------------------------------------


def test_empty_query_returns_all_live():
    world = make_world()
    ids = [world.create_entity() for _ in range(3)]
    world.destroy_entity(ids[1])
    assert world.query([]) == [ids[0], ids[2]]


def test_query_matches_brute_force_on_small_world():
    world = make_world()
    world.register_component("position")
    world.register_component("velocity")
    a = world.create_entity()
    b = world.create_entity()
    c = world.create_entity()
    for eid in (a, b):
        world.add_component(eid, "position", {})
        world.add_component(eid, "velocity", {})
    world.add_component(c, "position", {})
    assert world.query(["position", "velocity"]) == [a, b]


def test_query_excludes_destroyed():
    world = make_world()
    world.register_component("tag")
    a = world.create_entity()
    b = world.create_entity()
    world.add_component(a, "tag", {})
    world.add_component(b, "tag", {})
    world.destroy_entity(a)
    assert world.query(["tag"]) == [b]


def brute_force_query(world, required):
    out = []
    for eid in world.live_entities():
        if all(eid.index in world.store(kind) for kind in required):
            out.append(eid)
    return out


def test_query_equals_oracle_on_random_worlds():
    rng = random.Random(99)
    for _ in range(50):
        world = make_world()
        kinds = [f"c{i}" for i in range(rng.randint(1, 5))]
        for kind in kinds:
            world.register_component(kind)
        ids = [world.create_entity() for _ in range(rng.randint(0, 60))]
        for eid in ids:
            for kind in kinds:
                if rng.random() < 0.5:
                    world.add_component(eid, kind, {"x": 1})
        for eid in list(ids):
            if rng.random() < 0.2:
                world.destroy_entity(eid)
                ids.remove(eid)
        required = rng.sample(kinds, rng.randint(0, len(kinds)))
        assert world.query(required) == brute_force_query(world, required)


# -- systems and schedule -----------------------------------------------------


def test_dependency_orders_schedule():
    world = make_world()
    world.register_system("A", lambda w: None)
    world.register_system("B", lambda w: None, after=("A",))
    assert world.schedule == ["A", "B"]


def test_registration_order_breaks_ties():
    world = make_world()
    world.register_system("B", lambda w: None)
    world.register_system("A", lambda w: None)
    assert world.schedule == ["B", "A"]


def test_diamond_dependency_schedule():
    world = make_world()
    world.register_system("A", lambda w: None)
    world.register_system("B", lambda w: None, after=("A",))
    world.register_system("C", lambda w: None, after=("A",))
    world.register_system("D", lambda w: None, after=("B", "C"))
    assert world.schedule == ["A", "B", "C", "D"]


def test_duplicate_system_name_rejected():
    world = make_world()
    world.register_system("A", lambda w: None)
    with pytest.raises(DuplicateSystemName):
        world.register_system("A", lambda w: None)


def test_unknown_dependency_rejected():
    world = make_world()
    with pytest.raises(UnknownDependency):
        world.register_system("B", lambda w: None, after=("missing",))


def test_cycle_detection_in_schedule():
    from agentworld.ecs.systems import RegisteredSystem, SystemDescriptor, topological_schedule

    systems = {
        "A": RegisteredSystem(SystemDescriptor("A", dependencies=frozenset({"B"}), order=0), lambda w: None),
        "B": RegisteredSystem(SystemDescriptor("B", dependencies=frozenset({"A"}), order=1), lambda w: None),
    }
    with pytest.raises(CycleDetected):
        topological_schedule(systems)


# -- events -----------------------------------------------------------------------


def test_immediate_event_runs_before_emit_returns():
    world = make_world()
    hits = []
    world.subscribe("ping", lambda ev: hits.append(ev.payload["n"]))
    world.emit("ping", {"n": 1}, mode="immediate")
    assert hits == [1]


def test_queued_event_seen_next_tick_never_same_tick():
    world = make_world()
    seen_at = []
    world.subscribe("ping", lambda ev: seen_at.append((ev.tick_emitted, world.tick_count)))

    def emitter(w):
        if w.tick_count == 3:
            w.emit("ping", {}, mode="queued")

    world.register_system("emitter", emitter)
    for _ in range(6):
        world.tick()
    assert seen_at == [(3, 4)]


def test_recursive_immediate_events_hit_depth_cap():
    world = make_world()
    depth = {"n": 0}

    def reemit(ev):
        depth["n"] += 1
        world.emit("loop", {}, mode="immediate")

    world.subscribe("loop", reemit)
    with pytest.raises(DispatchDepthExceeded):
        world.emit("loop", {}, mode="immediate")
    assert depth["n"] == 32


# -- tick loop ----------------------------------------------------------------------


def test_tick_on_empty_world_advances_counter():
    world = make_world()
    report = world.tick()
    assert report.tick == 0
    assert world.tick_count == 1
    assert report.system_seconds == {}


def test_movement_system_single_euler_step():
    world = make_world()
    world.register_component("position")
    world.register_component("velocity")
    eid = world.create_entity()
    world.add_component(eid, "position", {"x": 0})
    world.add_component(eid, "velocity", {"v": 1})

    def movement(w):
        vel = w.store("velocity")
        for index, pos in w.store("position").pairs():
            record = vel.get(index)
            if record is not None:
                pos["x"] += record["v"]

    world.register_system("movement", movement)
    world.tick()
    assert world.get_component(eid, "position") == {"x": 1}


def test_system_failure_carries_system_name():
    world = make_world()

    def boom(w):
        raise ValueError("kaput")

    world.register_system("fragile", boom)
    with pytest.raises(ValueError, match="fragile"):
        world.tick()


def test_tick_report_has_per_system_timing():
    world = make_world()
    world.register_system("noop", lambda w: None)
    report = world.tick()
    assert "noop" in report.system_seconds
    assert report.system_seconds["noop"] >= 0.0
