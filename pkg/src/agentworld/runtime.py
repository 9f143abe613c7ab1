"""Wires a world together from a scenario and drives it.

The Runtime owns the assembled tick pipeline::

    lifecycle -> messaging -> perception -> reasoning -> action -> achievement

plus the org integrity hooks, and exposes the operational surface the
server and CLI share: stepping, snapshots, restart recovery, per-run
metrics and the per-tick timeline used for reports.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from typing import Any, Optional

from agentworld import env, messaging, org, persistence
from agentworld.agents import components as cmp
from agentworld.agents.reasoning import PERCEPTS
from agentworld.agents.spec import (
    AGENT_NAMES,
    register_agent_components,
    spawn_agent,
)
from agentworld.ecs.entity import EntityId
from agentworld.ecs.log import RunLog
from agentworld.ecs.world import TickReport, World
from agentworld.errors import EngineError, ScenarioError

METRICS_SCHEMA_VERSION = 1


@dataclass(slots=True)
class TickResult:
    report: TickReport
    percepts: dict[int, list] = field(default_factory=dict)
    deliveries: dict[int, list] = field(default_factory=dict)
    outcomes: list = field(default_factory=list)


def assemble_systems(world: World) -> None:
    world.register_system(
        "lifecycle", env.lifecycle_system,
        reads=(cmp.AGENT,), writes=(cmp.AGENT,),
    )
    world.register_system(
        "messaging", messaging.messaging_system,
        reads=(cmp.MESSAGE,), writes=(cmp.MESSAGE,), after=("lifecycle",),
    )
    world.register_system(
        "perception", env.perception_system,
        reads=(cmp.AGENT, cmp.POSITION, cmp.OBJECT), after=("messaging",),
    )
    world.register_system(
        "reasoning", env.reasoning_system,
        reads=(cmp.AGENT, cmp.BELIEF, cmp.GOAL, cmp.INTENTION),
        writes=(cmp.BELIEF, cmp.GOAL, cmp.INTENTION),
        after=("perception",),
    )
    world.register_system(
        "action", env.action_system,
        reads=(cmp.POSITION,), writes=(cmp.POSITION, cmp.GOAL, cmp.INTENTION),
        after=("reasoning",),
    )
    world.register_system(
        "achievement", env.achievement_system,
        reads=(cmp.BELIEF, cmp.GOAL), writes=(cmp.BELIEF, cmp.GOAL, cmp.INTENTION),
        after=("action",),
    )


def load_scenario(path: str) -> dict:
    try:
        with open(path) as fh:
            config = json.load(fh)
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario {path!r}: {exc}")
    except json.JSONDecodeError as exc:
        raise ScenarioError(
            f"scenario {path!r} is not valid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}"
        )
    if not isinstance(config, dict):
        raise ScenarioError(f"scenario {path!r} must be a JSON object")
    return config


class Runtime:
    def __init__(self, world: World):
        self.world = world
        self.timeline: list[dict] = []
        self._started = time.perf_counter()

    # -- construction --------------------------------------------------------

    @classmethod
    def empty(cls, seed: int = 0, *, log: Optional[RunLog] = None) -> "Runtime":
        world = World(seed=seed, log=log)
        register_agent_components(world)
        world.resources[env.FACTS] = env.FactRegistry()
        world.resources[messaging.BROKER] = messaging.InMemoryBroker()
        org.install(world)
        assemble_systems(world)
        return cls(world)

    @classmethod
    def from_scenario(
        cls,
        config: dict,
        *,
        seed: Optional[int] = None,
        log: Optional[RunLog] = None,
    ) -> "Runtime":
        if not isinstance(config, dict):
            raise ScenarioError("scenario config must be an object")
        world_seed = seed if seed is not None else config.get("seed", 0)
        if not isinstance(world_seed, int):
            raise ScenarioError("seed: must be an integer")
        world = World(seed=world_seed, log=log)
        register_agent_components(world)
        org.install(world)

        environment = config.get("environment", {})
        if not isinstance(environment, dict):
            raise ScenarioError("environment: must be an object")
        grid_cfg = environment.get("grid")
        if grid_cfg is not None:
            try:
                world.resources[env.GRID] = env.GridEnvironment(
                    grid_cfg["width"], grid_cfg["height"],
                    [tuple(cell) for cell in grid_cfg.get("obstacles", [])],
                )
            except (KeyError, TypeError, ValueError) as exc:
                raise ScenarioError(f"environment.grid: {exc}")
        world.resources[env.FACTS] = env.FactRegistry()

        broker_cfg = config.get("broker", {})
        if not isinstance(broker_cfg, dict):
            raise ScenarioError("broker: must be an object")
        try:
            world.resources[messaging.BROKER] = messaging.InMemoryBroker(
                drop_probability=broker_cfg.get("dropProbability", 0.0),
                redelivery_interval=broker_cfg.get(
                    "redeliveryInterval", messaging.DEFAULT_REDELIVERY_INTERVAL
                ),
                dedup_window=broker_cfg.get("dedupWindow", messaging.DEFAULT_DEDUP_WINDOW),
            )
        except ValueError as exc:
            raise ScenarioError(f"broker: {exc}")

        agents = config.get("agents", [])
        if not isinstance(agents, list):
            raise ScenarioError("agents: must be a list")
        spawned: dict[str, EntityId] = {}
        for i, spec in enumerate(agents):
            try:
                eid = spawn_agent(world, spec)
            except EngineError as exc:
                raise ScenarioError(f"agents[{i}]: {exc}")
            spawned[spec["name"]] = eid

        groups: dict[str, EntityId] = {}
        for i, group_cfg in enumerate(config.get("groups", [])):
            try:
                name = group_cfg["name"]
                structure = group_cfg.get("structure", "flat")
                if isinstance(structure, dict) and "parent" in structure:
                    parent_name = structure["parent"]
                    if parent_name not in groups:
                        raise ScenarioError(
                            f"groups[{i}]: parent {parent_name!r} must be declared earlier"
                        )
                    structure = {"parent": groups[parent_name].as_pair()}
                policies = dict(group_cfg.get("policies", {}))
                invite = policies.get("invite-only")
                if invite is not None:
                    resolved = []
                    for who in invite.get("invited", []):
                        if isinstance(who, str):
                            if who not in spawned:
                                raise ScenarioError(
                                    f"groups[{i}]: invited agent {who!r} is unknown"
                                )
                            resolved.append(spawned[who].as_pair())
                        else:
                            resolved.append(list(who))
                    policies["invite-only"] = {"invited": resolved}
                groups[name] = org.create_group(world, name, structure, policies)
            except (KeyError, TypeError) as exc:
                raise ScenarioError(f"groups[{i}]: {exc}")
            except EngineError as exc:
                raise ScenarioError(f"groups[{i}]: {exc}")

        for i, spec in enumerate(agents):
            eid = spawned[spec["name"]]
            try:
                for group_name in spec.get("groups", []):
                    if group_name not in groups:
                        raise ScenarioError(
                            f"agents[{i}]: group {group_name!r} is not declared"
                        )
                    org.join_group(world, eid, groups[group_name])
                for role_cfg in spec.get("roles", []):
                    group_name = role_cfg["group"]
                    if group_name not in groups:
                        raise ScenarioError(
                            f"agents[{i}]: role group {group_name!r} is not declared"
                        )
                    org.assign_role(
                        world, eid, role_cfg["role"], groups[group_name],
                        role_cfg.get("capabilities", ()),
                    )
                for topic in spec.get("subscriptions", []):
                    messaging.subscribe_topic(world, eid, topic)
            except EngineError as exc:
                raise ScenarioError(f"agents[{i}]: {exc}")

        for i, fact_cfg in enumerate(environment.get("facts", [])):
            try:
                visibility = fact_cfg.get("visibility", "all")
                if visibility != "all":
                    resolved = []
                    for who in visibility:
                        if isinstance(who, str):
                            if who not in spawned:
                                raise ScenarioError(
                                    f"environment.facts[{i}]: agent {who!r} is unknown"
                                )
                            resolved.append(spawned[who])
                        else:
                            resolved.append(EntityId.from_pair(who))
                    visibility = resolved
                env.set_fact(world, fact_cfg["key"], fact_cfg.get("value"), visibility)
            except (KeyError, TypeError) as exc:
                raise ScenarioError(f"environment.facts[{i}]: {exc}")

        assemble_systems(world)
        return cls(world)

    @classmethod
    def from_snapshot(cls, raw: bytes, *, log: Optional[RunLog] = None) -> "Runtime":
        world = persistence.restore(raw, log=log)
        org.install(world)
        assemble_systems(world)
        return cls(world)

    # -- stepping ------------------------------------------------------------

    def tick(self, steps: int = 1) -> list[TickResult]:
        results = []
        for _ in range(steps):
            report = self.world.tick()
            result = TickResult(
                report=report,
                percepts=self.world.resources.get(PERCEPTS, {}),
                deliveries=self.world.resources.get(messaging.DELIVERIES, {}).get("deliveries", {}),
                outcomes=self.world.resources.get(env.OUTCOMES, []),
            )
            results.append(result)
            delivered = sum(len(v) for v in result.deliveries.values())
            self.timeline.append({
                "tick": report.tick,
                "events": report.events_drained,
                "delivered": delivered,
                "systemSeconds": dict(report.system_seconds),
            })
        return results

    def snapshot(self) -> persistence.Snapshot:
        return persistence.snapshot(self.world)

    # -- inspection ----------------------------------------------------------

    def find_agent(self, name: str) -> Optional[EntityId]:
        index = self.world.resources.get(AGENT_NAMES, {}).get(name)
        if index is None:
            return None
        return self.world.handle(index)

    def agent_view(self, eid: EntityId) -> dict:
        world = self.world
        agent = world.get_component(eid, cmp.AGENT)
        obj = world.get_component(eid, cmp.OBJECT) or {}
        beliefs = world.get_component(eid, cmp.BELIEF) or {}
        goals = world.get_component(eid, cmp.GOAL) or {}
        intention = world.get_component(eid, cmp.INTENTION) or {}
        roles = world.get_component(eid, cmp.ROLE) or {"roles": [], "activeRole": None, "permissions": {}}
        position = world.get_component(eid, cmp.POSITION)
        inbox = (world.get_component(eid, cmp.MESSAGE) or {}).get("inbox", [])
        group_names = []
        for gid in org.groups_of(world, eid):
            group_names.append(world.get_component(gid, cmp.GROUP)["name"])
        return {
            "id": eid.as_pair(),
            "name": obj.get("properties", {}).get("name"),
            "objectType": obj.get("objectType"),
            "architecture": agent["architecture"] if agent else None,
            "state": agent["state"] if agent else None,
            "autonomyLevel": agent["autonomyLevel"] if agent else None,
            "beliefs": beliefs.get("beliefs", {}),
            "confidenceValues": beliefs.get("confidenceValues", {}),
            "goals": goals.get("goals", []),
            "achievements": goals.get("achievements", []),
            "intentions": intention.get("intentions", []),
            "executionState": intention.get("executionState"),
            "roles": roles["roles"],
            "activeRole": roles["activeRole"],
            "groups": sorted(group_names),
            "position": position,
            "inbox": inbox,
        }

    def world_view(self) -> dict:
        world = self.world
        group_list = []
        for index, group in world.store(cmp.GROUP).sorted_pairs():
            group_list.append({
                "id": world.handle(index).as_pair(),
                "name": group["name"],
                "members": len(group["members"]),
            })
        return {
            "tick": world.tick_count,
            "entities": len(world.entities),
            "agents": len(world.store(cmp.AGENT)),
            "groups": group_list,
        }

    # -- metrics ----------------------------------------------------------------

    def metrics(self, ticks_executed: int) -> dict:
        """Deterministic run metrics; wall-clock timing reported separately."""
        world = self.world
        broker = world.resources.get(messaging.BROKER)
        goals_achieved: dict[str, list[str]] = {}
        for index, goal_comp in world.store(cmp.GOAL).sorted_pairs():
            obj = world.store(cmp.OBJECT).get(index) or {}
            name = obj.get("properties", {}).get("name", f"entity-{index}")
            goals_achieved[name] = list(goal_comp["achievements"])
        invocations: dict[str, int] = {}
        for row in self.timeline:
            for system in row["systemSeconds"]:
                invocations[system] = invocations.get(system, 0) + 1
        return {
            "schemaVersion": METRICS_SCHEMA_VERSION,
            "ticksExecuted": ticks_executed,
            "tick": world.tick_count,
            "seed": world.rng_seed,
            "messagesSent": broker.sent_count if broker else 0,
            "messagesDelivered": broker.delivered_count if broker else 0,
            "messagesDropped": broker.dropped_count if broker else 0,
            "goalsAchieved": goals_achieved,
            "goalsAchievedTotal": sum(len(v) for v in goals_achieved.values()),
            "systems": {name: {"invocations": count}
                        for name, count in sorted(invocations.items())},
        }

    def timing(self) -> dict:
        per_system: dict[str, float] = {}
        for row in self.timeline:
            for system, seconds in row["systemSeconds"].items():
                per_system[system] = per_system.get(system, 0.0) + seconds
        return {
            "wallSeconds": time.perf_counter() - self._started,
            "perSystemSeconds": {k: per_system[k] for k in sorted(per_system)},
        }
