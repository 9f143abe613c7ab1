"""Declarative agent specifications: validation, spawning, state control.

An agent spec is a JSON document; ``validate_agent_spec`` returns
field-level diagnostics and ``spawn_agent`` refuses to build anything from
a spec that carries problems. Behavior bodies (rules, plans) are kept
declaratively in a world-level behavior library and referenced by name from
the agent's object component, which is also what makes them snapshottable.
"""

from __future__ import annotations

from typing import Any, Optional

from agentworld.agents import components as cmp
from agentworld.agents.predicates import validate_predicate
from agentworld.ecs.entity import EntityId
from agentworld.ecs.world import World
from agentworld.errors import InvalidAgentSpec
from agentworld.resources import AGENT_NAMES, BEHAVIORS, GRID

DEFAULT_PERCEPTION_RADIUS = 1

ACTION_KINDS = ("move", "move-toward", "interact", "say", "noop")


def register_agent_components(world: World) -> None:
    for kind in (cmp.OBJECT, cmp.AGENT, cmp.BELIEF, cmp.GOAL, cmp.INTENTION,
                 cmp.POSITION, cmp.MESSAGE, cmp.GROUP, cmp.ROLE):
        world.register_component(kind)
    world.resources.setdefault(BEHAVIORS, {})
    world.resources.setdefault(AGENT_NAMES, {})


def _validate_action(action: Any, where: str) -> list[str]:
    if not isinstance(action, dict):
        return [f"{where}: action must be an object"]
    kind = action.get("kind")
    if kind not in ACTION_KINDS:
        return [f"{where}: unknown action kind {kind!r}"]
    problems = []
    if kind == "move":
        dx, dy = action.get("dx"), action.get("dy")
        if not (isinstance(dx, int) and isinstance(dy, int)):
            problems.append(f"{where}: move needs integer dx, dy")
        elif abs(dx) + abs(dy) != 1:
            problems.append(f"{where}: move must be a unit step in the 4-neighborhood")
    elif kind == "move-toward":
        if not (isinstance(action.get("x"), int) and isinstance(action.get("y"), int)):
            problems.append(f"{where}: move-toward needs integer x, y")
    elif kind == "say":
        if not isinstance(action.get("target"), dict):
            problems.append(f"{where}: say needs a target object")
    return problems


def validate_agent_spec(spec: Any) -> list[str]:
    """Full structural validation; returns all problems found."""
    if not isinstance(spec, dict):
        return ["spec: must be a JSON object"]
    problems: list[str] = []

    name = spec.get("name")
    if not isinstance(name, str) or not name:
        problems.append("name: required non-empty string")

    architecture = spec.get("architecture")
    if architecture not in cmp.ARCHITECTURES:
        problems.append(
            f"architecture: must be one of {', '.join(cmp.ARCHITECTURES)}"
        )

    autonomy = spec.get("autonomyLevel", 1.0)
    if not isinstance(autonomy, (int, float)) or not 0.0 <= float(autonomy) <= 1.0:
        problems.append("autonomyLevel: must be a number in [0, 1]")

    object_type = spec.get("objectType", "agent")
    if not isinstance(object_type, str) or not object_type:
        problems.append("objectType: must be a non-empty string")

    strategy = spec.get("revisionStrategy", "overwrite")
    if strategy not in cmp.REVISION_STRATEGIES:
        problems.append(
            f"revisionStrategy: must be one of {', '.join(cmp.REVISION_STRATEGIES)}"
        )

    beliefs = spec.get("beliefs", {})
    if not isinstance(beliefs, dict):
        problems.append("beliefs: must be an object of key -> value")

    position = spec.get("position")
    if position is not None:
        if not (isinstance(position, dict)
                and isinstance(position.get("x"), int)
                and isinstance(position.get("y"), int)):
            problems.append("position: must be an object with integer x, y")

    radius = spec.get("perceptionRadius", DEFAULT_PERCEPTION_RADIUS)
    if not isinstance(radius, int) or radius < 0:
        problems.append("perceptionRadius: must be a non-negative integer")

    goal_ids: set[str] = set()
    goals = spec.get("goals", [])
    if not isinstance(goals, list):
        problems.append("goals: must be a list")
        goals = []
    for i, goal in enumerate(goals):
        where = f"goals[{i}]"
        if not isinstance(goal, dict):
            problems.append(f"{where}: must be an object")
            continue
        gid = goal.get("id")
        if not isinstance(gid, str) or not gid:
            problems.append(f"{where}.id: required non-empty string")
        elif gid in goal_ids:
            problems.append(f"{where}.id: duplicate goal id {gid!r}")
        else:
            goal_ids.add(gid)
        if not isinstance(goal.get("priority", 0), int):
            problems.append(f"{where}.priority: must be an integer")
        problems.extend(validate_predicate(goal.get("condition", []), f"{where}.condition"))
        for j, constraint in enumerate(goal.get("constraints", [])):
            problems.extend(validate_predicate(constraint, f"{where}.constraints[{j}]"))

    plan_ids: set[str] = set()
    for plan in spec.get("plans", []) if isinstance(spec.get("plans", []), list) else []:
        if isinstance(plan, dict) and isinstance(plan.get("id"), str):
            plan_ids.add(plan["id"])

    # goals may pin a preferred plan by id; the reference must resolve
    for i, goal in enumerate(goals):
        if isinstance(goal, dict) and goal.get("plan") is not None:
            if goal["plan"] not in plan_ids:
                problems.append(
                    f"goals[{i}].plan: references unknown plan {goal['plan']!r}"
                )

    seen_plan_ids: set[str] = set()
    plans = spec.get("plans", [])
    if not isinstance(plans, list):
        problems.append("plans: must be a list")
        plans = []
    for i, plan in enumerate(plans):
        where = f"plans[{i}]"
        if not isinstance(plan, dict):
            problems.append(f"{where}: must be an object")
            continue
        pid = plan.get("id")
        if not isinstance(pid, str) or not pid:
            problems.append(f"{where}.id: required non-empty string")
        elif pid in seen_plan_ids:
            problems.append(f"{where}.id: duplicate plan id {pid!r}")
        else:
            seen_plan_ids.add(pid)
        achieves = plan.get("achievesGoal")
        if not isinstance(achieves, str) or not achieves:
            problems.append(f"{where}.achievesGoal: required non-empty string")
        elif not any(ch in achieves for ch in "*?[") and achieves not in goal_ids:
            problems.append(
                f"{where}.achievesGoal: references unknown goal {achieves!r}"
            )
        problems.extend(validate_predicate(plan.get("context", []), f"{where}.context"))
        steps = plan.get("steps")
        if not isinstance(steps, list) or not steps:
            problems.append(f"{where}.steps: must be a non-empty list")
        else:
            for j, step in enumerate(steps):
                problems.extend(_validate_action(step, f"{where}.steps[{j}]"))

    rules = spec.get("rules", [])
    if not isinstance(rules, list):
        problems.append("rules: must be a list")
        rules = []
    for i, rule in enumerate(rules):
        where = f"rules[{i}]"
        if not isinstance(rule, dict):
            problems.append(f"{where}: must be an object")
            continue
        problems.extend(validate_predicate(rule.get("trigger", []), f"{where}.trigger"))
        problems.extend(_validate_action(rule.get("action"), f"{where}.action"))
        if not isinstance(rule.get("salience", 0), int):
            problems.append(f"{where}.salience: must be an integer")

    contingencies = spec.get("contingencies", {})
    if not isinstance(contingencies, dict):
        problems.append("contingencies: must be an object of failure kind -> policy")
    else:
        for kind, policy in contingencies.items():
            if policy not in cmp.CONTINGENCY_POLICIES:
                problems.append(
                    f"contingencies.{kind}: policy must be one of "
                    f"{', '.join(cmp.CONTINGENCY_POLICIES)}"
                )

    return problems


def spawn_agent(world: World, spec: dict) -> EntityId:
    """Create an agent entity per its spec; raises InvalidAgentSpec on problems.

    The agent starts in state ``initializing`` and is promoted to ``active``
    by the lifecycle system on the next tick.
    """
    problems = validate_agent_spec(spec)
    names = world.resources.setdefault(AGENT_NAMES, {})
    name = spec.get("name")
    if isinstance(name, str) and name in names:
        problems.append(f"name: agent name {name!r} already in use")
    position = spec.get("position")
    grid = world.resources.get(GRID)
    if isinstance(position, dict) and grid is not None and not problems:
        x, y = position.get("x"), position.get("y")
        if not grid.in_bounds(x, y):
            problems.append(f"position: ({x}, {y}) is outside the {grid.width}x{grid.height} grid")
        elif (x, y) in grid.obstacles:
            problems.append(f"position: ({x}, {y}) is an obstacle cell")
    if problems:
        raise InvalidAgentSpec(problems)

    behaviors = world.resources.setdefault(BEHAVIORS, {})
    behaviors[name] = {
        "rules": spec.get("rules", []),
        "plans": spec.get("plans", []),
        "perceptionRadius": spec.get("perceptionRadius", DEFAULT_PERCEPTION_RADIUS),
    }

    eid = world.create_entity()
    world.add_component(eid, cmp.OBJECT, cmp.object_component(
        object_type=spec.get("objectType", "agent"),
        properties={"name": name, **spec.get("properties", {})},
        behavior=name,
    ))
    world.add_component(eid, cmp.AGENT, cmp.agent_component(
        architecture=spec["architecture"],
        autonomy_level=float(spec.get("autonomyLevel", 1.0)),
    ))
    world.add_component(eid, cmp.BELIEF, cmp.belief_component(
        beliefs=spec.get("beliefs", {}),
        strategy=spec.get("revisionStrategy", "overwrite"),
    ))
    world.add_component(eid, cmp.GOAL, cmp.goal_component(spec.get("goals", [])))
    world.add_component(eid, cmp.INTENTION, cmp.intention_component(spec.get("contingencies", {})))
    if spec.get("position") is not None:
        world.add_component(eid, cmp.POSITION, {
            "x": spec["position"]["x"],
            "y": spec["position"]["y"],
        })
    names[name] = eid.index
    world.log.info("agent-spawned", name=name, index=eid.index)
    return eid


def set_agent_state(world: World, eid: EntityId, target: str) -> None:
    agent = world.get_component(eid, cmp.AGENT)
    if agent is None:
        raise InvalidAgentSpec([f"entity {eid.index} has no agent component"])
    cmp.transition_agent_state(agent, target)
    world.log.info("agent-state", index=eid.index, state=target)


def behavior_for(world: World, eid: EntityId) -> dict:
    obj = world.get_component(eid, cmp.OBJECT) or {}
    behaviors = world.resources.get(BEHAVIORS, {})
    return behaviors.get(obj.get("behavior"), {"rules": [], "plans": [], "perceptionRadius": DEFAULT_PERCEPTION_RADIUS})


def plan_by_id(behavior: dict, plan_id: str) -> Optional[dict]:
    for plan in behavior.get("plans", []):
        if plan.get("id") == plan_id:
            return plan
    return None


def rebuild_name_index(world: World) -> None:
    """Recompute the name -> entity index map from object components."""
    names: dict[str, int] = {}
    for index, record in world.store(cmp.OBJECT).sorted_pairs():
        name = record.get("properties", {}).get("name")
        if name:
            names[name] = index
    world.resources[AGENT_NAMES] = names
