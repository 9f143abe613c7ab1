"""Reasoning cycles for the three agent architectures.

Reactive agents match behavior rules against raw percepts. Cognitive agents
revise beliefs first and match rules against beliefs. Deliberative agents
run a five-phase cycle each tick: revise beliefs, retire achieved goals,
adopt an intention if idle, advance the committed plan by one step, and
handle step failure through the configured contingency policy. Commitment
is single-minded: the current intention survives until its plan completes,
its context stops holding, or its plan fails.
"""

from __future__ import annotations

from fnmatch import fnmatchcase
from typing import Optional, Sequence

from agentworld.agents import components as cmp
from agentworld.agents.predicates import eval_predicate
from agentworld.agents.spec import behavior_for, plan_by_id
from agentworld.ecs.entity import EntityId
from agentworld.ecs.world import World
from agentworld.resources import PERCEPTS

Percept = tuple  # (key, value, confidence)


def revise_beliefs(belief_comp: dict, percepts: Sequence[Percept]) -> dict:
    """Fold a percept stream into the belief store, in order.

    overwrite: the last percept for a key wins, confidence replaced.
    max-confidence: a percept is adopted only when its confidence is at
    least the stored confidence for that key.
    """
    beliefs = belief_comp["beliefs"]
    confidence = belief_comp["confidenceValues"]
    strategy = belief_comp["revisionStrategy"]
    for key, value, conf in percepts:
        if strategy == "max-confidence":
            if key in beliefs and conf < confidence.get(key, 0.0):
                continue
        beliefs[key] = value
        confidence[key] = conf
    return belief_comp


def percept_map(percepts: Sequence[Percept]) -> dict:
    return {key: value for key, value, _ in percepts}


def _fire_rules(rules: list, values: dict, issuer: EntityId) -> list[dict]:
    """Highest salience rule whose trigger holds; ties go to the lowest index."""
    best = None
    for index, rule in enumerate(rules):
        if eval_predicate(rule.get("trigger", []), values):
            key = (-rule.get("salience", 0), index)
            if best is None or key < best[0]:
                best = (key, rule)
    if best is None:
        return []
    action = dict(best[1]["action"])
    action["issuer"] = issuer.as_pair()
    action["origin"] = "rule"
    return [action]


def reactive_step(world: World, eid: EntityId) -> list[dict]:
    """Rule evaluation over this tick's raw percepts; beliefs untouched."""
    behavior = behavior_for(world, eid)
    percepts = world.resources.get(PERCEPTS, {}).get(eid.index, [])
    return _fire_rules(behavior.get("rules", []), percept_map(percepts), eid)


def cognitive_step(world: World, eid: EntityId) -> list[dict]:
    """Belief revision first, then rule evaluation over beliefs."""
    behavior = behavior_for(world, eid)
    percepts = world.resources.get(PERCEPTS, {}).get(eid.index, [])
    beliefs = world.get_component(eid, cmp.BELIEF)
    revise_beliefs(beliefs, percepts)
    return _fire_rules(behavior.get("rules", []), beliefs["beliefs"], eid)


# -- deliberative cycle ------------------------------------------------------


def mark_achieved_goals(world: World, eid: EntityId) -> list[str]:
    """Move every goal whose condition holds into achievements, dropping
    any intention that was pursuing it. Returns the ids retired."""
    goal_comp = world.get_component(eid, cmp.GOAL)
    belief_comp = world.get_component(eid, cmp.BELIEF)
    if goal_comp is None or belief_comp is None:
        return []
    beliefs = belief_comp["beliefs"]
    achieved = [g["id"] for g in goal_comp["goals"]
                if eval_predicate(g.get("condition", []), beliefs)]
    if not achieved:
        return []
    intent_comp = world.get_component(eid, cmp.INTENTION)
    for goal_id in achieved:
        cmp.record_achievement(goal_comp, goal_id)
        if intent_comp is not None:
            before = len(intent_comp["intentions"])
            intent_comp["intentions"] = [
                entry for entry in intent_comp["intentions"] if entry["goal"] != goal_id
            ]
            if before and not intent_comp["intentions"]:
                intent_comp["executionState"] = "idle"
        world.log.info("goal-achieved", index=eid.index, goal=goal_id)
        world.emit("goal-achieved", {"goal": goal_id}, source=eid)
    return achieved


def _select_intention(world: World, eid: EntityId) -> None:
    """Adopt the best eligible goal: highest priority, ties to the
    lexicographically smallest id; first plan in library order whose
    pattern matches and whose context holds."""
    goal_comp = world.get_component(eid, cmp.GOAL)
    belief_comp = world.get_component(eid, cmp.BELIEF)
    intent_comp = world.get_component(eid, cmp.INTENTION)
    beliefs = belief_comp["beliefs"]

    eligible = [
        goal for goal in goal_comp["goals"]
        if all(eval_predicate(c, beliefs) for c in goal.get("constraints", []))
    ]
    if not eligible:
        intent_comp["executionState"] = "idle"
        return
    eligible.sort(key=lambda g: (-g.get("priority", 0), g["id"]))
    goal = eligible[0]

    behavior = behavior_for(world, eid)
    plans = behavior.get("plans", [])
    if goal.get("plan") is not None:
        pinned = plan_by_id(behavior, goal["plan"])
        candidates = [pinned] if pinned else []
    else:
        candidates = [
            plan for plan in plans
            if fnmatchcase(goal["id"], plan.get("achievesGoal", ""))
        ]
    for plan in candidates:
        if eval_predicate(plan.get("context", []), beliefs):
            intent_comp["intentions"] = [
                {"goal": goal["id"], "plan": plan["id"], "step": 0}
            ]
            intent_comp["executionState"] = "executing"
            world.log.debug("intention-adopted", index=eid.index,
                            goal=goal["id"], plan=plan["id"])
            return
    intent_comp["executionState"] = "blocked"
    world.log.debug("no-applicable-plan", index=eid.index, goal=goal["id"])


def apply_contingency(world: World, eid: EntityId, failure_kind: str, entry: dict) -> None:
    """Resolve a step failure via the agent's contingency table.

    ``entry`` is the intention row ``{goal, plan, step}`` whose step failed,
    with ``step`` at the index to retry. Unconfigured failure kinds fall
    back to: replan once, then drop the goal.
    """
    intent_comp = world.get_component(eid, cmp.INTENTION)
    goal_comp = world.get_component(eid, cmp.GOAL)
    if intent_comp is None or goal_comp is None:
        return
    goal_id = entry["goal"]
    policy = intent_comp["contingencies"].get(failure_kind)
    if policy is None:
        attempts = goal_comp["attempts"].get(goal_id, 0)
        policy = "replan" if attempts == 0 else "drop-goal"

    if policy == "retry":
        intent_comp["intentions"] = [dict(entry)]
        intent_comp["executionState"] = "executing"
    elif policy == "replan":
        goal_comp["attempts"][goal_id] = goal_comp["attempts"].get(goal_id, 0) + 1
        intent_comp["intentions"] = []
        intent_comp["executionState"] = "idle"
    else:  # drop-goal
        cmp.drop_goal(goal_comp, goal_id)
        intent_comp["intentions"] = []
        intent_comp["executionState"] = "failed"
    world.log.info("step-failure", index=eid.index, goal=goal_id,
                   kind=failure_kind, policy=policy)


def _resolve_step(world: World, eid: EntityId, step: dict) -> tuple[Optional[dict], bool, Optional[str]]:
    """Turn a plan step into a concrete action.

    Returns (action or None, advance step index?, failure kind or None).
    ``move-toward`` emits one unit move along a shortest obstacle-aware
    path and only advances once the move lands on the target.
    """
    kind = step["kind"]
    if kind == "move-toward":
        from agentworld.env import shortest_path
        from agentworld.resources import GRID

        pos = world.get_component(eid, cmp.POSITION)
        grid = world.resources.get(GRID)
        if pos is None or grid is None:
            return None, False, "no-path"
        target = (step["x"], step["y"])
        here = (pos["x"], pos["y"])
        if here == target:
            return None, True, None
        path = shortest_path(grid, here, target)
        if path is None:
            return None, False, "no-path"
        nxt = path[0]
        action = {
            "kind": "move",
            "dx": nxt[0] - here[0],
            "dy": nxt[1] - here[1],
            "issuer": eid.as_pair(),
            "origin": "intention",
        }
        return action, nxt == target, None
    action = dict(step)
    action["issuer"] = eid.as_pair()
    action["origin"] = "intention"
    return action, True, None


def _execute_step(world: World, eid: EntityId) -> list[dict]:
    intent_comp = world.get_component(eid, cmp.INTENTION)
    belief_comp = world.get_component(eid, cmp.BELIEF)
    if not intent_comp["intentions"]:
        return []
    entry = intent_comp["intentions"][0]
    behavior = behavior_for(world, eid)
    plan = plan_by_id(behavior, entry["plan"])
    if plan is None or not eval_predicate(plan.get("context", []), belief_comp["beliefs"]):
        # single-minded commitment ends when the plan context stops holding
        intent_comp["intentions"] = []
        intent_comp["executionState"] = "idle"
        return []

    executed = {"goal": entry["goal"], "plan": entry["plan"], "step": entry["step"]}
    step = plan["steps"][entry["step"]]
    action, advance, failure = _resolve_step(world, eid, step)
    if failure is not None:
        apply_contingency(world, eid, failure, executed)
        return []
    if advance:
        entry["step"] += 1
        if entry["step"] >= len(plan["steps"]):
            intent_comp["intentions"] = []
            intent_comp["executionState"] = "idle"
    if action is None:
        return []
    # lets the action system rewind or replan if the step's action blocks
    action["intention"] = executed
    return [action]


def bdi_step(world: World, eid: EntityId) -> list[dict]:
    """One deliberative cycle: revise, retire, adopt, advance, recover."""
    percepts = world.resources.get(PERCEPTS, {}).get(eid.index, [])
    belief_comp = world.get_component(eid, cmp.BELIEF)
    revise_beliefs(belief_comp, percepts)
    mark_achieved_goals(world, eid)
    intent_comp = world.get_component(eid, cmp.INTENTION)
    if not intent_comp["intentions"]:
        _select_intention(world, eid)
    return _execute_step(world, eid)


def agent_step(world: World, eid: EntityId) -> list[dict]:
    agent = world.get_component(eid, cmp.AGENT)
    arch = agent["architecture"]
    if arch == "reactive":
        return reactive_step(world, eid)
    if arch == "cognitive":
        return cognitive_step(world, eid)
    return bdi_step(world, eid)
