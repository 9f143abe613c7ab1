"""Agent-facing component kinds and their record constructors.

Component records are plain JSON-compatible dicts so snapshots and the wire
schemas can serialize them without codecs. The constructors here are the
single place that knows each record's field layout.
"""

from __future__ import annotations

from typing import Any, Optional

from agentworld.errors import IllegalTransition

# component kind identifiers
OBJECT = "object"
AGENT = "agent"
BELIEF = "belief"
GOAL = "goal"
INTENTION = "intention"
POSITION = "position"
MESSAGE = "message"
GROUP = "group"
ROLE = "role"

ARCHITECTURES = ("reactive", "cognitive", "bdi")
AGENT_STATES = ("initializing", "active", "suspended", "terminated")
REVISION_STRATEGIES = ("overwrite", "max-confidence")
CONTINGENCY_POLICIES = ("retry", "drop-goal", "replan")

# state machine: initializing->active, active<->suspended, then terminated
LEGAL_TRANSITIONS = {
    ("initializing", "active"),
    ("active", "suspended"),
    ("suspended", "active"),
    ("active", "terminated"),
    ("suspended", "terminated"),
}


def object_component(
    object_type: str,
    properties: Optional[dict] = None,
    behavior: Optional[str] = None,
) -> dict:
    return {
        "objectType": object_type,
        "properties": dict(properties or {}),
        "behavior": behavior,
    }


def agent_component(architecture: str, autonomy_level: float = 1.0) -> dict:
    return {
        "architecture": architecture,
        "state": "initializing",
        "autonomyLevel": autonomy_level,
    }


def belief_component(
    beliefs: Optional[dict] = None,
    confidence: Optional[dict] = None,
    strategy: str = "overwrite",
) -> dict:
    beliefs = dict(beliefs or {})
    confidence = dict(confidence or {})
    for key in beliefs:
        confidence.setdefault(key, 1.0)
    return {
        "beliefs": beliefs,
        "confidenceValues": confidence,
        "revisionStrategy": strategy,
    }


def goal_component(goals: Optional[list] = None) -> dict:
    return {"goals": list(goals or []), "achievements": [], "attempts": {}}


def intention_component(contingencies: Optional[dict] = None) -> dict:
    return {
        "intentions": [],
        "executionState": "idle",
        "contingencies": dict(contingencies or {}),
    }


def transition_agent_state(agent: dict, target: str) -> None:
    current = agent["state"]
    if target == current:
        return
    if (current, target) not in LEGAL_TRANSITIONS:
        raise IllegalTransition(f"cannot transition agent state {current} -> {target}")
    agent["state"] = target


def record_achievement(goal_comp: dict, goal_id: str) -> None:
    """Add to the achievements set, kept sorted for canonical serialization."""
    if goal_id not in goal_comp["achievements"]:
        goal_comp["achievements"].append(goal_id)
        goal_comp["achievements"].sort()
    goal_comp["goals"] = [g for g in goal_comp["goals"] if g["id"] != goal_id]
    goal_comp["attempts"].pop(goal_id, None)


def drop_goal(goal_comp: dict, goal_id: str) -> None:
    goal_comp["goals"] = [g for g in goal_comp["goals"] if g["id"] != goal_id]
    goal_comp["attempts"].pop(goal_id, None)


def find_goal(goal_comp: dict, goal_id: str) -> Optional[dict]:
    for goal in goal_comp["goals"]:
        if goal["id"] == goal_id:
            return goal
    return None
