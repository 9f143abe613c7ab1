"""Fluent agent definitions that compile to server-ready JSON documents.

The builder speaks agent language only: beliefs, goals, plans, reactions,
groups. What the server does with the document internally is not this
SDK's concern. ``build()`` validates locally and returns the plain dict the
server's /schema/agent-spec document describes.
"""

from __future__ import annotations

from typing import Any, Optional, Sequence

from agentworld_client.errors import ValidationError

_OPS = ("=", "!=", "<", "<=", ">", ">=")
_ARCHITECTURES = ("reactive", "cognitive", "bdi")


# -- action helpers ---------------------------------------------------------------


def move(dx: int, dy: int) -> dict:
    return {"kind": "move", "dx": dx, "dy": dy}


def move_toward(x: int, y: int) -> dict:
    return {"kind": "move-toward", "x": x, "y": y}


def interact(target) -> dict:
    return {"kind": "interact", "target": target}


def say(
    payload: dict,
    *,
    to_agent: Optional[str] = None,
    to_topic: Optional[str] = None,
    performative: str = "inform",
    reliable: bool = False,
) -> dict:
    if (to_agent is None) == (to_topic is None):
        raise ValidationError(["say: exactly one of to_agent or to_topic is required"])
    if to_agent is not None:
        index, generation = _parse_id(to_agent)
        target = {"kind": "agent", "id": [index, generation]}
    else:
        target = {"kind": "topic", "name": to_topic}
    return {
        "kind": "say",
        "target": target,
        "performative": performative,
        "payload": payload,
        "semantics": "at-least-once" if reliable else "at-most-once",
    }


def noop() -> dict:
    return {"kind": "noop"}


def _parse_id(agent_id: str) -> tuple[int, int]:
    try:
        index, generation = agent_id.split("-", 1)
        return int(index), int(generation)
    except (ValueError, AttributeError):
        raise ValidationError([f"malformed agent id {agent_id!r} (expected 'index-generation')"])


def _check_conditions(clauses: Sequence, where: str, problems: list[str]) -> None:
    for i, clause in enumerate(clauses):
        if not isinstance(clause, (list, tuple)) or len(clause) != 3:
            problems.append(f"{where}[{i}]: condition must be (key, op, value)")
            continue
        key, op, _ = clause
        if not isinstance(key, str) or not key:
            problems.append(f"{where}[{i}]: key must be a non-empty string")
        if op not in _OPS:
            problems.append(f"{where}[{i}]: unknown operator {op!r}")


class AgentBuilder:
    def __init__(self, name: str):
        self._doc: dict[str, Any] = {"name": name}
        self._goals: list[dict] = []
        self._plans: list[dict] = []
        self._rules: list[dict] = []
        self._groups: list[str] = []
        self._subscriptions: list[str] = []

    # -- architecture -------------------------------------------------------

    def reactive(self) -> "AgentBuilder":
        self._doc["architecture"] = "reactive"
        return self

    def cognitive(self) -> "AgentBuilder":
        self._doc["architecture"] = "cognitive"
        return self

    def deliberative(self) -> "AgentBuilder":
        """Goal-directed agent: pursues goals through plans."""
        self._doc["architecture"] = "bdi"
        return self

    # -- placement and senses --------------------------------------------------

    def at(self, x: int, y: int) -> "AgentBuilder":
        self._doc["position"] = {"x": x, "y": y}
        return self

    def sees_radius(self, radius: int) -> "AgentBuilder":
        self._doc["perceptionRadius"] = radius
        return self

    def autonomy(self, level: float) -> "AgentBuilder":
        self._doc["autonomyLevel"] = level
        return self

    # -- mental state ---------------------------------------------------------------

    def believes(self, **beliefs) -> "AgentBuilder":
        self._doc.setdefault("beliefs", {}).update(beliefs)
        return self

    def revises_by(self, strategy: str) -> "AgentBuilder":
        self._doc["revisionStrategy"] = strategy
        return self

    def goal(self, goal_id: str, *, when: Sequence, priority: int = 0,
             unless: Sequence = (), plan: Optional[str] = None) -> "AgentBuilder":
        record = {
            "id": goal_id,
            "condition": [list(c) for c in when],
            "priority": priority,
            "constraints": [list(c) for c in unless],
        }
        if plan is not None:
            record["plan"] = plan
        self._goals.append(record)
        return self

    def plan(self, plan_id: str, *, achieves: str, steps: Sequence[dict],
             when: Sequence = ()) -> "AgentBuilder":
        self._plans.append({
            "id": plan_id,
            "achievesGoal": achieves,
            "context": [list(c) for c in when],
            "steps": list(steps),
        })
        return self

    def rule(self, *, do: dict, when: Sequence = (), salience: int = 0) -> "AgentBuilder":
        self._rules.append({
            "trigger": [list(c) for c in when],
            "action": dict(do),
            "salience": salience,
        })
        return self

    def on_failure(self, kind: str, policy: str) -> "AgentBuilder":
        self._doc.setdefault("contingencies", {})[kind] = policy
        return self

    # -- organization and topics -------------------------------------------------------

    def joins(self, *group_names: str) -> "AgentBuilder":
        self._groups.extend(group_names)
        return self

    def listens_to(self, *topics: str) -> "AgentBuilder":
        self._subscriptions.extend(topics)
        return self

    def tagged(self, kind: str, **properties) -> "AgentBuilder":
        self._doc["objectType"] = kind
        if properties:
            self._doc.setdefault("properties", {}).update(properties)
        return self

    # -- output -----------------------------------------------------------------------------

    def build(self) -> dict:
        """Validate locally and return the definition document."""
        doc = dict(self._doc)
        if self._goals:
            doc["goals"] = self._goals
        if self._plans:
            doc["plans"] = self._plans
        if self._rules:
            doc["rules"] = self._rules
        if self._groups:
            doc["groups"] = self._groups
        if self._subscriptions:
            doc["subscriptions"] = self._subscriptions

        problems: list[str] = []
        if not doc.get("name"):
            problems.append("name: required")
        if doc.get("architecture") not in _ARCHITECTURES:
            problems.append(
                "architecture: call .reactive(), .cognitive(), or .deliberative()"
            )
        level = doc.get("autonomyLevel", 1.0)
        if not isinstance(level, (int, float)) or not 0 <= level <= 1:
            problems.append("autonomy: level must be within [0, 1]")
        goal_ids = set()
        for goal in self._goals:
            if goal["id"] in goal_ids:
                problems.append(f"goal {goal['id']!r}: duplicate id")
            goal_ids.add(goal["id"])
            _check_conditions(goal["condition"], f"goal {goal['id']!r}.when", problems)
            for constraint in goal["constraints"]:
                _check_conditions([constraint], f"goal {goal['id']!r}.unless", problems)
        plan_ids = set()
        for plan in self._plans:
            if plan["id"] in plan_ids:
                problems.append(f"plan {plan['id']!r}: duplicate id")
            plan_ids.add(plan["id"])
            if not plan["steps"]:
                problems.append(f"plan {plan['id']!r}: needs at least one step")
            _check_conditions(plan["context"], f"plan {plan['id']!r}.when", problems)
        for goal in self._goals:
            if goal.get("plan") is not None and goal["plan"] not in plan_ids:
                problems.append(
                    f"goal {goal['id']!r}: references unknown plan {goal['plan']!r}"
                )
        for i, rule in enumerate(self._rules):
            _check_conditions(rule["trigger"], f"rule[{i}].when", problems)
            if not isinstance(rule["action"], dict) or "kind" not in rule["action"]:
                problems.append(f"rule[{i}]: do must be an action helper result")
        if problems:
            raise ValidationError(problems)
        return doc


def agent(name: str) -> AgentBuilder:
    """Start defining an agent."""
    return AgentBuilder(name)
