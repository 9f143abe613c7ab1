"""Environment models and the perception/action pipeline.

Two world-state models live here: a bounded 2D grid with obstacles and
multi-occupancy cells, and a non-spatial fact registry with per-entity
visibility. Perception is pull-based: once per tick the perception system
materializes each active agent's percepts; the action system then drains
the tick's action inbox in a deterministic order, updating positions,
queueing collision events, and handing ``say`` actions to messaging.
"""

from __future__ import annotations

from collections import deque
from typing import Optional

from agentworld.agents import components as cmp
from agentworld.agents.reasoning import agent_step, apply_contingency
from agentworld.agents.spec import behavior_for
from agentworld.ecs.entity import EntityId
from agentworld.ecs.world import World
from agentworld.resources import (
    ACTION_INBOX,
    FACTS,
    GRID,
    OUTCOMES,
    PERCEPTS,
    STAGED_ACTIONS,
)

# fixed neighbor order keeps paths and scans reproducible
NEIGHBORS = ((1, 0), (-1, 0), (0, 1), (0, -1))


class GridEnvironment:
    def __init__(self, width: int, height: int, obstacles=()):
        if width < 1 or height < 1:
            raise ValueError("grid dimensions must be positive")
        self.width = width
        self.height = height
        self.obstacles = {(int(x), int(y)) for x, y in obstacles}

    def in_bounds(self, x: int, y: int) -> bool:
        return 0 <= x < self.width and 0 <= y < self.height

    def passable(self, x: int, y: int) -> bool:
        return self.in_bounds(x, y) and (x, y) not in self.obstacles

    def occupancy(self, world: World) -> dict[tuple[int, int], list[int]]:
        cells: dict[tuple[int, int], list[int]] = {}
        for index, pos in world.store(cmp.POSITION).sorted_pairs():
            cells.setdefault((pos["x"], pos["y"]), []).append(index)
        return cells

    def to_record(self) -> dict:
        return {
            "width": self.width,
            "height": self.height,
            "obstacles": sorted([x, y] for x, y in self.obstacles),
        }

    @classmethod
    def from_record(cls, record: dict) -> "GridEnvironment":
        return cls(record["width"], record["height"],
                   [(x, y) for x, y in record["obstacles"]])


class FactRegistry:
    """Non-spatial facts with visibility: every agent, or an explicit set."""

    def __init__(self):
        self.facts: dict[str, object] = {}
        self.visibility: dict[str, object] = {}  # "all" | list of [index, gen]

    def set(self, key: str, value, visibility="all") -> None:
        self.facts[key] = value
        if visibility == "all":
            self.visibility[key] = "all"
        else:
            self.visibility[key] = [
                v.as_pair() if isinstance(v, EntityId) else list(v) for v in visibility
            ]

    def visible_to(self, key: str, eid: EntityId) -> bool:
        vis = self.visibility.get(key, "all")
        return vis == "all" or eid.as_pair() in vis

    def to_record(self) -> dict:
        return {"facts": self.facts, "visibility": self.visibility}

    @classmethod
    def from_record(cls, record: dict) -> "FactRegistry":
        reg = cls()
        reg.facts = dict(record["facts"])
        reg.visibility = dict(record["visibility"])
        return reg


def shortest_path(
    grid: GridEnvironment,
    start: tuple[int, int],
    goal: tuple[int, int],
) -> Optional[list[tuple[int, int]]]:
    """Breadth-first shortest path over passable cells, start excluded.

    Other entities never block movement (cells are multi-occupancy); only
    obstacles and bounds do. Returns None when the goal is unreachable.
    """
    if start == goal:
        return []
    if not grid.passable(*goal):
        return None
    came_from: dict[tuple[int, int], tuple[int, int]] = {start: start}
    frontier = deque([start])
    while frontier:
        cell = frontier.popleft()
        for dx, dy in NEIGHBORS:
            nxt = (cell[0] + dx, cell[1] + dy)
            if nxt in came_from or not grid.passable(*nxt):
                continue
            came_from[nxt] = cell
            if nxt == goal:
                path = [nxt]
                while came_from[path[-1]] != start:
                    path.append(came_from[path[-1]])
                path.reverse()
                return path
            frontier.append(nxt)
    return None


def set_fact(world: World, key: str, value, visibility="all") -> None:
    facts = world.resources.setdefault(FACTS, FactRegistry())
    facts.set(key, value, visibility)
    world.log.debug("fact-set", key=key)


def perceive(world: World, eid: EntityId, radius: int) -> list[tuple]:
    """Percepts for one agent: spatial neighbors within Chebyshev ``radius``
    plus visible facts. Order: self position, then entities ascending by
    index (keys sorted per entity), then facts sorted by key. Environment
    percepts carry confidence 1.0."""
    world.entities.check_live(eid)
    out: list[tuple] = []
    grid = world.resources.get(GRID)
    pos_store = world.store(cmp.POSITION)
    my_pos = pos_store.get(eid.index)
    if grid is not None and my_pos is not None:
        mx, my = my_pos["x"], my_pos["y"]
        out.append(("self/x", mx, 1.0))
        out.append(("self/y", my, 1.0))
        obj_store = world.store(cmp.OBJECT)
        for index, pos in pos_store.sorted_pairs():
            if max(abs(pos["x"] - mx), abs(pos["y"] - my)) > radius:
                continue
            obj = obj_store.get(index)
            if obj is not None:
                out.append((f"entity/{index}/type", obj["objectType"], 1.0))
            out.append((f"entity/{index}/x", pos["x"], 1.0))
            out.append((f"entity/{index}/y", pos["y"], 1.0))
    facts = world.resources.get(FACTS)
    if facts is not None:
        for key in sorted(facts.facts):
            if facts.visible_to(key, eid):
                out.append((key, facts.facts[key], 1.0))
    return out


def submit_action(world: World, action: dict) -> None:
    """Stage an externally-issued action; it applies during the next tick."""
    world.resources.setdefault(STAGED_ACTIONS, []).append(dict(action))


def apply_action(world: World, action: dict, arrivals: Optional[dict] = None) -> dict:
    """Apply one action descriptor and return its outcome record.

    Failures are outcomes, never exceptions: an illegal or blocked action
    yields status ``blocked``/``rejected`` with the reason in ``detail``.
    """
    issuer = EntityId.from_pair(action["issuer"])
    outcome = {"action": action, "status": "ok", "detail": None}
    if not world.is_live(issuer):
        outcome.update(status="rejected", detail="issuer is not live")
        return outcome
    agent = world.get_component(issuer, cmp.AGENT)
    if agent is not None and agent["state"] != "active":
        outcome.update(status="rejected", detail=f"issuer is {agent['state']}")
        return outcome

    kind = action["kind"]
    if kind == "noop":
        return outcome

    if kind == "move":
        dx, dy = action["dx"], action["dy"]
        if abs(dx) + abs(dy) != 1:
            outcome.update(status="rejected", detail="move must be a unit 4-neighbor step")
            return outcome
        grid = world.resources.get(GRID)
        pos = world.get_component(issuer, cmp.POSITION)
        if grid is None or pos is None:
            outcome.update(status="rejected", detail="issuer has no position in a grid")
            return outcome
        nx, ny = pos["x"] + dx, pos["y"] + dy
        if not grid.in_bounds(nx, ny):
            outcome.update(status="blocked", detail="out of bounds")
            return outcome
        if (nx, ny) in grid.obstacles:
            outcome.update(status="blocked", detail="obstacle")
            return outcome
        pos["x"], pos["y"] = nx, ny
        if arrivals is not None:
            arrivals.setdefault((nx, ny), []).append(issuer.index)
        return outcome

    if kind == "interact":
        world.emit("interact", {"target": action.get("target")}, source=issuer)
        return outcome

    if kind == "say":
        from agentworld import messaging

        try:
            envelope = messaging.envelope_from_wire(world, {
                "sender": issuer.as_pair(),
                "target": action["target"],
                "performative": action.get("performative", "inform"),
                "payload": action.get("payload", {}),
                "semantics": action.get("semantics", "at-most-once"),
            })
            messaging.send(world, envelope)
        except Exception as exc:
            outcome.update(status="rejected", detail=str(exc))
        return outcome

    outcome.update(status="rejected", detail=f"unknown action kind {kind!r}")
    return outcome


# -- tick systems --------------------------------------------------------------


def lifecycle_system(world: World) -> None:
    """Promote freshly spawned agents to active."""
    for _, agent in world.store(cmp.AGENT).sorted_pairs():
        if agent["state"] == "initializing":
            agent["state"] = "active"


def perception_system(world: World) -> None:
    buffers: dict[int, list[tuple]] = {}
    for index, agent in world.store(cmp.AGENT).sorted_pairs():
        if agent["state"] != "active":
            continue
        eid = world.handle(index)
        radius = behavior_for(world, eid).get("perceptionRadius", 1)
        buffers[index] = perceive(world, eid, radius)
    world.resources[PERCEPTS] = buffers


def reasoning_system(world: World) -> None:
    inbox = world.resources.setdefault(ACTION_INBOX, [])
    for index, agent in world.store(cmp.AGENT).sorted_pairs():
        if agent["state"] != "active" or agent["autonomyLevel"] <= 0.0:
            continue
        inbox.extend(agent_step(world, world.handle(index)))


def action_system(world: World) -> None:
    """Drain staged and agent actions, apply them, emit collision events."""
    staged = world.resources.get(STAGED_ACTIONS, [])
    world.resources[STAGED_ACTIONS] = []
    inbox = world.resources.get(ACTION_INBOX, [])
    world.resources[ACTION_INBOX] = []

    arrivals: dict[tuple[int, int], list[int]] = {}
    outcomes = []
    for action in staged + inbox:
        outcome = apply_action(world, action, arrivals)
        outcomes.append(outcome)
        if outcome["status"] == "blocked" and action.get("origin") == "intention":
            apply_contingency(
                world,
                EntityId.from_pair(action["issuer"]),
                "action-blocked",
                action["intention"],
            )
    world.resources[OUTCOMES] = outcomes

    for cell in sorted(arrivals):
        movers = arrivals[cell]
        if len(movers) > 1:
            world.emit("collision", {
                "x": cell[0],
                "y": cell[1],
                "entities": sorted(movers),
            })
            world.log.info("collision", x=cell[0], y=cell[1],
                           entities=",".join(map(str, sorted(movers))))


def achievement_system(world: World) -> None:
    """Post-action sweep: refresh beliefs and retire goals satisfied by this
    tick's own actions, so reaching a target counts in the same tick."""
    from agentworld.agents.reasoning import mark_achieved_goals, revise_beliefs

    for index, agent in world.store(cmp.AGENT).sorted_pairs():
        if agent["state"] != "active" or agent["autonomyLevel"] <= 0.0:
            continue
        eid = world.handle(index)
        goal_comp = world.get_component(eid, cmp.GOAL)
        if not goal_comp or not goal_comp["goals"]:
            continue
        radius = behavior_for(world, eid).get("perceptionRadius", 1)
        belief_comp = world.get_component(eid, cmp.BELIEF)
        revise_beliefs(belief_comp, perceive(world, eid, radius))
        mark_achieved_goals(world, eid)
