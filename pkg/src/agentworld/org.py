"""Groups and roles: membership, policies, role assignment, permissions.

Groups are entities carrying a group component; agents may belong to many
groups at once. Policies are declared per group from a fixed vocabulary
(max-members, invite-only, role-required, role-conflicts) and are enforced
at join/assign time. An agent holds at most one active role; held-but-
inactive roles stay dormant until activated.
"""

from __future__ import annotations

from typing import Optional

from agentworld.agents import components as cmp
from agentworld.ecs.entity import EntityId
from agentworld.ecs.world import World
from agentworld.errors import (
    CycleDetected,
    NotAMember,
    PolicyViolation,
    RoleConflict,
    ScenarioError,
)


def group_component(name: str, structure="flat", policies: Optional[dict] = None) -> dict:
    return {
        "name": name,
        "members": [],
        "policies": dict(policies or {}),
        "structure": structure,  # "flat" | {"parent": [index, generation]}
    }


def create_group(world: World, name: str, structure="flat", policies: Optional[dict] = None) -> EntityId:
    """New group entity with empty membership.

    Hierarchical structures name a parent group; the parent chain is walked
    to reject cycles (including a group claiming itself, via a predicted or
    stale handle, as its own ancestor).
    """
    policies = dict(policies or {})
    limit = policies.get("max-members")
    if limit is not None and int(limit.get("n", 0)) < 1:
        raise ScenarioError("max-members policy requires n >= 1")
    if isinstance(structure, dict) and "parent" in structure:
        # a group cannot be its own ancestor; an unborn (self) parent is
        # rejected here too since it cannot be live yet
        parent = EntityId.from_pair(structure["parent"])
        _check_parent_chain(world, parent, name)
        structure = {"parent": parent.as_pair()}
    eid = world.create_entity()
    world.add_component(eid, cmp.GROUP, group_component(name, structure, policies))
    world.log.info("group-created", name=name, index=eid.index)
    return eid


def _check_parent_chain(world: World, parent: EntityId, name: str) -> None:
    seen = set()
    current: Optional[EntityId] = parent
    while current is not None:
        if current in seen:
            raise CycleDetected(f"group parent chain for {name!r} contains a cycle")
        seen.add(current)
        if not world.is_live(current):
            raise CycleDetected(
                f"group parent chain for {name!r} references a dead or unborn group"
            )
        record = world.get_component(current, cmp.GROUP)
        if record is None:
            raise CycleDetected(f"parent of group {name!r} is not a group entity")
        structure = record["structure"]
        if isinstance(structure, dict) and "parent" in structure:
            current = EntityId.from_pair(structure["parent"])
        else:
            current = None


def parent_chain(world: World, group_id: EntityId) -> list[EntityId]:
    chain = []
    record = world.get_component(group_id, cmp.GROUP)
    while record is not None:
        structure = record["structure"]
        if not (isinstance(structure, dict) and "parent" in structure):
            break
        parent = EntityId.from_pair(structure["parent"])
        chain.append(parent)
        record = world.get_component(parent, cmp.GROUP)
    return chain


def _member_pairs(group: dict) -> list[list[int]]:
    return group["members"]


def is_member(group: dict, eid: EntityId) -> bool:
    return eid.as_pair() in group["members"]


def join_group(world: World, agent_id: EntityId, group_id: EntityId) -> None:
    """Add the agent to the group if every policy admits it."""
    world.entities.check_live(agent_id)
    world.entities.check_live(group_id)
    group = world.get_component(group_id, cmp.GROUP)
    if group is None:
        raise NotAMember(f"entity {group_id.index} is not a group")
    if is_member(group, agent_id):
        return  # joining twice is a no-op

    policies = group["policies"]
    limit = policies.get("max-members")
    if limit is not None and len(group["members"]) >= int(limit["n"]):
        raise PolicyViolation("max-members")
    invite = policies.get("invite-only")
    if invite is not None and agent_id.as_pair() not in invite.get("invited", []):
        raise PolicyViolation("invite-only")
    required = policies.get("role-required")
    if required is not None:
        role_comp = world.get_component(agent_id, cmp.ROLE)
        held = {name for name, _ in (role_comp or {}).get("roles", [])}
        if required["role"] not in held:
            raise PolicyViolation("role-required")

    group["members"].append(agent_id.as_pair())
    group["members"].sort()
    world.log.info("group-joined", group=group["name"], index=agent_id.index)


def leave_group(world: World, agent_id: EntityId, group_id: EntityId) -> None:
    group = world.get_component(group_id, cmp.GROUP)
    if group is None or not is_member(group, agent_id):
        return
    group["members"].remove(agent_id.as_pair())
    _drop_roles_for_group(world, agent_id, group_id)


def _role_component_for(world: World, agent_id: EntityId) -> dict:
    record = world.get_component(agent_id, cmp.ROLE)
    if record is None:
        record = {"roles": [], "activeRole": None, "permissions": {}}
        world.add_component(agent_id, cmp.ROLE, record)
    return record


def assign_role(
    world: World,
    agent_id: EntityId,
    role: str,
    group_id: EntityId,
    capabilities=(),
) -> None:
    """Grant a role within a group the agent belongs to.

    Declared conflict pairs in the group's ``role-conflicts`` policy reject
    the assignment when the agent already holds the conflicting role there.
    The first role an agent receives becomes its active role.
    """
    world.entities.check_live(agent_id)
    world.entities.check_live(group_id)
    group = world.get_component(group_id, cmp.GROUP)
    if group is None or not is_member(group, agent_id):
        raise NotAMember(
            f"entity {agent_id.index} is not a member of group {group_id.index}"
        )
    record = _role_component_for(world, agent_id)
    held_here = {name for name, gid in record["roles"] if gid == group_id.as_pair()}
    conflicts = group["policies"].get("role-conflicts", {}).get("pairs", [])
    for a, b in conflicts:
        if (role == a and b in held_here) or (role == b and a in held_here):
            existing = b if role == a else a
            raise RoleConflict(existing)

    entry = [role, group_id.as_pair()]
    if entry not in record["roles"]:
        record["roles"].append(entry)
        record["roles"].sort()
    record["permissions"][role] = sorted(set(capabilities))
    if record["activeRole"] is None:
        record["activeRole"] = entry
    world.log.info("role-assigned", role=role, index=agent_id.index,
                   group=group["name"])


def set_active_role(world: World, agent_id: EntityId, role: str, group_id: EntityId) -> None:
    record = world.get_component(agent_id, cmp.ROLE)
    entry = [role, group_id.as_pair()]
    if record is None or entry not in record["roles"]:
        raise NotAMember(f"entity {agent_id.index} does not hold role {role!r} there")
    record["activeRole"] = entry


def check_permission(world: World, agent_id: EntityId, capability: str) -> bool:
    """True iff the agent's active role grants the capability."""
    world.entities.check_live(agent_id)
    record = world.get_component(agent_id, cmp.ROLE)
    if record is None or record["activeRole"] is None:
        return False
    role = record["activeRole"][0]
    return capability in record["permissions"].get(role, ())


def _drop_roles_for_group(world: World, agent_id: EntityId, group_id: EntityId) -> None:
    record = world.get_component(agent_id, cmp.ROLE)
    if record is None:
        return
    pair = group_id.as_pair()
    kept = [entry for entry in record["roles"] if entry[1] != pair]
    dropped_roles = {entry[0] for entry in record["roles"] if entry[1] == pair}
    record["roles"] = kept
    for role in dropped_roles:
        if not any(entry[0] == role for entry in kept):
            record["permissions"].pop(role, None)
    if record["activeRole"] is not None and record["activeRole"][1] == pair:
        record["activeRole"] = kept[0] if kept else None


def groups_of(world: World, agent_id: EntityId) -> list[EntityId]:
    out = []
    for index, group in world.store(cmp.GROUP).sorted_pairs():
        if is_member(group, agent_id):
            out.append(world.handle(index))
    return out


def _on_destroy(world: World, eid: EntityId) -> None:
    """Referential integrity: a destroyed agent vanishes from every group's
    members; a destroyed group vanishes from every agent's roles."""
    pair = eid.as_pair()
    if world.get_component(eid, cmp.GROUP) is not None:
        for index, record in world.store(cmp.ROLE).sorted_pairs():
            kept = [entry for entry in record["roles"] if entry[1] != pair]
            if len(kept) != len(record["roles"]):
                dropped = {e[0] for e in record["roles"] if e[1] == pair}
                record["roles"] = kept
                for role in dropped:
                    if not any(entry[0] == role for entry in kept):
                        record["permissions"].pop(role, None)
                if record["activeRole"] is not None and record["activeRole"][1] == pair:
                    record["activeRole"] = kept[0] if kept else None
    for _, group in world.store(cmp.GROUP).pairs():
        if pair in group["members"]:
            group["members"].remove(pair)


def install(world: World) -> None:
    world.add_destroy_hook(_on_destroy)
