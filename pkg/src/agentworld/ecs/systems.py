"""System registration and deterministic scheduling.

The schedule is the topological order of the declared dependencies, with
ties broken by registration order, so rebuilding the same world always
executes systems in the same sequence.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from typing import Callable

from agentworld.errors import CycleDetected, DuplicateSystemName, UnknownDependency


@dataclass(slots=True)
class SystemDescriptor:
    name: str
    reads: frozenset = frozenset()
    writes: frozenset = frozenset()
    dependencies: frozenset = frozenset()
    order: int = 0


@dataclass(slots=True)
class RegisteredSystem:
    descriptor: SystemDescriptor
    body: Callable


def topological_schedule(systems: dict[str, RegisteredSystem]) -> list[str]:
    """Dependency-respecting order; registration order breaks ties."""
    indegree: dict[str, int] = {name: 0 for name in systems}
    dependents: dict[str, list[str]] = {name: [] for name in systems}
    for name, sys in systems.items():
        for dep in sys.descriptor.dependencies:
            if dep not in systems:
                raise UnknownDependency(f"system {name!r} depends on unknown system {dep!r}")
            indegree[name] += 1
            dependents[dep].append(name)

    ready = [
        (sys.descriptor.order, name)
        for name, sys in systems.items()
        if indegree[name] == 0
    ]
    heapq.heapify(ready)
    schedule: list[str] = []
    while ready:
        _, name = heapq.heappop(ready)
        schedule.append(name)
        for child in dependents[name]:
            indegree[child] -= 1
            if indegree[child] == 0:
                heapq.heappush(ready, (systems[child].descriptor.order, child))
    if len(schedule) != len(systems):
        stuck = sorted(set(systems) - set(schedule))
        raise CycleDetected(f"system dependency cycle involving {stuck}")
    return schedule


class SystemTable:
    def __init__(self):
        self._systems: dict[str, RegisteredSystem] = {}
        self._schedule: list[str] = []
        self._next_order = 0

    def register(
        self,
        name: str,
        body: Callable,
        *,
        reads=(),
        writes=(),
        after=(),
    ) -> SystemDescriptor:
        if name in self._systems:
            raise DuplicateSystemName(f"system {name!r} already registered")
        for dep in after:
            if dep not in self._systems:
                raise UnknownDependency(
                    f"system {name!r} depends on unknown system {dep!r}"
                )
        desc = SystemDescriptor(
            name=name,
            reads=frozenset(reads),
            writes=frozenset(writes),
            dependencies=frozenset(after),
            order=self._next_order,
        )
        self._next_order += 1
        self._systems[name] = RegisteredSystem(desc, body)
        self._schedule = topological_schedule(self._systems)
        return desc

    @property
    def schedule(self) -> list[str]:
        return list(self._schedule)

    def __iter__(self):
        for name in self._schedule:
            yield self._systems[name]

    def __contains__(self, name: str) -> bool:
        return name in self._systems

    def __len__(self) -> int:
        return len(self._systems)
