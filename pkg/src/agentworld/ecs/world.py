"""The World: entity registry, component stores, schedule, events, tick loop.

Determinism contract: a world is fully described by (seed, construction
sequence). The tick-local RNG is reseeded from ``(seed, tick)`` at every
tick start, so resuming a restored world replays exactly the random stream
an uninterrupted run would have drawn.

Single-writer contract: all mutation happens on one logical execution
context; external inputs are staged in resources and drained by systems at
tick boundaries.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from random import Random
from typing import Any, Callable, Iterable, Optional
from uuid import UUID

from agentworld.ecs.entity import EntityId, EntityRegistry
from agentworld.ecs.events import EventDispatcher, EventRecord
from agentworld.ecs.log import RunLog
from agentworld.ecs.store import DEFAULT_CAPACITY_HINT, ComponentStore
from agentworld.ecs.systems import SystemTable
from agentworld.errors import UnknownComponentKind


@dataclass(slots=True)
class TickReport:
    tick: int
    events_drained: int
    events: list[EventRecord] = field(default_factory=list)
    system_seconds: dict[str, float] = field(default_factory=dict)


class World:
    def __init__(
        self,
        seed: int = 0,
        *,
        max_entities: Optional[int] = None,
        log: Optional[RunLog] = None,
    ):
        self.rng_seed = seed
        self.tick_count = 0
        self.rng = Random(f"{seed}:init")
        self.entities = EntityRegistry(max_entities)
        self.stores: dict[str, ComponentStore] = {}
        self.systems = SystemTable()
        self.events = EventDispatcher()
        self.resources: dict[str, Any] = {}
        self.log = log or RunLog()
        self._destroy_hooks: list[Callable[["World", EntityId], None]] = []

    # -- entities ------------------------------------------------------------

    def create_entity(self) -> EntityId:
        eid = self.entities.allocate()
        self.log.info("entity-created", index=eid.index, generation=eid.generation)
        self.emit("entity-created", {"index": eid.index, "generation": eid.generation})
        return eid

    def destroy_entity(self, eid: EntityId) -> None:
        self.entities.check_live(eid)
        for hook in self._destroy_hooks:
            hook(self, eid)
        for store in self.stores.values():
            store.remove(eid.index)
        self.entities.release(eid)
        self.log.info("entity-destroyed", index=eid.index, generation=eid.generation)
        self.emit("entity-destroyed", {"index": eid.index, "generation": eid.generation})

    def is_live(self, eid: EntityId) -> bool:
        return self.entities.is_live(eid)

    def live_entities(self) -> list[EntityId]:
        return list(self.entities.live())

    def handle(self, index: int) -> EntityId:
        return self.entities.handle(index)

    def add_destroy_hook(self, hook: Callable[["World", EntityId], None]) -> None:
        """Hook runs while the entity is still live, before its components go away."""
        self._destroy_hooks.append(hook)

    # -- components ----------------------------------------------------------

    def register_component(
        self, kind: str, *, capacity_hint: int = DEFAULT_CAPACITY_HINT
    ) -> ComponentStore:
        store = self.stores.get(kind)
        if store is None:
            store = ComponentStore(kind, capacity_hint)
            self.stores[kind] = store
        return store

    def store(self, kind: str) -> ComponentStore:
        store = self.stores.get(kind)
        if store is None:
            raise UnknownComponentKind(f"component kind {kind!r} is not registered")
        return store

    def add_component(self, eid: EntityId, kind: str, record: Any) -> None:
        self.entities.check_live(eid)
        self.store(kind).set(eid.index, record)

    def remove_component(self, eid: EntityId, kind: str) -> None:
        self.entities.check_live(eid)
        self.store(kind).remove(eid.index)

    def get_component(self, eid: EntityId, kind: str) -> Any:
        self.entities.check_live(eid)
        return self.store(kind).get(eid.index)

    def has_component(self, eid: EntityId, kind: str) -> bool:
        self.entities.check_live(eid)
        return eid.index in self.store(kind)

    # -- queries ---------------------------------------------------------------

    def query(self, required: Iterable[str]) -> list[EntityId]:
        """Live entities holding every required kind, ascending entity index."""
        kinds = list(required)
        if not kinds:
            return self.live_entities()
        stores = [self.store(kind) for kind in kinds]
        stores.sort(key=len)
        smallest, rest = stores[0], stores[1:]
        out = []
        for index in smallest.entity_indexes:
            if all(index in s for s in rest) and self.entities.index_is_live(index):
                out.append(index)
        out.sort()
        return [self.entities.handle(index) for index in out]

    # -- events ----------------------------------------------------------------

    def subscribe(self, event_kind: str, handler) -> None:
        self.events.subscribe(event_kind, handler)

    def emit(
        self,
        event_kind: str,
        payload: Optional[dict] = None,
        *,
        source: Optional[EntityId] = None,
        mode: str = "queued",
    ) -> None:
        event = EventRecord(
            event_kind=event_kind,
            payload=payload or {},
            source_entity=source,
            tick_emitted=self.tick_count,
        )
        if mode == "immediate":
            self.events.emit_immediate(event)
        elif mode == "queued":
            self.events.emit_queued(event)
        else:
            raise ValueError(f"unknown event mode {mode!r}")

    # -- systems & tick ----------------------------------------------------------

    def register_system(self, name: str, body, *, reads=(), writes=(), after=()) -> None:
        self.systems.register(name, body, reads=reads, writes=writes, after=after)

    @property
    def schedule(self) -> list[str]:
        return self.systems.schedule

    def reseed_for_tick(self) -> None:
        self.rng.seed(f"{self.rng_seed}:{self.tick_count}", version=2)

    def next_uuid(self) -> str:
        """Deterministic UUID4-format id drawn from the world RNG."""
        return str(UUID(int=self.rng.getrandbits(128), version=4))

    def tick(self) -> TickReport:
        self.log.set_tick(self.tick_count)
        self.reseed_for_tick()
        drained = self.events.drain()
        report = TickReport(tick=self.tick_count, events_drained=len(drained), events=drained)
        for system in self.systems:
            name = system.descriptor.name
            started = time.perf_counter()
            try:
                system.body(self)
            except Exception as exc:
                exc.args = (f"system {name!r} failed during tick {self.tick_count}: {exc}",)
                raise
            elapsed = time.perf_counter() - started
            report.system_seconds[name] = elapsed
            self.log.debug("system-run", system=name, seconds=f"{elapsed:.6f}")
        self.tick_count += 1
        self.log.set_tick(self.tick_count)
        self.log.trace("tick-complete", events=len(drained))
        return report
