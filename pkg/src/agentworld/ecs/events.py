"""Typed event records and the immediate/queued dispatcher.

Immediate events run their subscribers synchronously before ``emit``
returns, with a reentrancy cap so a subscriber that emits more immediate
events cannot cascade forever. Queued events are buffered and handed to
subscribers at the start of the next tick — never within the tick that
emitted them.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable, Optional

from agentworld.ecs.entity import EntityId
from agentworld.errors import DispatchDepthExceeded

MAX_IMMEDIATE_DEPTH = 32

Handler = Callable[["EventRecord"], None]


@dataclass(slots=True)
class EventRecord:
    event_kind: str
    payload: dict = field(default_factory=dict)
    source_entity: Optional[EntityId] = None
    tick_emitted: int = 0

    def to_record(self) -> dict:
        return {
            "kind": self.event_kind,
            "payload": self.payload,
            "sourceEntity": self.source_entity.as_pair() if self.source_entity else None,
            "tickEmitted": self.tick_emitted,
        }


class EventDispatcher:
    def __init__(self):
        self._subscribers: dict[str, list[Handler]] = {}
        self._queued: list[EventRecord] = []
        self._depth = 0

    def subscribe(self, event_kind: str, handler: Handler) -> None:
        self._subscribers.setdefault(event_kind, []).append(handler)

    def emit_immediate(self, event: EventRecord) -> None:
        if self._depth >= MAX_IMMEDIATE_DEPTH:
            raise DispatchDepthExceeded(
                f"immediate event cascade exceeded depth {MAX_IMMEDIATE_DEPTH} "
                f"(emitting {event.event_kind!r})"
            )
        self._depth += 1
        try:
            for handler in self._subscribers.get(event.event_kind, ()):
                handler(event)
        finally:
            self._depth -= 1

    def emit_queued(self, event: EventRecord) -> None:
        self._queued.append(event)

    def pending_count(self) -> int:
        return len(self._queued)

    def drain(self) -> list[EventRecord]:
        """Take everything queued so far and dispatch it.

        Events queued by handlers during the drain land in the fresh queue
        and wait for the next drain.
        """
        batch = self._queued
        self._queued = []
        for event in batch:
            self.emit_immediate(event)
        return batch
