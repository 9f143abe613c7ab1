"""Entity identity and lifecycle bookkeeping.

Entities are (index, generation) handles. Destroying an entity bumps the
generation stored for its index, so a handle kept past destruction can be
recognized as stale instead of silently aliasing whatever reuses the slot.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterator, Optional

from agentworld.errors import CapacityExhausted, StaleEntityError


@dataclass(frozen=True, slots=True)
class EntityId:
    index: int
    generation: int

    def as_pair(self) -> list[int]:
        """JSON-friendly ``[index, generation]`` form used inside records."""
        return [self.index, self.generation]

    @classmethod
    def from_pair(cls, pair) -> "EntityId":
        return cls(int(pair[0]), int(pair[1]))


class EntityRegistry:
    """Allocates entity slots and tracks which handles are live.

    Freed indexes are recycled FIFO; each recycle hands out the bumped
    generation recorded at destroy time.
    """

    def __init__(self, max_entities: Optional[int] = None):
        self.max_entities = max_entities
        self._generations: list[int] = []
        self._alive: list[bool] = []
        self._free: deque[int] = deque()

    def __len__(self) -> int:
        return len(self._generations) - len(self._free)

    def allocate(self) -> EntityId:
        if self._free:
            index = self._free.popleft()
            self._alive[index] = True
            return EntityId(index, self._generations[index])
        if self.max_entities is not None and len(self._generations) >= self.max_entities:
            raise CapacityExhausted(
                f"entity registry is at its hard cap of {self.max_entities}"
            )
        index = len(self._generations)
        self._generations.append(0)
        self._alive.append(True)
        return EntityId(index, 0)

    def release(self, eid: EntityId) -> None:
        self.check_live(eid)
        self._alive[eid.index] = False
        self._generations[eid.index] += 1
        self._free.append(eid.index)

    def is_live(self, eid: EntityId) -> bool:
        return (
            0 <= eid.index < len(self._generations)
            and self._alive[eid.index]
            and self._generations[eid.index] == eid.generation
        )

    def index_is_live(self, index: int) -> bool:
        return 0 <= index < len(self._alive) and self._alive[index]

    def check_live(self, eid: EntityId) -> None:
        if not self.is_live(eid):
            raise StaleEntityError(
                f"entity ({eid.index}, {eid.generation}) is not live"
            )

    def handle(self, index: int) -> EntityId:
        """Current live handle for a slot index."""
        if not self.index_is_live(index):
            raise StaleEntityError(f"no live entity at index {index}")
        return EntityId(index, self._generations[index])

    def live(self) -> Iterator[EntityId]:
        """All live handles in ascending index order."""
        for index, alive in enumerate(self._alive):
            if alive:
                yield EntityId(index, self._generations[index])

    # -- snapshot plumbing -------------------------------------------------

    def to_record(self) -> dict:
        return {
            "generations": list(self._generations),
            "alive": [1 if a else 0 for a in self._alive],
            "free": list(self._free),
        }

    @classmethod
    def from_record(cls, record: dict, max_entities: Optional[int] = None) -> "EntityRegistry":
        reg = cls(max_entities)
        reg._generations = [int(g) for g in record["generations"]]
        reg._alive = [bool(a) for a in record["alive"]]
        reg._free = deque(int(i) for i in record["free"])
        return reg
