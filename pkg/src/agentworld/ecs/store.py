"""Sparse-set component storage.

One store per component kind: records live densely packed in a list (so
iteration walks contiguous data), and a sparse index maps entity index to
dense position. Removal swap-pops with the last record, which keeps the
dense array gap-free at the cost of insertion-order stability; callers that
need a stable order sort by entity index.
"""

from __future__ import annotations

from typing import Any, Iterator, Optional

DEFAULT_CAPACITY_HINT = 10_000


class ComponentStore:
    def __init__(self, kind: str, capacity_hint: int = DEFAULT_CAPACITY_HINT):
        self.kind = kind
        self.capacity_hint = capacity_hint  # advisory sizing hint; lists grow on demand
        self.entity_indexes: list[int] = []
        self.records: list[Any] = []
        self.positions: dict[int, int] = {}

    def __len__(self) -> int:
        return len(self.records)

    def __contains__(self, entity_index: int) -> bool:
        return entity_index in self.positions

    def set(self, entity_index: int, record: Any) -> None:
        """Insert or replace (last write wins)."""
        pos = self.positions.get(entity_index)
        if pos is None:
            self.positions[entity_index] = len(self.records)
            self.entity_indexes.append(entity_index)
            self.records.append(record)
        else:
            self.records[pos] = record

    def get(self, entity_index: int) -> Optional[Any]:
        pos = self.positions.get(entity_index)
        return None if pos is None else self.records[pos]

    def remove(self, entity_index: int) -> bool:
        """Swap-remove; returns False if the entity had no record here."""
        pos = self.positions.pop(entity_index, None)
        if pos is None:
            return False
        last = len(self.records) - 1
        if pos != last:
            moved_index = self.entity_indexes[last]
            self.entity_indexes[pos] = moved_index
            self.records[pos] = self.records[last]
            self.positions[moved_index] = pos
        self.entity_indexes.pop()
        self.records.pop()
        return True

    def pairs(self) -> Iterator[tuple[int, Any]]:
        """(entity index, record) in dense order — fast, unsorted."""
        return zip(self.entity_indexes, self.records)

    def sorted_pairs(self) -> list[tuple[int, Any]]:
        return sorted(zip(self.entity_indexes, self.records))

    def clear(self) -> None:
        self.entity_indexes.clear()
        self.records.clear()
        self.positions.clear()
