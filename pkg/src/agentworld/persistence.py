"""Canonical world snapshots, restart recovery, storage backends.

A snapshot is canonical JSON (sorted keys, fixed separators, ASCII) of the
full durable state: the entity registry, every live entity's component
records, the environment models, the declarative behavior library, and the
broker's pending deliveries and subscriptions. A SHA-256 checksum over the
canonical payload is embedded, so corruption is detected before any state
is rebuilt. Two snapshots of the same world state are byte-identical.

Restore rebuilds a world that continues exactly as the original would
have: the tick counter and RNG seed are part of the payload, and the tick
loop reseeds from (seed, tick), so no generator state needs to survive.
"""

from __future__ import annotations

import hashlib
import json
import os
import re
from dataclasses import dataclass
from typing import Optional

from agentworld import messaging
from agentworld.agents.spec import AGENT_NAMES, BEHAVIORS, rebuild_name_index
from agentworld.ecs.entity import EntityRegistry
from agentworld.ecs.log import RunLog
from agentworld.ecs.world import World
from agentworld.env import FACTS, GRID, FactRegistry, GridEnvironment
from agentworld.errors import ChecksumMismatch, UnsupportedVersion

FORMAT_VERSION = 1


def canonical_bytes(data: dict) -> bytes:
    return json.dumps(
        data, sort_keys=True, separators=(",", ":"), ensure_ascii=True
    ).encode("ascii")


def content_checksum(data: dict) -> str:
    body = {key: value for key, value in data.items() if key != "checksum"}
    return hashlib.sha256(canonical_bytes(body)).hexdigest()


@dataclass(slots=True)
class Snapshot:
    data: dict
    raw: bytes

    @property
    def tick(self) -> int:
        return self.data["tick"]

    @property
    def checksum(self) -> str:
        return self.data["checksum"]

    @classmethod
    def from_bytes(cls, raw: bytes) -> "Snapshot":
        try:
            data = json.loads(raw)
        except (ValueError, UnicodeDecodeError) as exc:
            raise ChecksumMismatch(f"snapshot payload is not parseable: {exc}")
        if not isinstance(data, dict) or "checksum" not in data:
            raise ChecksumMismatch("snapshot payload has no checksum")
        if data["checksum"] != content_checksum(data):
            raise ChecksumMismatch("snapshot checksum does not match content")
        return cls(data=data, raw=bytes(raw))


def snapshot(world: World) -> Snapshot:
    """Canonical capture of the world between ticks."""
    entities = []
    for eid in world.live_entities():
        components = {}
        for kind, store in world.stores.items():
            record = store.get(eid.index)
            if record is not None:
                components[kind] = record
        entities.append({
            "index": eid.index,
            "generation": eid.generation,
            "components": components,
        })

    grid = world.resources.get(GRID)
    facts = world.resources.get(FACTS)
    broker = world.resources.get(messaging.BROKER)
    data = {
        "formatVersion": FORMAT_VERSION,
        "tick": world.tick_count,
        "rngSeed": world.rng_seed,
        "registry": world.entities.to_record(),
        "componentKinds": sorted(world.stores),
        "entities": entities,
        "environment": {
            "grid": grid.to_record() if grid else None,
            "facts": facts.to_record() if facts else None,
        },
        "behaviors": world.resources.get(BEHAVIORS, {}),
        "broker": broker.to_record() if broker else None,
    }
    data["checksum"] = content_checksum(data)
    raw = canonical_bytes(data)
    # parse back so the held dict never aliases live component records
    return Snapshot(data=json.loads(raw), raw=raw)


def restore(raw: bytes, *, log: Optional[RunLog] = None) -> World:
    """Rebuild a world from snapshot bytes; systems are not registered here."""
    snap = Snapshot.from_bytes(raw)
    data = snap.data
    version = data.get("formatVersion")
    if version != FORMAT_VERSION:
        raise UnsupportedVersion(f"snapshot format {version!r} is not supported")

    world = World(seed=data["rngSeed"], log=log)
    world.tick_count = data["tick"]
    world.entities = EntityRegistry.from_record(data["registry"])
    for kind in data["componentKinds"]:
        world.register_component(kind)
    for entry in data["entities"]:
        index = entry["index"]
        for kind, record in entry["components"].items():
            world.register_component(kind).set(index, record)

    environment = data.get("environment", {})
    if environment.get("grid") is not None:
        world.resources[GRID] = GridEnvironment.from_record(environment["grid"])
    if environment.get("facts") is not None:
        world.resources[FACTS] = FactRegistry.from_record(environment["facts"])
    world.resources[BEHAVIORS] = data.get("behaviors", {})
    if data.get("broker") is not None:
        world.resources[messaging.BROKER] = messaging.InMemoryBroker.from_record(data["broker"])
    if "object" in world.stores:
        rebuild_name_index(world)
    else:
        world.resources[AGENT_NAMES] = {}
    return world


# -- storage backends ------------------------------------------------------------

_LOCATOR_RE = re.compile(r"^snap-(\d+)-([0-9a-f]+)\.json$")


def _locator_for(snap: Snapshot) -> str:
    return f"snap-{snap.tick}-{snap.checksum[:8]}.json"


def _sort_locators(locators) -> list[str]:
    def key(name: str):
        match = _LOCATOR_RE.match(name)
        return (int(match.group(1)) if match else -1, name)

    return sorted(locators, key=key)


class MemoryBackend:
    """In-memory backend, mostly for tests; bytes stored verbatim."""

    def __init__(self):
        self._blobs: dict[str, bytes] = {}

    def save(self, snap: Snapshot) -> str:
        locator = _locator_for(snap)
        self._blobs[locator] = snap.raw
        return locator

    def load(self, locator: str) -> Snapshot:
        if locator not in self._blobs:
            raise ChecksumMismatch(f"no snapshot stored at {locator!r}")
        return Snapshot.from_bytes(self._blobs[locator])

    def list(self) -> list[str]:
        return _sort_locators(self._blobs)


class FileBackend:
    """One file per snapshot: ``snap-<tick>-<checksum-prefix>.json``."""

    def __init__(self, directory: str):
        self.directory = directory
        os.makedirs(directory, exist_ok=True)

    def _path(self, locator: str) -> str:
        return os.path.join(self.directory, locator)

    def save(self, snap: Snapshot) -> str:
        locator = _locator_for(snap)
        tmp = self._path(locator) + ".tmp"
        with open(tmp, "wb") as fh:
            fh.write(snap.raw)
        os.replace(tmp, self._path(locator))
        return locator

    def load(self, locator: str) -> Snapshot:
        path = self._path(locator)
        if not os.path.exists(path):
            raise ChecksumMismatch(f"no snapshot file at {locator!r}")
        with open(path, "rb") as fh:
            return Snapshot.from_bytes(fh.read())

    def list(self) -> list[str]:
        return _sort_locators(
            name for name in os.listdir(self.directory) if _LOCATOR_RE.match(name)
        )

    def latest(self) -> Optional[str]:
        locators = self.list()
        return locators[-1] if locators else None
