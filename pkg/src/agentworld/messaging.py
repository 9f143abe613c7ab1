"""Agent communication: envelopes, broker contract, in-memory broker.

Three patterns ride one primitive: point-to-point targets one agent, group
sends fan out to the membership snapshot taken at send time, and topic
publishes fan out to current subscribers. Each recipient gets its own
pending delivery, attempted at the next tick's delivery phase.

Semantics: ``at-most-once`` tries a delivery exactly once and loses it if
the (injectable) fault roll drops it; ``at-least-once`` keeps redelivering
every ``redelivery_interval`` ticks until acknowledged, while receivers
deduplicate on message id so an inbox observes each message at most once.
Deliveries auto-acknowledge on inbox arrival; explicit ``ack`` exists for
external consumers and is idempotent.

Messaging state lives beside the component stores (only inboxes are
components), so removing the broker leaves the tick loop fully functional
with zero deliveries.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

from agentworld.agents import components as cmp
from agentworld.ecs.entity import EntityId
from agentworld.ecs.world import World
from agentworld.errors import UnknownTarget
from agentworld.resources import BROKER, DELIVERIES

DEFAULT_DEDUP_WINDOW = 4096
DEFAULT_REDELIVERY_INTERVAL = 1

AT_MOST_ONCE = "at-most-once"
AT_LEAST_ONCE = "at-least-once"


@dataclass(slots=True)
class MessageEnvelope:
    message_id: str
    sender: EntityId
    target: dict  # {"kind": "agent"|"group", "id": [i, g]} | {"kind": "topic", "name": str}
    performative: str = "inform"
    payload: dict = None
    semantics: str = AT_MOST_ONCE
    attempt: int = 1

    def to_wire(self) -> dict:
        return {
            "messageId": self.message_id,
            "sender": self.sender.as_pair(),
            "target": self.target,
            "performative": self.performative,
            "payload": self.payload or {},
            "semantics": self.semantics,
            "attempt": self.attempt,
        }

    @classmethod
    def from_wire(cls, wire: dict) -> "MessageEnvelope":
        return cls(
            message_id=wire["messageId"],
            sender=EntityId.from_pair(wire["sender"]),
            target=wire["target"],
            performative=wire.get("performative", "inform"),
            payload=wire.get("payload", {}),
            semantics=wire.get("semantics", AT_MOST_ONCE),
            attempt=wire.get("attempt", 1),
        )


def envelope_from_wire(world: World, wire: dict) -> MessageEnvelope:
    """Build an envelope, minting a deterministic message id if absent."""
    wire = dict(wire)
    wire.setdefault("messageId", world.next_uuid())
    return MessageEnvelope.from_wire(wire)


@dataclass(slots=True)
class PendingDelivery:
    envelope: MessageEnvelope
    recipient: int  # entity index
    next_attempt: int
    attempt: int = 1

    def to_record(self) -> dict:
        return {
            "envelope": self.envelope.to_wire(),
            "recipient": self.recipient,
            "nextAttempt": self.next_attempt,
            "attempt": self.attempt,
        }

    @classmethod
    def from_record(cls, record: dict) -> "PendingDelivery":
        return cls(
            envelope=MessageEnvelope.from_wire(record["envelope"]),
            recipient=record["recipient"],
            next_attempt=record["nextAttempt"],
            attempt=record["attempt"],
        )


class BrokerContract:
    """Operations any broker backing the runtime must support."""

    def publish(self, delivery: PendingDelivery) -> None:
        raise NotImplementedError

    def subscribe(self, topic: str, entity_index: int) -> None:
        raise NotImplementedError

    def subscribers(self, topic: str) -> list[int]:
        raise NotImplementedError

    def ack(self, message_id: str, entity_index: int) -> None:
        raise NotImplementedError

    def pending(self, entity_index: int) -> list[PendingDelivery]:
        raise NotImplementedError


class InMemoryBroker(BrokerContract):
    """Reference broker. ``drop_probability`` injects transport faults on
    delivery attempts; it never touches ack bookkeeping."""

    def __init__(
        self,
        drop_probability: float = 0.0,
        redelivery_interval: int = DEFAULT_REDELIVERY_INTERVAL,
        dedup_window: int = DEFAULT_DEDUP_WINDOW,
    ):
        if not 0.0 <= drop_probability <= 1.0:
            raise ValueError("drop_probability must be in [0, 1]")
        self.drop_probability = drop_probability
        self.redelivery_interval = redelivery_interval
        self.dedup_window = dedup_window
        self.queues: dict[int, list[PendingDelivery]] = {}
        self.subscriptions: dict[str, set[int]] = {}
        # run counters (not part of snapshots)
        self.sent_count = 0
        self.delivered_count = 0
        self.dropped_count = 0

    def publish(self, delivery: PendingDelivery) -> None:
        self.queues.setdefault(delivery.recipient, []).append(delivery)
        self.sent_count += 1

    def subscribe(self, topic: str, entity_index: int) -> None:
        self.subscriptions.setdefault(topic, set()).add(entity_index)

    def subscribers(self, topic: str) -> list[int]:
        return sorted(self.subscriptions.get(topic, ()))

    def ack(self, message_id: str, entity_index: int) -> None:
        queue = self.queues.get(entity_index)
        if queue:
            self.queues[entity_index] = [
                d for d in queue if d.envelope.message_id != message_id
            ]

    def pending(self, entity_index: int) -> list[PendingDelivery]:
        return list(self.queues.get(entity_index, ()))

    def pending_total(self) -> int:
        return sum(len(q) for q in self.queues.values())

    def to_record(self) -> dict:
        return {
            "dropProbability": self.drop_probability,
            "redeliveryInterval": self.redelivery_interval,
            "dedupWindow": self.dedup_window,
            "queues": {
                str(index): [d.to_record() for d in queue]
                for index, queue in sorted(self.queues.items())
                if queue
            },
            "subscriptions": {
                topic: sorted(members)
                for topic, members in sorted(self.subscriptions.items())
                if members
            },
        }

    @classmethod
    def from_record(cls, record: dict) -> "InMemoryBroker":
        broker = cls(
            drop_probability=record["dropProbability"],
            redelivery_interval=record["redeliveryInterval"],
            dedup_window=record["dedupWindow"],
        )
        for index, queue in record["queues"].items():
            broker.queues[int(index)] = [PendingDelivery.from_record(d) for d in queue]
        for topic, members in record["subscriptions"].items():
            broker.subscriptions[topic] = set(members)
        return broker


def _ensure_inbox(world: World, index: int) -> dict:
    store = world.store(cmp.MESSAGE)
    record = store.get(index)
    if record is None:
        record = {"inbox": [], "seen": []}
        store.set(index, record)
    return record


def resolve_recipients(world: World, envelope: MessageEnvelope) -> list[int]:
    """Recipient entity indexes, snapshotted at send time."""
    target = envelope.target
    kind = target.get("kind")
    if kind == "agent":
        eid = EntityId.from_pair(target["id"])
        if not world.is_live(eid):
            raise UnknownTarget(f"agent target ({eid.index}, {eid.generation}) is not live")
        return [eid.index]
    if kind == "group":
        eid = EntityId.from_pair(target["id"])
        if not world.is_live(eid):
            raise UnknownTarget(f"group target ({eid.index}, {eid.generation}) is not live")
        group = world.get_component(eid, cmp.GROUP)
        if group is None:
            raise UnknownTarget(f"entity {eid.index} is not a group")
        return sorted(EntityId.from_pair(m).index for m in group["members"])
    if kind == "topic":
        broker = world.resources.get(BROKER)
        if broker is None:
            return []
        return broker.subscribers(target["name"])
    raise UnknownTarget(f"unknown target kind {kind!r}")


def send(world: World, envelope: MessageEnvelope) -> int:
    """Queue one pending delivery per resolved recipient; returns the count."""
    world.entities.check_live(envelope.sender)
    broker = world.resources.get(BROKER)
    if broker is None:
        return 0
    recipients = resolve_recipients(world, envelope)
    for index in recipients:
        broker.publish(PendingDelivery(
            envelope=replace(envelope, payload=dict(envelope.payload or {})),
            recipient=index,
            next_attempt=0,
        ))
    world.log.debug("message-sent", id=envelope.message_id, recipients=len(recipients))
    return len(recipients)


def subscribe_topic(world: World, eid: EntityId, topic: str) -> None:
    world.entities.check_live(eid)
    broker = world.resources.get(BROKER)
    if broker is not None:
        broker.subscribe(topic, eid.index)


def ack(world: World, eid: EntityId, message_id: str) -> None:
    """Explicit acknowledgment; repeated acks leave the broker unchanged."""
    world.entities.check_live(eid)
    broker = world.resources.get(BROKER)
    if broker is None:
        return
    broker.ack(message_id, eid.index)
    record = _ensure_inbox(world, eid.index)
    if message_id not in record["seen"]:
        record["seen"].append(message_id)
        _trim_seen(record, broker.dedup_window)


def _trim_seen(record: dict, window: int) -> None:
    overflow = len(record["seen"]) - window
    if overflow > 0:
        del record["seen"][:overflow]


def deliver_pending(world: World) -> dict:
    """One delivery round: attempt everything whose time has come.

    Returns a report: per-recipient deliveries that landed this tick plus
    drop/duplicate counts.
    """
    broker = world.resources.get(BROKER)
    report = {"deliveries": {}, "dropped": 0, "duplicates": 0, "redeliveries": 0}
    if broker is None:
        return report
    now = world.tick_count
    rng = world.rng
    for index in sorted(broker.queues):
        queue = broker.queues[index]
        if not queue:
            continue
        keep: list[PendingDelivery] = []
        for delivery in queue:
            if delivery.next_attempt > now:
                keep.append(delivery)
                continue
            if delivery.attempt > 1:
                report["redeliveries"] += 1
            if broker.drop_probability > 0.0 and rng.random() < broker.drop_probability:
                if delivery.envelope.semantics == AT_LEAST_ONCE:
                    delivery.attempt += 1
                    delivery.next_attempt = now + broker.redelivery_interval
                    keep.append(delivery)
                else:
                    broker.dropped_count += 1
                continue
            if not world.entities.index_is_live(delivery.recipient):
                continue  # recipient gone; nothing to deliver to
            record = _ensure_inbox(world, delivery.recipient)
            message_id = delivery.envelope.message_id
            if message_id in record["seen"]:
                report["duplicates"] += 1
                continue
            wire = delivery.envelope.to_wire()
            wire["attempt"] = delivery.attempt
            record["inbox"].append(wire)
            record["seen"].append(message_id)
            _trim_seen(record, broker.dedup_window)
            report["deliveries"].setdefault(delivery.recipient, []).append(wire)
            broker.delivered_count += 1
        broker.queues[index] = keep
    report["dropped"] = broker.dropped_count
    return report


def messaging_system(world: World) -> None:
    world.resources[DELIVERIES] = deliver_pending(world)
