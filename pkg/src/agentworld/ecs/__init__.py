from agentworld.ecs.entity import EntityId, EntityRegistry
from agentworld.ecs.events import MAX_IMMEDIATE_DEPTH, EventDispatcher, EventRecord
from agentworld.ecs.log import RunLog
from agentworld.ecs.store import DEFAULT_CAPACITY_HINT, ComponentStore
from agentworld.ecs.systems import SystemDescriptor, SystemTable, topological_schedule
from agentworld.ecs.world import TickReport, World

__all__ = [
    "EntityId",
    "EntityRegistry",
    "EventDispatcher",
    "EventRecord",
    "MAX_IMMEDIATE_DEPTH",
    "RunLog",
    "ComponentStore",
    "DEFAULT_CAPACITY_HINT",
    "SystemDescriptor",
    "SystemTable",
    "topological_schedule",
    "TickReport",
    "World",
]
