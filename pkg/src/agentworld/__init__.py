"""agentworld: a deterministic ECS runtime for multi-agent simulations.

Layering, bottom up: the ECS core (entities, component stores, systems,
events, tick loop), the agent abstractions on top of it (beliefs, goals,
intentions, roles, groups), and the infrastructure around both (messaging
broker, snapshots, REST + WebSocket server, CLI).
"""

from agentworld.ecs import EntityId, EventRecord, RunLog, TickReport, World
from agentworld.runtime import Runtime, load_scenario

__version__ = "0.1.0"

__all__ = [
    "EntityId",
    "EventRecord",
    "RunLog",
    "TickReport",
    "World",
    "Runtime",
    "load_scenario",
    "__version__",
]
