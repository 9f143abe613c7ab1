"""Client SDK for the agentworld server.

Define agents declaratively with the builder, manage them over REST, and
receive real-time percepts, messages, and events through callbacks:

    from agentworld_client import Session, agent, move_toward

    with Session("http://127.0.0.1:8010") as session:
        runner = session.spawn(
            agent("runner").deliberative().at(0, 0)
            .goal("arrive", when=[("self/x", "=", 4), ("self/y", "=", 4)], priority=5)
            .plan("walk", achieves="arrive", steps=[move_toward(4, 4)])
        )
        runner.on_percept(lambda tick, percepts: print(tick, percepts)).subscribe()
        session.step(10)
"""

from agentworld_client.builder import (
    AgentBuilder,
    agent,
    interact,
    move,
    move_toward,
    noop,
    say,
)
from agentworld_client.errors import (
    ApiError,
    ClientError,
    Conflict,
    ConnectionFailed,
    NotFound,
    Rejected,
    ValidationError,
)
from agentworld_client.session import AgentHandle, Session

__version__ = "0.1.0"

__all__ = [
    "AgentBuilder",
    "agent",
    "interact",
    "move",
    "move_toward",
    "noop",
    "say",
    "ApiError",
    "ClientError",
    "Conflict",
    "ConnectionFailed",
    "NotFound",
    "Rejected",
    "ValidationError",
    "AgentHandle",
    "Session",
    "__version__",
]
