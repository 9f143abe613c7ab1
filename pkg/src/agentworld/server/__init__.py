from agentworld.server.app import ServerState, build_app
from agentworld.server.schemas import SCHEMAS

__all__ = ["ServerState", "build_app", "SCHEMAS"]
