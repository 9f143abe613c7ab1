"""Well-known world resource keys.

Resources are facilities attached to a World beyond its component stores:
environment models, the broker, the behavior library, and the per-tick
scratch buffers. Keys live here so modules can reference each other's
resources without import cycles.
"""

GRID = "grid"
FACTS = "facts"
BROKER = "broker"
BEHAVIORS = "behaviors"
AGENT_NAMES = "agent_names"

# per-tick scratch (never serialized)
PERCEPTS = "percepts"
ACTION_INBOX = "action_inbox"
STAGED_ACTIONS = "staged_actions"
OUTCOMES = "outcomes"
DELIVERIES = "deliveries"
