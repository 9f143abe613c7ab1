from agentworld.agents import components
from agentworld.agents.predicates import eval_predicate, validate_predicate
from agentworld.agents.reasoning import (
    agent_step,
    bdi_step,
    cognitive_step,
    reactive_step,
    revise_beliefs,
)
from agentworld.agents.spec import (
    set_agent_state,
    spawn_agent,
    validate_agent_spec,
)

__all__ = [
    "components",
    "eval_predicate",
    "validate_predicate",
    "agent_step",
    "bdi_step",
    "cognitive_step",
    "reactive_step",
    "revise_beliefs",
    "set_agent_state",
    "spawn_agent",
    "validate_agent_spec",
]
