"""Exception hierarchy shared across the runtime.

Every error carries a stable ``code`` string so the server layer can map
failures onto structured ``{code, message, detail}`` bodies without
inspecting types.
"""

from __future__ import annotations

from typing import Any


class EngineError(Exception):
    """Base class for all runtime errors."""

    code = "engine-error"

    def __init__(self, message: str, detail: Any = None):
        super().__init__(message)
        self.detail = detail


class CapacityExhausted(EngineError):
    code = "capacity-exhausted"


class StaleEntityError(EngineError):
    code = "stale-entity"


class UnknownComponentKind(EngineError):
    code = "unknown-component-kind"


class DuplicateSystemName(EngineError):
    code = "duplicate-name"


class UnknownDependency(EngineError):
    code = "unknown-dependency"


class CycleDetected(EngineError):
    code = "cycle-detected"


class DispatchDepthExceeded(EngineError):
    code = "dispatch-depth-exceeded"


class InvalidAgentSpec(EngineError):
    """Agent specification failed validation; ``detail`` lists per-field problems."""

    code = "invalid-spec"

    def __init__(self, problems: list[str]):
        super().__init__("invalid agent spec: " + "; ".join(problems), problems)
        self.problems = problems


class IllegalTransition(EngineError):
    code = "illegal-transition"


class PolicyViolation(EngineError):
    code = "policy-violation"

    def __init__(self, policy: str, message: str | None = None):
        super().__init__(message or f"group policy violated: {policy}", policy)
        self.policy = policy


class NotAMember(EngineError):
    code = "not-a-member"


class RoleConflict(EngineError):
    code = "role-conflict"

    def __init__(self, existing_role: str):
        super().__init__(f"conflicts with held role: {existing_role}", existing_role)
        self.existing_role = existing_role


class UnknownTarget(EngineError):
    code = "unknown-target"


class ChecksumMismatch(EngineError):
    code = "checksum-mismatch"


class UnsupportedVersion(EngineError):
    code = "unsupported-version"


class ScenarioError(EngineError):
    code = "scenario-error"
