"""JSON schema documents published under /schema.

These describe the wire surface: agent specs, scenario configs, message
envelopes, command envelopes, error bodies, run metrics, and every frame
kind the event channel pushes. Served as data so clients can validate
without importing the runtime.
"""

from __future__ import annotations

SCHEMA_VERSION = 1

_predicate = {
    "type": "array",
    "items": {
        "type": "array",
        "prefixItems": [
            {"type": "string"},
            {"enum": ["=", "!=", "<", "<=", ">", ">="]},
            {},
        ],
        "minItems": 3,
        "maxItems": 3,
    },
}

_action = {
    "type": "object",
    "required": ["kind"],
    "properties": {
        "kind": {"enum": ["move", "move-toward", "interact", "say", "noop"]},
        "dx": {"type": "integer"},
        "dy": {"type": "integer"},
        "x": {"type": "integer"},
        "y": {"type": "integer"},
        "target": {},
        "performative": {"type": "string"},
        "payload": {"type": "object"},
        "issuer": {"$ref": "#/$defs/entityRef"},
    },
}

_entity_ref = {
    "type": "array",
    "prefixItems": [{"type": "integer", "minimum": 0},
                    {"type": "integer", "minimum": 0}],
    "minItems": 2,
    "maxItems": 2,
}

AGENT_SPEC = {
    "$id": "/schema/agent-spec",
    "version": SCHEMA_VERSION,
    "type": "object",
    "required": ["name", "architecture"],
    "properties": {
        "name": {"type": "string", "minLength": 1},
        "architecture": {"enum": ["reactive", "cognitive", "bdi"]},
        "autonomyLevel": {"type": "number", "minimum": 0, "maximum": 1},
        "objectType": {"type": "string"},
        "properties": {"type": "object"},
        "beliefs": {"type": "object"},
        "revisionStrategy": {"enum": ["overwrite", "max-confidence"]},
        "perceptionRadius": {"type": "integer", "minimum": 0},
        "position": {
            "type": "object",
            "required": ["x", "y"],
            "properties": {"x": {"type": "integer"}, "y": {"type": "integer"}},
        },
        "goals": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["id"],
                "properties": {
                    "id": {"type": "string"},
                    "condition": _predicate,
                    "priority": {"type": "integer"},
                    "constraints": {"type": "array", "items": _predicate},
                    "plan": {"type": "string"},
                },
            },
        },
        "plans": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["id", "achievesGoal", "steps"],
                "properties": {
                    "id": {"type": "string"},
                    "achievesGoal": {"type": "string"},
                    "context": _predicate,
                    "steps": {"type": "array", "items": _action, "minItems": 1},
                },
            },
        },
        "rules": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["action"],
                "properties": {
                    "trigger": _predicate,
                    "action": _action,
                    "salience": {"type": "integer"},
                },
            },
        },
        "contingencies": {
            "type": "object",
            "additionalProperties": {"enum": ["retry", "drop-goal", "replan"]},
        },
        "groups": {"type": "array", "items": {"type": "string"}},
        "roles": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["role", "group"],
                "properties": {
                    "role": {"type": "string"},
                    "group": {"type": "string"},
                    "capabilities": {"type": "array", "items": {"type": "string"}},
                },
            },
        },
        "subscriptions": {"type": "array", "items": {"type": "string"}},
    },
    "$defs": {"entityRef": _entity_ref},
}

SCENARIO_CONFIG = {
    "$id": "/schema/scenario-config",
    "version": SCHEMA_VERSION,
    "type": "object",
    "properties": {
        "seed": {"type": "integer"},
        "tickMode": {
            "oneOf": [
                {"const": "manual"},
                {
                    "type": "object",
                    "required": ["auto"],
                    "properties": {
                        "auto": {
                            "type": "object",
                            "required": ["rate"],
                            "properties": {"rate": {"type": "number", "exclusiveMinimum": 0}},
                        },
                    },
                },
            ],
        },
        "environment": {
            "type": "object",
            "properties": {
                "grid": {
                    "type": "object",
                    "required": ["width", "height"],
                    "properties": {
                        "width": {"type": "integer", "minimum": 1},
                        "height": {"type": "integer", "minimum": 1},
                        "obstacles": {"type": "array", "items": _entity_ref},
                    },
                },
                "facts": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "required": ["key"],
                        "properties": {
                            "key": {"type": "string"},
                            "value": {},
                            "visibility": {},
                        },
                    },
                },
            },
        },
        "broker": {
            "type": "object",
            "properties": {
                "dropProbability": {"type": "number", "minimum": 0, "maximum": 1},
                "redeliveryInterval": {"type": "integer", "minimum": 1},
                "dedupWindow": {"type": "integer", "minimum": 1},
            },
        },
        "agents": {"type": "array", "items": {"$ref": "/schema/agent-spec"}},
        "groups": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["name"],
                "properties": {
                    "name": {"type": "string"},
                    "structure": {},
                    "policies": {"type": "object"},
                },
            },
        },
    },
    "$defs": {"entityRef": _entity_ref},
}

MESSAGE_ENVELOPE = {
    "$id": "/schema/message-envelope",
    "version": SCHEMA_VERSION,
    "type": "object",
    "required": ["sender", "target"],
    "properties": {
        "messageId": {
            "type": "string",
            "pattern": "^[0-9a-f]{8}-[0-9a-f]{4}-[0-9a-f]{4}-[0-9a-f]{4}-[0-9a-f]{12}$",
        },
        "sender": _entity_ref,
        "target": {
            "oneOf": [
                {
                    "type": "object",
                    "required": ["kind", "id"],
                    "properties": {"kind": {"enum": ["agent", "group"]}, "id": _entity_ref},
                },
                {
                    "type": "object",
                    "required": ["kind", "name"],
                    "properties": {"kind": {"const": "topic"}, "name": {"type": "string"}},
                },
            ],
        },
        "performative": {"type": "string"},
        "payload": {"type": "object"},
        "semantics": {"enum": ["at-most-once", "at-least-once"]},
        "attempt": {"type": "integer", "minimum": 1},
    },
}

COMMAND_ENVELOPE = {
    "$id": "/schema/command-envelope",
    "version": SCHEMA_VERSION,
    "description": "Commands carry an optional X-Command-Id header; a replayed "
                   "id is acknowledged with the original response, not re-executed.",
    "type": "object",
    "required": ["kind", "body"],
    "properties": {
        "commandId": {"type": "string"},
        "kind": {"enum": ["spawn", "set-state", "join-group", "assign-role",
                          "send-message", "env-action", "snapshot", "tick-control"]},
        "body": {"type": "object"},
        "receivedAt": {"type": "string"},
    },
}

ERROR_BODY = {
    "$id": "/schema/error",
    "version": SCHEMA_VERSION,
    "type": "object",
    "required": ["code", "message"],
    "properties": {
        "code": {"type": "string"},
        "message": {"type": "string"},
        "detail": {},
    },
}

RUN_METRICS = {
    "$id": "/schema/run-metrics",
    "version": SCHEMA_VERSION,
    "type": "object",
    "required": ["schemaVersion", "ticksExecuted", "seed"],
    "properties": {
        "schemaVersion": {"type": "integer"},
        "ticksExecuted": {"type": "integer"},
        "tick": {"type": "integer"},
        "seed": {"type": "integer"},
        "messagesSent": {"type": "integer"},
        "messagesDelivered": {"type": "integer"},
        "messagesDropped": {"type": "integer"},
        "goalsAchieved": {"type": "object",
                          "additionalProperties": {"type": "array", "items": {"type": "string"}}},
        "goalsAchievedTotal": {"type": "integer"},
        "systems": {"type": "object"},
    },
}

_frame_base = {
    "type": "object",
    "required": ["type", "tick"],
    "properties": {"type": {"type": "string"}, "tick": {"type": "integer"}},
}

FRAMES = {
    "$id": "/schema/frames",
    "version": SCHEMA_VERSION,
    "description": "Every frame kind the event channel can push or accept.",
    "outbound": {
        "subscribed": {"type": "object", "required": ["type", "scope"]},
        "tick": _frame_base,
        "percept": {
            **_frame_base,
            "required": ["type", "tick", "agentId", "percepts"],
        },
        "message": {
            **_frame_base,
            "required": ["type", "tick", "agentId", "envelope"],
        },
        "event": {
            **_frame_base,
            "required": ["type", "tick", "event"],
        },
        "action-outcome": {
            **_frame_base,
            "required": ["type", "tick", "issuer", "status"],
        },
        "error": {"type": "object", "required": ["type", "code", "message"]},
    },
    "inbound": {
        "subscribe": {
            "type": "object",
            "required": ["type", "scope"],
            "properties": {
                "type": {"const": "subscribe"},
                "scope": {"enum": ["world", "agent"]},
                "agent": {"type": "string"},
            },
        },
        "send-message": {
            "type": "object",
            "required": ["type", "envelope"],
            "properties": {"type": {"const": "send-message"},
                           "envelope": {"$ref": "/schema/message-envelope"},
                           "commandId": {"type": "string"}},
        },
        "env-action": {
            "type": "object",
            "required": ["type", "action"],
            "properties": {"type": {"const": "env-action"},
                           "action": {"$ref": "#/definitions/action"},
                           "commandId": {"type": "string"}},
        },
    },
}

SCHEMAS = {
    "agent-spec": AGENT_SPEC,
    "scenario-config": SCENARIO_CONFIG,
    "message-envelope": MESSAGE_ENVELOPE,
    "command-envelope": COMMAND_ENVELOPE,
    "error": ERROR_BODY,
    "run-metrics": RUN_METRICS,
    "frames": FRAMES,
}
