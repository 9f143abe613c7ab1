"""HTTP + WebSocket server owning one world.

Management runs over REST under /v1; real-time traffic (percepts, inbox
deliveries, events, action outcomes) runs over the /v1/events socket.
Every mutation is a command: executed under the world lock so it lands at
a tick boundary, deduplicated by the client-supplied X-Command-Id header,
and answered from the ledger on replay without re-execution.
"""

from __future__ import annotations

import asyncio
import json
import time
from typing import Any, Optional

from aiohttp import WSMsgType, web

from agentworld import env, messaging, org, persistence
from agentworld.agents import components as cmp
from agentworld.agents.spec import set_agent_state, spawn_agent
from agentworld.ecs.entity import EntityId
from agentworld.errors import EngineError, InvalidAgentSpec
from agentworld.runtime import Runtime, TickResult
from agentworld.server.schemas import SCHEMAS

MAX_TICK_STEPS = 100_000

_STATUS_FOR_CODE = {
    "invalid-spec": 422,
    "stale-entity": 404,
    "unknown-target": 404,
    "unknown-component-kind": 400,
    "illegal-transition": 409,
    "policy-violation": 409,
    "role-conflict": 409,
    "not-a-member": 409,
    "cycle-detected": 409,
    "duplicate-name": 409,
    "capacity-exhausted": 409,
    "checksum-mismatch": 400,
    "unsupported-version": 400,
    "scenario-error": 400,
}


def error_body(exc: EngineError) -> dict:
    return {"code": exc.code, "message": str(exc), "detail": exc.detail}


def entity_id_str(eid: EntityId) -> str:
    return f"{eid.index}-{eid.generation}"


class ServerState:
    def __init__(self, runtime: Runtime, backend: Optional[persistence.FileBackend] = None):
        self.runtime = runtime
        self.backend = backend or persistence.MemoryBackend()
        self.lock = asyncio.Lock()
        # commandId -> {status, payload, receivedAt}; replays answer from here
        self.ledger: dict[str, dict] = {}
        self.subscriptions: list[dict] = []  # {"ws", "scope", "index"}
        self.auto_task: Optional[asyncio.Task] = None


STATE_KEY = web.AppKey("state", ServerState)


def _resolve_agent(state: ServerState, raw: str) -> EntityId:
    """Accepts 'index-generation' or a bare index (current generation)."""
    from agentworld.errors import StaleEntityError

    world = state.runtime.world
    try:
        if "-" in raw:
            index, generation = (int(part) for part in raw.split("-", 1))
        else:
            index, generation = int(raw), None
    except ValueError:
        raise StaleEntityError(f"malformed entity id {raw!r}")
    if generation is None:
        return world.handle(index)
    eid = EntityId(index, generation)
    world.entities.check_live(eid)
    return eid


async def _read_json(request: web.Request) -> dict:
    if request.body_exists:
        try:
            body = await request.json()
        except json.JSONDecodeError:
            raise web.HTTPBadRequest(
                text=json.dumps({"code": "bad-request", "message": "body must be JSON",
                                 "detail": None}),
                content_type="application/json",
            )
        if not isinstance(body, dict):
            raise web.HTTPBadRequest(
                text=json.dumps({"code": "bad-request", "message": "body must be an object",
                                 "detail": None}),
                content_type="application/json",
            )
        return body
    return {}


async def run_command(state: ServerState, request: web.Request, fn, success_status=200):
    """Execute a mutating command at a tick boundary, with idempotent replay."""
    command_id = request.headers.get("X-Command-Id")
    if command_id and command_id in state.ledger:
        entry = state.ledger[command_id]
        return web.json_response(entry["payload"], status=entry["status"])
    received_at = time.time()
    async with state.lock:
        try:
            payload = fn()
            status = success_status
        except EngineError as exc:
            payload = error_body(exc)
            status = _STATUS_FOR_CODE.get(exc.code, 400)
        if command_id:
            state.ledger[command_id] = {
                "status": status, "payload": payload, "receivedAt": received_at,
            }
    return web.json_response(payload, status=status)


# -- frame fan-out -------------------------------------------------------------


def _frames_for_tick(result: TickResult) -> list[tuple[tuple, dict]]:
    """(sort key, frame) pairs for one executed tick."""
    tick = result.report.tick
    frames: list[tuple[tuple, dict]] = []
    for event in result.report.events:
        index = event.source_entity.index if event.source_entity else \
            event.payload.get("index", -1)
        frames.append(((
            "event", index if isinstance(index, int) else -1),
            {"type": "event", "tick": tick, "event": event.to_record()},
        ))
    for index, wires in sorted(result.deliveries.items()):
        for wire in wires:
            frames.append((
                ("message", index),
                {"type": "message", "tick": tick, "agentIndex": index, "envelope": wire},
            ))
    for index, percepts in sorted(result.percepts.items()):
        frames.append((
            ("percept", index),
            {"type": "percept", "tick": tick, "agentIndex": index,
             "percepts": [list(p) for p in percepts]},
        ))
    for outcome in result.outcomes:
        issuer = outcome["action"].get("issuer", [-1, 0])[0]
        action = {key: value for key, value in outcome["action"].items()
                  if key not in ("intention",)}
        frames.append((
            ("action-outcome", issuer),
            {"type": "action-outcome", "tick": tick, "issuer": issuer,
             "status": outcome["status"], "detail": outcome["detail"],
             "action": action},
        ))
    frames.sort(key=lambda pair: pair[0])
    return frames


def _frame_matches(subscription: dict, sort_key: tuple, frame: dict) -> bool:
    if subscription["scope"] == "world":
        return True
    index = subscription["index"]
    kind = frame["type"]
    if kind in ("percept", "message"):
        return frame["agentIndex"] == index
    if kind == "action-outcome":
        return frame["issuer"] == index
    if kind == "event":
        source = frame["event"].get("sourceEntity")
        if source is not None and source[0] == index:
            return True
        return frame["event"].get("payload", {}).get("index") == index
    return False


async def _push_tick_frames(state: ServerState, results: list[TickResult]) -> None:
    if not state.subscriptions:
        return
    dead = []
    for result in results:
        frames = _frames_for_tick(result)
        for subscription in state.subscriptions:
            ws = subscription["ws"]
            if ws.closed:
                dead.append(subscription)
                continue
            try:
                for sort_key, frame in frames:
                    if _frame_matches(subscription, sort_key, frame):
                        await ws.send_json(frame)
            except ConnectionResetError:
                dead.append(subscription)
    for subscription in dead:
        if subscription in state.subscriptions:
            state.subscriptions.remove(subscription)


async def _tick_locked(state: ServerState, steps: int) -> int:
    async with state.lock:
        results = state.runtime.tick(steps)
        await _push_tick_frames(state, results)
        return state.runtime.world.tick_count


# -- REST handlers ------------------------------------------------------------------


async def post_agents(request: web.Request) -> web.StreamResponse:
    state: ServerState = request.app[STATE_KEY]
    spec = await _read_json(request)

    def do_spawn():
        runtime = state.runtime
        world = runtime.world
        eid = spawn_agent(world, spec)
        try:
            group_names = {
                record["name"]: world.handle(index)
                for index, record in world.store(cmp.GROUP).sorted_pairs()
            }
            for name in spec.get("groups", []):
                if name not in group_names:
                    raise InvalidAgentSpec([f"groups: group {name!r} does not exist"])
                org.join_group(world, eid, group_names[name])
            for role_cfg in spec.get("roles", []):
                if role_cfg.get("group") not in group_names:
                    raise InvalidAgentSpec(
                        [f"roles: group {role_cfg.get('group')!r} does not exist"])
                org.assign_role(world, eid, role_cfg["role"],
                                group_names[role_cfg["group"]],
                                role_cfg.get("capabilities", ()))
            for topic in spec.get("subscriptions", []):
                messaging.subscribe_topic(world, eid, topic)
        except EngineError:
            world.destroy_entity(eid)  # spawn is atomic
            raise
        return {"id": entity_id_str(eid), "name": spec.get("name")}

    return await run_command(state, request, do_spawn, success_status=201)


async def get_agents(request: web.Request) -> web.StreamResponse:
    state: ServerState = request.app[STATE_KEY]
    runtime = state.runtime
    world = runtime.world
    views = []
    for index, _ in world.store(cmp.AGENT).sorted_pairs():
        eid = world.handle(index)
        view = runtime.agent_view(eid)
        view["id"] = entity_id_str(eid)
        views.append(view)
    return web.json_response({"agents": views})


async def get_agent(request: web.Request) -> web.StreamResponse:
    state: ServerState = request.app[STATE_KEY]
    try:
        eid = _resolve_agent(state, request.match_info["id"])
        view = state.runtime.agent_view(eid)
    except EngineError as exc:
        return web.json_response(error_body(exc), status=_STATUS_FOR_CODE.get(exc.code, 400))
    view["id"] = entity_id_str(eid)
    return web.json_response(view)


async def post_agent_state(request: web.Request) -> web.StreamResponse:
    state: ServerState = request.app[STATE_KEY]
    body = await _read_json(request)

    def do_transition():
        eid = _resolve_agent(state, request.match_info["id"])
        set_agent_state(state.runtime.world, eid, body.get("target"))
        view = state.runtime.agent_view(eid)
        view["id"] = entity_id_str(eid)
        return view

    return await run_command(state, request, do_transition)


async def delete_agent(request: web.Request) -> web.StreamResponse:
    state: ServerState = request.app[STATE_KEY]

    def do_terminate():
        eid = _resolve_agent(state, request.match_info["id"])
        agent = state.runtime.world.get_component(eid, cmp.AGENT)
        if agent is not None and agent["state"] != "terminated":
            set_agent_state(state.runtime.world, eid, "terminated")
        return {"id": entity_id_str(eid), "state": "terminated"}

    return await run_command(state, request, do_terminate)


async def post_groups(request: web.Request) -> web.StreamResponse:
    state: ServerState = request.app[STATE_KEY]
    body = await _read_json(request)

    def do_create():
        structure = body.get("structure", "flat")
        gid = org.create_group(state.runtime.world, body.get("name", "group"),
                               structure, body.get("policies", {}))
        return {"id": entity_id_str(gid), "name": body.get("name", "group")}

    return await run_command(state, request, do_create, success_status=201)


async def post_group_members(request: web.Request) -> web.StreamResponse:
    state: ServerState = request.app[STATE_KEY]
    body = await _read_json(request)

    def do_join():
        gid = _resolve_agent(state, request.match_info["id"])
        eid = _resolve_agent(state, str(body.get("agent")))
        org.join_group(state.runtime.world, eid, gid)
        return {"group": entity_id_str(gid), "agent": entity_id_str(eid)}

    return await run_command(state, request, do_join)


async def post_agent_roles(request: web.Request) -> web.StreamResponse:
    state: ServerState = request.app[STATE_KEY]
    body = await _read_json(request)

    def do_assign():
        eid = _resolve_agent(state, request.match_info["id"])
        gid = _resolve_agent(state, str(body.get("group")))
        org.assign_role(state.runtime.world, eid, body.get("role"),
                        gid, body.get("capabilities", ()))
        return {"agent": entity_id_str(eid), "role": body.get("role")}

    return await run_command(state, request, do_assign)


async def post_environment_actions(request: web.Request) -> web.StreamResponse:
    state: ServerState = request.app[STATE_KEY]
    body = await _read_json(request)

    def do_stage():
        action = dict(body)
        if "issuer" in action and isinstance(action["issuer"], str):
            action["issuer"] = _resolve_agent(state, action["issuer"]).as_pair()
        env.submit_action(state.runtime.world, action)
        return {"staged": True}

    return await run_command(state, request, do_stage, success_status=202)


async def post_messages(request: web.Request) -> web.StreamResponse:
    state: ServerState = request.app[STATE_KEY]
    body = await _read_json(request)

    def do_send():
        envelope = messaging.envelope_from_wire(state.runtime.world, body)
        count = messaging.send(state.runtime.world, envelope)
        return {"messageId": envelope.message_id, "recipients": count}

    return await run_command(state, request, do_send, success_status=202)


async def post_world_tick(request: web.Request) -> web.StreamResponse:
    state: ServerState = request.app[STATE_KEY]
    body = await _read_json(request)
    steps = body.get("steps", 1)
    if not isinstance(steps, int) or not 0 <= steps <= MAX_TICK_STEPS:
        return web.json_response(
            {"code": "bad-request",
             "message": f"steps must be an integer in [0, {MAX_TICK_STEPS}]",
             "detail": None},
            status=400,
        )
    tick = await _tick_locked(state, steps)
    return web.json_response({"tick": tick})


async def post_world_run(request: web.Request) -> web.StreamResponse:
    state: ServerState = request.app[STATE_KEY]
    body = await _read_json(request)
    rate = body.get("rate", 10)
    if not isinstance(rate, (int, float)) or rate <= 0 or rate > 1000:
        return web.json_response(
            {"code": "bad-request", "message": "rate must be in (0, 1000]",
             "detail": None},
            status=400,
        )
    if state.auto_task is not None and not state.auto_task.done():
        state.auto_task.cancel()

    async def auto_tick():
        period = 1.0 / rate
        while True:
            await asyncio.sleep(period)
            await _tick_locked(state, 1)

    state.auto_task = asyncio.get_running_loop().create_task(auto_tick())
    return web.json_response({"running": True, "rate": rate})


async def post_world_pause(request: web.Request) -> web.StreamResponse:
    state: ServerState = request.app[STATE_KEY]
    if state.auto_task is not None:
        state.auto_task.cancel()
        state.auto_task = None
    return web.json_response({"running": False})


async def post_world_snapshot(request: web.Request) -> web.StreamResponse:
    state: ServerState = request.app[STATE_KEY]

    async def do_snapshot():
        async with state.lock:
            snap = state.runtime.snapshot()
            locator = state.backend.save(snap)
        return {"locator": locator, "tick": snap.tick, "checksum": snap.checksum}

    command_id = request.headers.get("X-Command-Id")
    if command_id and command_id in state.ledger:
        entry = state.ledger[command_id]
        return web.json_response(entry["payload"], status=entry["status"])
    received_at = time.time()
    payload = await do_snapshot()
    if command_id:
        state.ledger[command_id] = {
            "status": 200, "payload": payload, "receivedAt": received_at,
        }
    return web.json_response(payload)


async def post_world_restore(request: web.Request) -> web.StreamResponse:
    state: ServerState = request.app[STATE_KEY]
    body = await _read_json(request)
    locator = body.get("locator", "latest")
    async with state.lock:
        try:
            if locator == "latest":
                locators = state.backend.list()
                if not locators:
                    raise persistence.ChecksumMismatch("no snapshots available")
                locator = locators[-1]
            snap = state.backend.load(locator)
            state.runtime = Runtime.from_snapshot(snap.raw, log=state.runtime.world.log)
        except EngineError as exc:
            return web.json_response(error_body(exc),
                                     status=_STATUS_FOR_CODE.get(exc.code, 400))
    return web.json_response({"locator": locator, "tick": state.runtime.world.tick_count})


async def get_world(request: web.Request) -> web.StreamResponse:
    state: ServerState = request.app[STATE_KEY]
    view = state.runtime.world_view()
    for group in view["groups"]:
        group["id"] = f"{group['id'][0]}-{group['id'][1]}"
    return web.json_response(view)


async def get_schema_index(request: web.Request) -> web.StreamResponse:
    return web.json_response({"schemas": sorted(SCHEMAS), "version": 1})


async def get_schema(request: web.Request) -> web.StreamResponse:
    name = request.match_info["name"].removesuffix(".json")
    if name not in SCHEMAS:
        return web.json_response(
            {"code": "not-found", "message": f"no schema named {name!r}", "detail": None},
            status=404,
        )
    return web.json_response(SCHEMAS[name])


# -- event channel ---------------------------------------------------------------------


async def websocket_events(request: web.Request) -> web.WebSocketResponse:
    state: ServerState = request.app[STATE_KEY]
    ws = web.WebSocketResponse(heartbeat=30)
    await ws.prepare(request)
    subscription: Optional[dict] = None

    async for message in ws:
        if message.type != WSMsgType.TEXT:
            break
        try:
            frame = json.loads(message.data)
        except json.JSONDecodeError:
            await ws.send_json({"type": "error", "code": "bad-frame",
                                "message": "frames must be JSON objects"})
            continue
        kind = frame.get("type")

        if kind == "subscribe":
            scope = frame.get("scope")
            if scope == "world":
                subscription = {"ws": ws, "scope": "world", "index": None}
                state.subscriptions.append(subscription)
                await ws.send_json({"type": "subscribed", "scope": "world"})
            elif scope == "agent":
                try:
                    eid = _resolve_agent(state, str(frame.get("agent")))
                except EngineError as exc:
                    await ws.send_json({"type": "error", "code": exc.code,
                                        "message": str(exc)})
                    await ws.close()
                    break
                subscription = {"ws": ws, "scope": "agent", "index": eid.index}
                state.subscriptions.append(subscription)
                await ws.send_json({"type": "subscribed", "scope": "agent",
                                    "agent": entity_id_str(eid)})
            else:
                await ws.send_json({"type": "error", "code": "bad-frame",
                                    "message": "scope must be 'world' or 'agent'"})
                await ws.close()
                break

        elif kind == "send-message":
            async with state.lock:
                try:
                    envelope = messaging.envelope_from_wire(
                        state.runtime.world, frame.get("envelope", {}))
                    messaging.send(state.runtime.world, envelope)
                except (EngineError, KeyError, TypeError) as exc:
                    await ws.send_json({"type": "error", "code": "send-failed",
                                        "message": str(exc)})

        elif kind == "env-action":
            async with state.lock:
                try:
                    action = dict(frame.get("action", {}))
                    if isinstance(action.get("issuer"), str):
                        action["issuer"] = _resolve_agent(state, action["issuer"]).as_pair()
                    env.submit_action(state.runtime.world, action)
                except (EngineError, KeyError, TypeError) as exc:
                    await ws.send_json({"type": "error", "code": "action-failed",
                                        "message": str(exc)})

        else:
            await ws.send_json({"type": "error", "code": "bad-frame",
                                "message": f"unknown frame type {kind!r}"})

    if subscription in state.subscriptions:
        state.subscriptions.remove(subscription)
    return ws


# -- app assembly ---------------------------------------------------------------------


def build_app(runtime: Runtime, *, backend=None) -> web.Application:
    state = ServerState(runtime, backend=backend)
    app = web.Application()
    app[STATE_KEY] = state
    app.router.add_post("/v1/agents", post_agents)
    app.router.add_get("/v1/agents", get_agents)
    app.router.add_get("/v1/agents/{id}", get_agent)
    app.router.add_post("/v1/agents/{id}/state", post_agent_state)
    app.router.add_delete("/v1/agents/{id}", delete_agent)
    app.router.add_post("/v1/agents/{id}/roles", post_agent_roles)
    app.router.add_post("/v1/groups", post_groups)
    app.router.add_post("/v1/groups/{id}/members", post_group_members)
    app.router.add_post("/v1/environment/actions", post_environment_actions)
    app.router.add_post("/v1/messages", post_messages)
    app.router.add_post("/v1/world/tick", post_world_tick)
    app.router.add_post("/v1/world/run", post_world_run)
    app.router.add_post("/v1/world/pause", post_world_pause)
    app.router.add_post("/v1/world/snapshot", post_world_snapshot)
    app.router.add_post("/v1/world/restore", post_world_restore)
    app.router.add_get("/v1/world", get_world)
    app.router.add_get("/v1/events", websocket_events)
    app.router.add_get("/schema", get_schema_index)
    app.router.add_get("/schema/{name}", get_schema)

    async def on_shutdown(app: web.Application) -> None:
        if state.auto_task is not None:
            state.auto_task.cancel()
        for subscription in list(state.subscriptions):
            await subscription["ws"].close()

    app.on_shutdown.append(on_shutdown)
    return app
