"""REST + WebSocket surface, exercised over real sockets."""

import json
import uuid

import pytest
import requests
from websockets.sync.client import connect as ws_connect

from agentworld.persistence import FileBackend
from agentworld.runtime import Runtime

pytestmark = pytest.mark.filterwarnings("ignore::DeprecationWarning")


def minimal_spec(name="bot", **extra):
    spec = {"name": name, "architecture": "reactive"}
    spec.update(extra)
    return spec


def grid_scenario():
    return {
        "seed": 7,
        "environment": {"grid": {"width": 5, "height": 5, "obstacles": []}},
        "agents": [],
    }


@pytest.fixture
def server(live_server):
    return live_server(Runtime.from_scenario(grid_scenario()))


def spawn(server, spec, command_id=None):
    headers = {"X-Command-Id": command_id} if command_id else {}
    return requests.post(f"{server.base_url}/v1/agents", json=spec,
                         headers=headers, timeout=5)


def tick(server, steps=1):
    response = requests.post(f"{server.base_url}/v1/world/tick",
                             json={"steps": steps}, timeout=15)
    assert response.status_code == 200
    return response.json()


# -- agent lifecycle over REST -------------------------------------------------


def test_spawn_returns_201_and_becomes_active_after_one_tick(server):
    response = spawn(server, minimal_spec())
    assert response.status_code == 201
    agent_id = response.json()["id"]
    view = requests.get(f"{server.base_url}/v1/agents/{agent_id}", timeout=5).json()
    assert view["state"] == "initializing"
    tick(server)
    view = requests.get(f"{server.base_url}/v1/agents/{agent_id}", timeout=5).json()
    assert view["state"] == "active"


def test_invalid_spec_gets_422_with_diagnostics(server):
    response = spawn(server, {"architecture": "quantum"})
    assert response.status_code == 422
    body = response.json()
    assert body["code"] == "invalid-spec"
    assert any("name" in problem for problem in body["detail"])
    assert any("architecture" in problem for problem in body["detail"])


def test_unknown_agent_is_404(server):
    response = requests.get(f"{server.base_url}/v1/agents/99-0", timeout=5)
    assert response.status_code == 404
    assert response.json()["code"] == "stale-entity"


def test_duplicate_command_id_replays_without_respawning(server):
    command_id = str(uuid.uuid4())
    first = spawn(server, minimal_spec("solo"), command_id=command_id)
    assert first.status_code == 201
    again = spawn(server, minimal_spec("solo"), command_id=command_id)
    assert again.status_code == 201
    assert again.json() == first.json()
    world = requests.get(f"{server.base_url}/v1/world", timeout=5).json()
    assert world["agents"] == 1


def test_illegal_transition_is_409(server):
    agent_id = spawn(server, minimal_spec()).json()["id"]
    tick(server)
    response = requests.post(f"{server.base_url}/v1/agents/{agent_id}/state",
                             json={"target": "suspended"}, timeout=5)
    assert response.status_code == 200
    response = requests.delete(f"{server.base_url}/v1/agents/{agent_id}", timeout=5)
    assert response.status_code == 200
    response = requests.post(f"{server.base_url}/v1/agents/{agent_id}/state",
                             json={"target": "active"}, timeout=5)
    assert response.status_code == 409
    assert response.json()["code"] == "illegal-transition"


def test_delete_is_idempotent(server):
    agent_id = spawn(server, minimal_spec()).json()["id"]
    tick(server)
    first = requests.delete(f"{server.base_url}/v1/agents/{agent_id}", timeout=5)
    second = requests.delete(f"{server.base_url}/v1/agents/{agent_id}", timeout=5)
    assert first.status_code == second.status_code == 200


# -- groups and roles -----------------------------------------------------------


def test_group_membership_and_policy_violation(server):
    group_id = requests.post(f"{server.base_url}/v1/groups", json={
        "name": "duo", "policies": {"max-members": {"n": 1}},
    }, timeout=5).json()["id"]
    a = spawn(server, minimal_spec("a")).json()["id"]
    b = spawn(server, minimal_spec("b")).json()["id"]
    ok = requests.post(f"{server.base_url}/v1/groups/{group_id}/members",
                       json={"agent": a}, timeout=5)
    assert ok.status_code == 200
    full = requests.post(f"{server.base_url}/v1/groups/{group_id}/members",
                         json={"agent": b}, timeout=5)
    assert full.status_code == 409
    assert full.json()["code"] == "policy-violation"
    assert full.json()["detail"] == "max-members"


def test_role_assignment_flow(server):
    group_id = requests.post(f"{server.base_url}/v1/groups",
                             json={"name": "scouts"}, timeout=5).json()["id"]
    agent_id = spawn(server, minimal_spec("ranger")).json()["id"]
    requests.post(f"{server.base_url}/v1/groups/{group_id}/members",
                  json={"agent": agent_id}, timeout=5)
    response = requests.post(f"{server.base_url}/v1/agents/{agent_id}/roles", json={
        "role": "scout", "group": group_id, "capabilities": ["move-fast"],
    }, timeout=5)
    assert response.status_code == 200
    view = requests.get(f"{server.base_url}/v1/agents/{agent_id}", timeout=5).json()
    assert view["activeRole"][0] == "scout"
    assert view["groups"] == ["scouts"]


# -- world control ------------------------------------------------------------------


def test_eight_manual_ticks_surface_the_achievement(live_server):
    import importlib.resources

    config = json.loads(importlib.resources.files("agentworld").joinpath(
        "scenarios/grid_bdi.json").read_text())
    server = live_server(Runtime.from_scenario(config))
    agents = requests.get(f"{server.base_url}/v1/agents", timeout=5).json()["agents"]
    agent_id = agents[0]["id"]
    tick(server, 8)  # breadth-first shortest path (0,0)->(4,4) is 8 moves
    view = requests.get(f"{server.base_url}/v1/agents/{agent_id}", timeout=5).json()
    assert view["achievements"] == ["reach-corner"]
    assert view["position"] == {"x": 4, "y": 4}


def test_world_view_counts(server):
    spawn(server, minimal_spec("x"))
    world = requests.get(f"{server.base_url}/v1/world", timeout=5).json()
    assert world["tick"] == 0
    assert world["agents"] == 1
    tick(server, 3)
    world = requests.get(f"{server.base_url}/v1/world", timeout=5).json()
    assert world["tick"] == 3


def test_snapshot_restore_roundtrip_preserves_views(tmp_path, live_server):
    backend = FileBackend(str(tmp_path))
    server = live_server(Runtime.from_scenario(grid_scenario()), backend=backend)
    spawn(server, minimal_spec("keeper", position={"x": 1, "y": 1}))
    tick(server, 5)
    world_before = requests.get(f"{server.base_url}/v1/world", timeout=5).json()
    agents_before = requests.get(f"{server.base_url}/v1/agents", timeout=5).json()
    locator = requests.post(f"{server.base_url}/v1/world/snapshot", timeout=5).json()["locator"]

    spawn(server, minimal_spec("intruder"))
    tick(server, 2)

    response = requests.post(f"{server.base_url}/v1/world/restore",
                             json={"locator": locator}, timeout=5)
    assert response.status_code == 200
    assert requests.get(f"{server.base_url}/v1/world", timeout=5).json() == world_before
    assert requests.get(f"{server.base_url}/v1/agents", timeout=5).json() == agents_before


def test_restart_from_snapshot_yields_identical_views(tmp_path, live_server):
    backend = FileBackend(str(tmp_path))
    first = live_server(Runtime.from_scenario(grid_scenario()), backend=backend)
    spawn(first, minimal_spec("keeper", position={"x": 2, "y": 3}))
    tick(first, 4)
    world_before = requests.get(f"{first.base_url}/v1/world", timeout=5).json()
    agents_before = requests.get(f"{first.base_url}/v1/agents", timeout=5).json()
    locator = requests.post(f"{first.base_url}/v1/world/snapshot", timeout=5).json()["locator"]
    first.stop()

    from agentworld.runtime import Runtime as R
    restored = R.from_snapshot(backend.load(locator).raw)
    second = live_server(restored, backend=backend)
    assert requests.get(f"{second.base_url}/v1/world", timeout=5).json() == world_before
    assert requests.get(f"{second.base_url}/v1/agents", timeout=5).json() == agents_before


def test_schema_endpoints(server):
    index = requests.get(f"{server.base_url}/schema", timeout=5).json()
    assert "agent-spec" in index["schemas"]
    doc = requests.get(f"{server.base_url}/schema/agent-spec", timeout=5)
    assert doc.status_code == 200
    assert doc.json()["$id"] == "/schema/agent-spec"
    assert requests.get(f"{server.base_url}/schema/nope", timeout=5).status_code == 404


def test_tick_steps_validation(server):
    response = requests.post(f"{server.base_url}/v1/world/tick",
                             json={"steps": -1}, timeout=5)
    assert response.status_code == 400


# -- event channel ----------------------------------------------------------------------


def test_world_scope_receives_entity_created_frame(server):
    with ws_connect(server.ws_url) as ws:
        ws.send(json.dumps({"type": "subscribe", "scope": "world"}))
        ack = json.loads(ws.recv(timeout=5))
        assert ack == {"type": "subscribed", "scope": "world"}
        spawn(server, minimal_spec("newcomer"))
        tick(server)
        frame = json.loads(ws.recv(timeout=5))
        assert frame["type"] == "event"
        assert frame["event"]["kind"] == "entity-created"


def test_subscribe_unknown_agent_errors_and_closes(server):
    with ws_connect(server.ws_url) as ws:
        ws.send(json.dumps({"type": "subscribe", "scope": "agent", "agent": "42-0"}))
        frame = json.loads(ws.recv(timeout=5))
        assert frame["type"] == "error"
        with pytest.raises(Exception):
            ws.recv(timeout=2)


def test_agent_scope_gets_message_frame_next_tick(server):
    sender = spawn(server, minimal_spec("sender")).json()["id"]
    receiver = spawn(server, minimal_spec("receiver")).json()["id"]
    tick(server)
    with ws_connect(server.ws_url) as ws:
        ws.send(json.dumps({"type": "subscribe", "scope": "agent", "agent": receiver}))
        json.loads(ws.recv(timeout=5))  # ack
        si, sg = (int(x) for x in sender.split("-"))
        ri, rg = (int(x) for x in receiver.split("-"))
        response = requests.post(f"{server.base_url}/v1/messages", json={
            "sender": [si, sg],
            "target": {"kind": "agent", "id": [ri, rg]},
            "performative": "inform",
            "payload": {"text": "over the wire"},
        }, timeout=5)
        assert response.status_code == 202
        tick(server)
        frames = []
        while True:
            frame = json.loads(ws.recv(timeout=5))
            frames.append(frame)
            if frame["type"] == "message":
                break
        assert frames[-1]["envelope"]["payload"] == {"text": "over the wire"}
        assert frames[-1]["agentIndex"] == ri


def test_percept_frames_arrive_once_per_tick(server):
    agent_id = spawn(server, minimal_spec("watcher", position={"x": 1, "y": 1})).json()["id"]
    tick(server)  # activate
    with ws_connect(server.ws_url) as ws:
        ws.send(json.dumps({"type": "subscribe", "scope": "agent", "agent": agent_id}))
        json.loads(ws.recv(timeout=5))
        tick(server, 5)
        percept_frames = []
        for _ in range(5):
            frame = json.loads(ws.recv(timeout=5))
            assert frame["type"] == "percept"
            percept_frames.append(frame)
        assert [f["tick"] for f in percept_frames] == list(range(1, 6))


def test_inbound_env_action_applies_next_tick_with_outcome_frame(server):
    agent_id = spawn(server, minimal_spec("mover", position={"x": 0, "y": 0})).json()["id"]
    tick(server)
    with ws_connect(server.ws_url) as ws:
        ws.send(json.dumps({"type": "subscribe", "scope": "agent", "agent": agent_id}))
        json.loads(ws.recv(timeout=5))
        ws.send(json.dumps({
            "type": "env-action",
            "action": {"kind": "move", "dx": 1, "dy": 0, "issuer": agent_id},
        }))
        view = requests.get(f"{server.base_url}/v1/agents/{agent_id}", timeout=5).json()
        assert view["position"] == {"x": 0, "y": 0}  # not yet applied
        tick(server)
        outcome = None
        for _ in range(5):
            frame = json.loads(ws.recv(timeout=5))
            if frame["type"] == "action-outcome":
                outcome = frame
                break
        assert outcome is not None and outcome["status"] == "ok"
        view = requests.get(f"{server.base_url}/v1/agents/{agent_id}", timeout=5).json()
        assert view["position"] == {"x": 1, "y": 0}
