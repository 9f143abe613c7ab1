"""The client session: REST with idempotent retries, handles, callbacks.

Every mutating call mints one command id for its logical command and
replays that same id on retry, so a request that half-succeeded (response
lost, work done) is acknowledged rather than re-executed when the retry
lands. Reads are plain GETs.
"""

from __future__ import annotations

import time
import uuid
from typing import Any, Callable, Optional

import requests

from agentworld_client.builder import AgentBuilder
from agentworld_client.errors import ClientError, ConnectionFailed, error_from_response
from agentworld_client.events import Dispatcher, SocketChannel

_RETRYABLE_STATUSES = (502, 503, 504)


class AgentHandle:
    """A remote agent: cached view plus real-time callbacks."""

    def __init__(self, session: "Session", agent_id: str):
        self._session = session
        self.id = agent_id
        self.last_view: Optional[dict] = None
        self._on_percept: list[Callable] = []
        self._on_message: list[Callable] = []
        self._on_event: list[Callable] = []
        self._channel: Optional[SocketChannel] = None

    # -- callbacks -----------------------------------------------------------

    def on_percept(self, callback: Callable[[int, list], None]) -> "AgentHandle":
        self._on_percept.append(callback)
        return self

    def on_message(self, callback: Callable[[dict, int], None]) -> "AgentHandle":
        self._on_message.append(callback)
        return self

    def on_event(self, callback: Callable[[dict, int], None]) -> "AgentHandle":
        self._on_event.append(callback)
        return self

    def _route(self, frame: dict) -> None:
        kind = frame.get("type")
        tick = frame.get("tick", -1)
        if kind == "percept":
            for callback in self._on_percept:
                callback(tick, frame.get("percepts", []))
        elif kind == "message":
            for callback in self._on_message:
                callback(frame.get("envelope", {}), tick)
        elif kind in ("event", "action-outcome"):
            for callback in self._on_event:
                callback(frame, tick)

    # -- lifecycle shortcuts ---------------------------------------------------

    def subscribe(self) -> "AgentHandle":
        self._channel = self._session._open_channel("agent", self.id, self._route)
        return self

    def unsubscribe(self) -> None:
        if self._channel is not None:
            self._channel.close()
            self._channel = None

    def view(self) -> dict:
        self.last_view = self._session._get(f"/v1/agents/{self.id}")
        return self.last_view

    def suspend(self) -> None:
        self._session._command("POST", f"/v1/agents/{self.id}/state",
                               {"target": "suspended"})

    def resume(self) -> None:
        self._session._command("POST", f"/v1/agents/{self.id}/state",
                               {"target": "active"})

    def terminate(self) -> None:
        self._session._command("DELETE", f"/v1/agents/{self.id}")

    def act(self, action: dict) -> None:
        body = dict(action)
        body["issuer"] = self.id
        self._session._command("POST", "/v1/environment/actions", body)

    def say(self, action: dict) -> str:
        """Send one of the say(...) helper results as this agent."""
        index, generation = (int(part) for part in self.id.split("-", 1))
        envelope = {
            "sender": [index, generation],
            "target": action["target"],
            "performative": action.get("performative", "inform"),
            "payload": action.get("payload", {}),
            "semantics": action.get("semantics", "at-most-once"),
        }
        response = self._session._command("POST", "/v1/messages", envelope)
        return response.get("messageId")


class Session:
    def __init__(self, base_url: str, *, retries: int = 3, backoff: float = 0.2,
                 timeout: float = 10.0):
        self.base_url = base_url.rstrip("/")
        self.retries = retries
        self.backoff = backoff
        self.timeout = timeout
        self._http = requests.Session()
        self._dispatcher = Dispatcher()
        self._channels: list[SocketChannel] = []

    # -- transport ----------------------------------------------------------------

    def _get(self, path: str) -> Any:
        try:
            response = self._http.get(self.base_url + path, timeout=self.timeout)
        except requests.RequestException as exc:
            raise ConnectionFailed(f"GET {path}: {exc}")
        if response.status_code >= 400:
            raise error_from_response(response.status_code, _safe_json(response))
        return response.json()

    def _command(self, method: str, path: str, body: Optional[dict] = None) -> Any:
        """One logical command: a single id, replayed across retries."""
        command_id = str(uuid.uuid4())
        headers = {"X-Command-Id": command_id}
        last_error: Optional[Exception] = None
        for attempt in range(self.retries + 1):
            if attempt:
                time.sleep(self.backoff * (2 ** (attempt - 1)))
            try:
                response = self._http.request(
                    method, self.base_url + path, json=body,
                    headers=headers, timeout=self.timeout,
                )
            except requests.RequestException as exc:
                last_error = exc
                continue
            if response.status_code in _RETRYABLE_STATUSES:
                last_error = error_from_response(response.status_code, _safe_json(response))
                continue
            if response.status_code >= 400:
                raise error_from_response(response.status_code, _safe_json(response))
            return response.json()
        raise ConnectionFailed(f"{method} {path} failed after "
                               f"{self.retries + 1} attempts: {last_error}")

    def _open_channel(self, scope: str, agent: Optional[str], route) -> SocketChannel:
        self._dispatcher.start()
        ws_url = self.base_url.replace("http://", "ws://").replace("https://", "wss://")
        channel = SocketChannel(ws_url + "/v1/events", scope, agent,
                                self._dispatcher, route)
        channel.open()
        self._channels.append(channel)
        return channel

    # -- agents ------------------------------------------------------------------------

    def spawn(self, definition) -> AgentHandle:
        """Create an agent from a builder or a prepared definition document."""
        document = definition.build() if isinstance(definition, AgentBuilder) else definition
        response = self._command("POST", "/v1/agents", document)
        return AgentHandle(self, response["id"])

    def attach(self, agent_id: str) -> AgentHandle:
        handle = AgentHandle(self, agent_id)
        handle.view()  # fail fast on unknown ids
        return handle

    def agents(self) -> list[dict]:
        return self._get("/v1/agents")["agents"]

    # -- organization ----------------------------------------------------------------------

    def create_team(self, name: str, *, policies: Optional[dict] = None,
                    parent: Optional[str] = None) -> str:
        structure: Any = "flat"
        if parent is not None:
            index, generation = (int(part) for part in parent.split("-", 1))
            structure = {"parent": [index, generation]}
        response = self._command("POST", "/v1/groups", {
            "name": name, "structure": structure, "policies": policies or {},
        })
        return response["id"]

    def add_member(self, team_id: str, handle: AgentHandle) -> None:
        self._command("POST", f"/v1/groups/{team_id}/members", {"agent": handle.id})

    def grant_role(self, handle: AgentHandle, role: str, team_id: str,
                   capabilities=()) -> None:
        self._command("POST", f"/v1/agents/{handle.id}/roles", {
            "role": role, "group": team_id, "capabilities": list(capabilities),
        })

    # -- world control ------------------------------------------------------------------------

    def world(self) -> dict:
        return self._get("/v1/world")

    def step(self, ticks: int = 1) -> int:
        return self._command("POST", "/v1/world/tick", {"steps": ticks})["tick"]

    def run(self, rate: float) -> None:
        self._command("POST", "/v1/world/run", {"rate": rate})

    def pause(self) -> None:
        self._command("POST", "/v1/world/pause")

    def save(self) -> str:
        return self._command("POST", "/v1/world/snapshot")["locator"]

    def load(self, locator: str = "latest") -> int:
        return self._command("POST", "/v1/world/restore", {"locator": locator})["tick"]

    # -- teardown ---------------------------------------------------------------------------------

    def close(self) -> None:
        for channel in self._channels:
            channel.close()
        self._channels.clear()
        self._dispatcher.stop()
        self._http.close()

    def __enter__(self) -> "Session":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def _safe_json(response) -> Optional[dict]:
    try:
        return response.json()
    except ValueError:
        return None


__all__ = ["Session", "AgentHandle", "ClientError"]
