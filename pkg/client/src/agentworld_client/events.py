"""Real-time channel plumbing: socket listeners and the callback dispatcher.

Each subscription owns one socket. Listener threads push incoming frames
onto a single dispatcher queue per session, and one dispatcher thread
invokes callbacks, so callback order always matches the server's frame
order for any given subscription. A dropped socket reconnects and
resubscribes by itself; frames missed while disconnected are not replayed.
"""

from __future__ import annotations

import json
import queue
import threading
import time
from typing import Callable, Optional

from websockets.sync.client import connect as ws_connect

from agentworld_client.errors import ApiError, ConnectionFailed

_STOP = object()


class Dispatcher:
    """Single consumer thread driving all callbacks for one session."""

    def __init__(self):
        self._queue: queue.Queue = queue.Queue()
        self._thread: Optional[threading.Thread] = None

    def start(self) -> None:
        if self._thread is None:
            self._thread = threading.Thread(target=self._run, daemon=True)
            self._thread.start()

    def submit(self, callback: Callable, *args) -> None:
        self._queue.put((callback, args))

    def _run(self) -> None:
        while True:
            item = self._queue.get()
            if item is _STOP:
                return
            callback, args = item
            try:
                callback(*args)
            except Exception:
                pass  # a misbehaving callback must not kill the dispatcher

    def stop(self) -> None:
        if self._thread is not None:
            self._queue.put(_STOP)
            self._thread.join(timeout=5)
            self._thread = None


class SocketChannel:
    """One subscription: connect, hand frames to the dispatcher, reconnect."""

    def __init__(self, ws_url: str, scope: str, agent: Optional[str],
                 dispatcher: Dispatcher, route: Callable[[dict], None]):
        self.ws_url = ws_url
        self.scope = scope
        self.agent = agent
        self.dispatcher = dispatcher
        self.route = route
        self._ws = None
        self._thread: Optional[threading.Thread] = None
        self._stopped = threading.Event()

    def _subscribe_frame(self) -> str:
        frame = {"type": "subscribe", "scope": self.scope}
        if self.agent is not None:
            frame["agent"] = self.agent
        return json.dumps(frame)

    def _connect(self):
        ws = ws_connect(self.ws_url)
        ws.send(self._subscribe_frame())
        ack = json.loads(ws.recv(timeout=10))
        if ack.get("type") == "error":
            ws.close()
            raise ApiError(0, ack.get("code", "subscribe-failed"),
                           ack.get("message", "subscription rejected"))
        return ws

    def open(self) -> None:
        """Connect and confirm the subscription; raises on rejection."""
        try:
            self._ws = self._connect()
        except ApiError:
            raise
        except Exception as exc:
            raise ConnectionFailed(f"cannot open event channel: {exc}")
        self._thread = threading.Thread(target=self._run, daemon=True)
        self._thread.start()

    def _run(self) -> None:
        backoff = 0.1
        while not self._stopped.is_set():
            try:
                raw = self._ws.recv()
            except Exception:
                if self._stopped.is_set():
                    return
                # reconnect and resubscribe; missed frames are gone by design
                while not self._stopped.is_set():
                    time.sleep(backoff)
                    backoff = min(backoff * 2, 2.0)
                    try:
                        self._ws = self._connect()
                        backoff = 0.1
                        break
                    except ApiError:
                        return  # subscription no longer valid
                    except Exception:
                        continue
                continue
            try:
                frame = json.loads(raw)
            except (ValueError, TypeError):
                continue
            self.dispatcher.submit(self.route, frame)

    def close(self) -> None:
        self._stopped.set()
        if self._ws is not None:
            try:
                self._ws.close()
            except Exception:
                pass
        if self._thread is not None:
            self._thread.join(timeout=5)
            self._thread = None
