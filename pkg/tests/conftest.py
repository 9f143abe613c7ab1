"""Shared fixtures: a live server running on a real socket in a thread."""

from __future__ import annotations

import asyncio
import threading

import pytest
from aiohttp import web

from agentworld.server.app import STATE_KEY, build_app


class LiveServer:
    """Runs the aiohttp app on an ephemeral port in a dedicated loop thread."""

    def __init__(self, runtime, backend=None):
        self.runtime = runtime
        self.backend = backend
        self.loop: asyncio.AbstractEventLoop | None = None
        self.thread: threading.Thread | None = None
        self.runner: web.AppRunner | None = None
        self.port: int | None = None
        self.app: web.Application | None = None

    @property
    def base_url(self) -> str:
        return f"http://127.0.0.1:{self.port}"

    @property
    def ws_url(self) -> str:
        return f"ws://127.0.0.1:{self.port}/v1/events"

    def start(self) -> "LiveServer":
        started = threading.Event()

        def serve():
            self.loop = asyncio.new_event_loop()
            asyncio.set_event_loop(self.loop)
            self.app = build_app(self.runtime, backend=self.backend)
            self.runner = web.AppRunner(self.app)
            self.loop.run_until_complete(self.runner.setup())
            site = web.TCPSite(self.runner, "127.0.0.1", 0)
            self.loop.run_until_complete(site.start())
            self.port = self.runner.addresses[0][1]
            started.set()
            self.loop.run_forever()
            self.loop.run_until_complete(self.runner.cleanup())
            self.loop.close()

        self.thread = threading.Thread(target=serve, daemon=True)
        self.thread.start()
        if not started.wait(10):
            raise RuntimeError("server did not start within 10s")
        return self

    def stop(self) -> None:
        if self.loop is not None and not self.loop.is_closed():
            self.loop.call_soon_threadsafe(self.loop.stop)
        if self.thread is not None:
            self.thread.join(timeout=10)

    @property
    def state(self):
        return self.app[STATE_KEY]


@pytest.fixture
def live_server():
    servers: list[LiveServer] = []

    def factory(runtime, backend=None) -> LiveServer:
        server = LiveServer(runtime, backend=backend).start()
        servers.append(server)
        return server

    yield factory
    for server in servers:
        server.stop()


def pytest_runtest_logreport(report):
    """One visible PASS/FAIL line per acceptance criterion."""
    if report.when != "call" or "test_acceptance" not in report.nodeid:
        return
    status = "PASS" if report.passed else "FAIL"
    name = report.nodeid.split("::")[-1]
    print(f"\n[{status}] {name}", flush=True)
