"""Operator entry point: serve the API, or run scenarios headlessly.

Exit codes: 0 success, 1 runtime failure, 2 configuration error.
"""

from __future__ import annotations

import argparse
import asyncio
import json
import os
import sys

from aiohttp import web

from agentworld import persistence
from agentworld.ecs.log import LEVELS, RunLog
from agentworld.errors import EngineError, ScenarioError
from agentworld.runtime import Runtime, load_scenario

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_CONFIG = 2


def _build_log(args) -> RunLog:
    return RunLog(args.log_level, console=args.log_console, path=args.log_file)


def _add_log_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--log-level",
        default=os.environ.get("AGENTWORLD_LOG_LEVEL", "warn"),
        choices=sorted(LEVELS, key=LEVELS.get),
        help="log verbosity (default: %(default)s)",
    )
    parser.add_argument("--log-file", default=None, help="append log records to this file")
    parser.add_argument("--log-console", action="store_true",
                        help="also print log records to stderr")


def cmd_run(args) -> int:
    log = _build_log(args)
    try:
        config = load_scenario(args.scenario)
        runtime = Runtime.from_scenario(config, seed=args.seed, log=log)
    except ScenarioError as exc:
        print(f"scenario error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    backend = None
    if args.snapshot_every:
        backend = persistence.FileBackend(args.snapshot_dir or "snapshots")

    try:
        for step in range(args.ticks):
            runtime.tick()
            if backend and args.snapshot_every and \
                    runtime.world.tick_count % args.snapshot_every == 0:
                backend.save(runtime.snapshot())
    except EngineError as exc:
        print(f"runtime failure: {exc}", file=sys.stderr)
        return EXIT_RUNTIME

    metrics = runtime.metrics(args.ticks)
    payload = json.dumps(metrics, sort_keys=True, indent=2) + "\n"
    if args.metrics:
        with open(args.metrics, "w") as fh:
            fh.write(payload)
    else:
        sys.stdout.write(payload)

    timing = runtime.timing()
    print(
        f"ran {args.ticks} ticks in {timing['wallSeconds']:.3f}s; "
        f"goals achieved: {metrics['goalsAchievedTotal']}; "
        f"messages delivered: {metrics['messagesDelivered']}",
        file=sys.stderr,
    )
    if args.timings:
        with open(args.timings, "w") as fh:
            json.dump(timing, fh, sort_keys=True, indent=2)
            fh.write("\n")

    if args.report_dir:
        from agentworld.report import render_report

        for path in render_report(runtime.timeline, metrics, args.report_dir):
            print(f"wrote {path}", file=sys.stderr)
    return EXIT_OK


def cmd_serve(args) -> int:
    from agentworld.server.app import STATE_KEY, build_app

    log = _build_log(args)
    data_dir = args.data_dir or os.environ.get("AGENTWORLD_DATA_DIR", "agentworld-data")
    backend = persistence.FileBackend(data_dir)

    try:
        if args.restore:
            locator = args.restore
            if locator == "latest":
                locator = backend.latest()
                if locator is None:
                    print("no snapshot to restore from", file=sys.stderr)
                    return EXIT_CONFIG
            runtime = Runtime.from_snapshot(backend.load(locator).raw, log=log)
            print(f"restored {locator} at tick {runtime.world.tick_count}", file=sys.stderr)
        elif args.config:
            config = load_scenario(args.config)
            runtime = Runtime.from_scenario(config, seed=args.seed, log=log)
        else:
            config = {}
            runtime = Runtime.empty(seed=args.seed or 0, log=log)
    except (ScenarioError, EngineError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    app = build_app(runtime, backend=backend)
    state = app[STATE_KEY]

    tick_mode = (config.get("tickMode", "manual") if args.config else "manual")
    if isinstance(tick_mode, dict) and "auto" in tick_mode:
        rate = tick_mode["auto"].get("rate", 10)

        async def start_auto(app):
            async def auto():
                period = 1.0 / rate
                from agentworld.server.app import _tick_locked
                while True:
                    await asyncio.sleep(period)
                    await _tick_locked(state, 1)

            state.auto_task = asyncio.get_running_loop().create_task(auto())

        app.on_startup.append(start_auto)

    if args.snapshot_on_exit:
        async def final_snapshot(app):
            locator = backend.save(state.runtime.snapshot())
            print(f"final snapshot: {locator}", file=sys.stderr)

        app.on_shutdown.append(final_snapshot)

    bind = args.bind or os.environ.get("AGENTWORLD_BIND", "127.0.0.1")
    port = args.port if args.port is not None else int(os.environ.get("AGENTWORLD_PORT", "8010"))
    print(f"listening on http://{bind}:{port}", flush=True)
    web.run_app(app, host=bind, port=port, print=None)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="agentworld",
        description="deterministic multi-agent runtime: serve the API or run scenarios headlessly",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="execute a scenario headlessly and emit metrics")
    run.add_argument("scenario", help="path to a scenario JSON file")
    run.add_argument("--ticks", type=int, default=100, help="ticks to execute")
    run.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    run.add_argument("--metrics", default=None, help="write run metrics JSON here")
    run.add_argument("--timings", default=None,
                     help="write wall-clock timing JSON here (not reproducible)")
    run.add_argument("--report-dir", default=None,
                     help="write timeline.csv and figures into this directory")
    run.add_argument("--snapshot-every", type=int, default=None,
                     help="save a snapshot every N ticks")
    run.add_argument("--snapshot-dir", default=None, help="where snapshots go")
    _add_log_flags(run)
    run.set_defaults(func=cmd_run)

    serve = sub.add_parser("serve", help="start the REST + WebSocket server")
    serve.add_argument("--config", default=None, help="scenario JSON to load at boot")
    serve.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    serve.add_argument("--bind", default=None, help="bind address (env AGENTWORLD_BIND)")
    serve.add_argument("--port", type=int, default=None, help="port (env AGENTWORLD_PORT)")
    serve.add_argument("--data-dir", default=None,
                       help="snapshot directory (env AGENTWORLD_DATA_DIR)")
    serve.add_argument("--restore", default=None,
                       help="restore from a snapshot locator, or 'latest'")
    serve.add_argument("--snapshot-on-exit", action="store_true",
                       help="save a final snapshot on clean shutdown")
    _add_log_flags(serve)
    serve.set_defaults(func=cmd_serve)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except KeyboardInterrupt:
        return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
