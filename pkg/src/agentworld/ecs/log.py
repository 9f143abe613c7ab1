"""Leveled run log with tick-stamped key-value lines.

Record format, one per line::

    tick=12 level=info event=entity-created index=3 generation=0

Destinations are the console (stderr) and/or a file; verbosity is filtered
by level. Kept separate from stdlib logging so the line format stays exact
and a trace level exists.
"""

from __future__ import annotations

import sys
from typing import IO, Optional

LEVELS = {"error": 0, "warn": 1, "info": 2, "debug": 3, "trace": 4}


class RunLog:
    def __init__(
        self,
        level: str = "warn",
        *,
        console: bool = False,
        path: Optional[str] = None,
    ):
        if level not in LEVELS:
            raise ValueError(f"unknown log level {level!r}")
        self.threshold = LEVELS[level]
        self.console = console
        self._file: Optional[IO[str]] = open(path, "a") if path else None
        self._tick = 0

    def set_tick(self, tick: int) -> None:
        self._tick = tick

    def enabled(self, level: str) -> bool:
        return LEVELS[level] <= self.threshold

    def write(self, level: str, event: str, **fields) -> None:
        if LEVELS[level] > self.threshold:
            return
        parts = [f"tick={self._tick}", f"level={level}", f"event={event}"]
        parts.extend(f"{key}={value}" for key, value in fields.items())
        line = " ".join(parts)
        if self.console:
            print(line, file=sys.stderr)
        if self._file is not None:
            self._file.write(line + "\n")
            self._file.flush()

    def error(self, event: str, **fields) -> None:
        self.write("error", event, **fields)

    def warn(self, event: str, **fields) -> None:
        self.write("warn", event, **fields)

    def info(self, event: str, **fields) -> None:
        self.write("info", event, **fields)

    def debug(self, event: str, **fields) -> None:
        self.write("debug", event, **fields)

    def trace(self, event: str, **fields) -> None:
        self.write("trace", event, **fields)

    def close(self) -> None:
        if self._file is not None:
            self._file.close()
            self._file = None
