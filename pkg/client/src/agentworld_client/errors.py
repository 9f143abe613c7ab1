"""Typed client errors mapping the server's structured error bodies."""

from __future__ import annotations

from typing import Any, Optional


class ClientError(Exception):
    """Base class for everything this SDK raises."""


class ValidationError(ClientError):
    """A definition failed local validation before any network call."""

    def __init__(self, problems: list[str]):
        super().__init__("invalid agent definition: " + "; ".join(problems))
        self.problems = problems


class ConnectionFailed(ClientError):
    """The server could not be reached after all retries."""


class ApiError(ClientError):
    """The server answered with a structured error body."""

    def __init__(self, status: int, code: str, message: str, detail: Any = None):
        super().__init__(f"{code} ({status}): {message}")
        self.status = status
        self.code = code
        self.detail = detail


class NotFound(ApiError):
    pass


class Conflict(ApiError):
    pass


class Rejected(ApiError):
    """The server rejected the definition (validation diagnostics in detail)."""


def error_from_response(status: int, body: Optional[dict]) -> ApiError:
    body = body or {}
    code = body.get("code", "unknown")
    message = body.get("message", "no message")
    detail = body.get("detail")
    if status == 404:
        return NotFound(status, code, message, detail)
    if status == 409:
        return Conflict(status, code, message, detail)
    if status == 422:
        return Rejected(status, code, message, detail)
    return ApiError(status, code, message, detail)
