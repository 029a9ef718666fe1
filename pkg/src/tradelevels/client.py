"""Thin client for the HTTP service.

By default the client drives the service in process through its ASGI
interface, so the CLI works without a running server and stays byte
deterministic.  Pass a base URL to talk to a remote instance instead.
"""
from __future__ import annotations

from typing import Any

import httpx


class ServiceError(Exception):
    """An error response from the service; ``kind`` drives exit codes."""

    def __init__(self, kind: str, message: str, status: int):
        self.kind = kind
        self.message = message
        self.status = status
        super().__init__(message)


class TransportError(Exception):
    """The service could not be reached at all."""


def _extract_error(payload: Any, status: int) -> ServiceError:
    detail = payload.get("detail") if isinstance(payload, dict) else None
    if isinstance(detail, dict) and "kind" in detail:
        return ServiceError(str(detail["kind"]), str(detail.get("message", "")), status)
    # Request-validation failures (unprocessable payloads) count as domain errors.
    return ServiceError("domain", str(detail if detail is not None else payload), status)


class ServiceClient:
    """POST JSON to the service and return parsed responses."""

    def __init__(self, server: str | None = None):
        if server:
            self._client = httpx.Client(base_url=server.rstrip("/"), timeout=600.0)
        else:
            import warnings

            # starlette's test client import warns about its httpx backend;
            # irrelevant for in-process use.
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                from starlette.testclient import TestClient

                from .service import app
                self._client = TestClient(app, raise_server_exceptions=False)

    def close(self) -> None:
        self._client.close()

    def __enter__(self) -> "ServiceClient":
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    def _request(self, method: str, path: str, payload: dict | None) -> dict:
        try:
            response = self._client.request(method, path, json=payload)
        except httpx.HTTPError as exc:
            raise TransportError(f"cannot reach service: {exc}") from exc
        try:
            body = response.json()
        except ValueError:
            raise TransportError(
                f"service returned non-JSON (status {response.status_code})") from None
        if response.status_code >= 400:
            raise _extract_error(body, response.status_code)
        return body

    def get(self, path: str) -> dict:
        return self._request("GET", path, None)

    def post(self, path: str, payload: dict) -> dict:
        return self._request("POST", path, payload)
