"""HTTP client for the wire protocol: retries, timeouts, bounded in-flight."""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass
from typing import Callable

import httpx
from pydantic import BaseModel, ValidationError

from ..errors import (
    BackendRequestError,
    BackendTimeoutError,
    BackendUnavailableError,
    ConfigError,
    ProtocolError,
)
from .protocol import ROLES, canonical_json, parse_response, role_path

_RETRYABLE_STATUS = frozenset({502, 503, 504})


@dataclass(frozen=True)
class BackendEndpoint:
    """Binding of one model role to a served base URL."""

    role: str
    base_url: str
    timeout_ms: int = 30_000
    max_retries: int = 2
    auth_token: str | None = None
    max_inflight: int = 4

    def __post_init__(self):
        if self.role not in ROLES:
            raise ConfigError(f"unknown role {self.role!r}")
        if self.timeout_ms <= 0:
            raise ConfigError(f"timeout_ms must be positive, got {self.timeout_ms}")
        if self.max_retries < 0:
            raise ConfigError(f"max_retries must be >= 0, got {self.max_retries}")
        if self.max_inflight < 1:
            raise ConfigError(f"max_inflight must be >= 1, got {self.max_inflight}")


class GatewayClient:
    """Synchronous client for one endpoint; safe for concurrent use.

    ``http`` may be any ``httpx.Client``-compatible object (an in-process
    test client works); when omitted a real client owned by this instance is
    created with the endpoint's timeout.
    """

    def __init__(
        self,
        endpoint: BackendEndpoint,
        http: httpx.Client | None = None,
        *,
        sleep: Callable[[float], None] = time.sleep,
        backoff_base: float = 0.25,
    ):
        self.endpoint = endpoint
        self._owned = http is None
        self._http = http or httpx.Client(timeout=endpoint.timeout_ms / 1000.0)
        self._sleep = sleep
        self._backoff_base = backoff_base
        self._inflight = threading.BoundedSemaphore(endpoint.max_inflight)

    def call(self, request: BaseModel) -> BaseModel:
        """POST the request and return the parsed role-typed response.

        Transient transport failures (including per-attempt timeouts and
        502/503/504) are retried with exponential backoff up to
        ``max_retries`` extra attempts; schema violations are never coerced.
        """
        endpoint = self.endpoint
        url = endpoint.base_url.rstrip("/") + role_path(endpoint.role)
        headers = {"content-type": "application/json"}
        if endpoint.auth_token:
            headers["authorization"] = f"Bearer {endpoint.auth_token}"
        body = canonical_json(request)

        last_error: Exception | None = None
        with self._inflight:
            for attempt in range(endpoint.max_retries + 1):
                if attempt > 0:
                    self._sleep(self._backoff_base * 2 ** (attempt - 1))
                try:
                    response = self._http.post(url, content=body, headers=headers)
                except httpx.TimeoutException as exc:
                    last_error = BackendTimeoutError(
                        f"{endpoint.role} timed out after {endpoint.timeout_ms} ms: {exc}"
                    )
                    continue
                except httpx.TransportError as exc:
                    last_error = BackendUnavailableError(f"{endpoint.role} transport failure: {exc}")
                    continue
                if response.status_code == 200:
                    try:
                        return parse_response(endpoint.role, response.content)
                    except (ValidationError, ValueError) as exc:
                        raise ProtocolError(
                            f"{endpoint.role} response violates schema: {exc}",
                            raw_body=response.text,
                        ) from exc
                error, detail = _error_fields(response)
                if response.status_code in _RETRYABLE_STATUS:
                    last_error = BackendUnavailableError(
                        f"{endpoint.role} returned {response.status_code}: {error}: {detail}"
                    )
                    continue
                raise BackendRequestError(response.status_code, error, detail)
        assert last_error is not None
        raise last_error

    def close(self) -> None:
        if self._owned:
            self._http.close()

    def __enter__(self) -> "GatewayClient":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def _error_fields(response: httpx.Response) -> tuple[str, str]:
    try:
        body = response.json()
        return str(body.get("error", "unknown")), str(body.get("detail", ""))
    except ValueError:
        return "unparseable error body", response.text[:500]


def call(endpoint: BackendEndpoint, request: BaseModel, **kwargs) -> BaseModel:
    """One-shot convenience wrapper around :class:`GatewayClient`."""
    with GatewayClient(endpoint, **kwargs) as client:
        return client.call(request)
