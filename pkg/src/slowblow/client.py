"""Thin HTTP client for the service API.

By default the app is hosted in-process behind the same HTTP interface
(no sockets); pass a base URL to talk to a remote `slowblow serve`.
"""

from __future__ import annotations

import httpx


class ServiceError(Exception):
    """Non-2xx response from the service, with its machine-readable code."""

    def __init__(self, status_code: int, code: str, message: str):
        self.status_code = status_code
        self.code = code
        self.message = message
        super().__init__(f"[{status_code}/{code}] {message}")


class ServiceClient:
    def __init__(self, base_url: str | None = None):
        if base_url:
            self._client = httpx.Client(base_url=base_url, timeout=None)
        else:
            from starlette.testclient import TestClient

            from .service import app

            self._client = TestClient(app)

    def close(self):
        self._client.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def _post(self, path: str, payload: dict) -> dict:
        resp = self._client.post(path, json=payload)
        if resp.status_code >= 400:
            detail = {}
            try:
                detail = resp.json().get("detail", {})
            except ValueError:
                pass
            if isinstance(detail, dict) and "code" in detail:
                raise ServiceError(resp.status_code, detail["code"],
                                   detail.get("message", ""))
            raise ServiceError(resp.status_code, "http_error", str(detail or resp.text))
        return resp.json()

    def health(self) -> dict:
        resp = self._client.get("/health")
        resp.raise_for_status()
        return resp.json()

    def run(self, payload: dict) -> dict:
        return self._post("/run", payload)

    def predict(self, payload: dict) -> dict:
        return self._post("/predict", payload)

    def extract(self, payload: dict) -> dict:
        return self._post("/fit/extract", payload)

    def hyperbola(self, payload: dict) -> dict:
        return self._post("/fit/hyperbola", payload)

    def sweep(self, payload: dict) -> dict:
        return self._post("/sweep", payload)
