"""Deterministic HTTP transport: record live interactions, replay them offline.

Cassettes are JSON-lines files: a header line with version, recording
time, and the volatile-header list, then one interaction per line.
Matching is keyed on (HTTP method, normalized URL); volatile headers
never participate in the key.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field
from typing import Optional
from urllib.parse import parse_qsl, urlencode, urlsplit, urlunsplit

from .core import parse_iso_timestamp, render_iso_timestamp

CASSETTE_VERSION = 1
DEFAULT_VOLATILE_HEADERS = ("date", "x-request-id", "set-cookie", "etag")


class UnmatchedInteraction(KeyError):
    """Replay had no recorded response for the requested key."""


@dataclass(frozen=True)
class HttpResponse:
    status: int
    headers: dict[str, str]
    body: str

    def header(self, name: str) -> Optional[str]:
        lname = name.lower()
        for k, v in self.headers.items():
            if k.lower() == lname:
                return v
        return None


@dataclass(frozen=True)
class Interaction:
    method: str
    url: str
    response: HttpResponse
    request_headers: dict[str, str] = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "request": {
                "method": self.method,
                "url": self.url,
                "headers": self.request_headers,
            },
            "response": {
                "status": self.response.status,
                "headers": self.response.headers,
                "body": self.response.body,
            },
        }

    @classmethod
    def from_json(cls, obj: dict) -> "Interaction":
        req, resp = obj["request"], obj["response"]
        status = int(resp["status"])
        if not 100 <= status <= 599:
            raise ValueError(f"status code out of range: {status}")
        return cls(
            method=req["method"].upper(),
            url=req["url"],
            request_headers=dict(req.get("headers", {})),
            response=HttpResponse(
                status=status,
                headers=dict(resp.get("headers", {})),
                body=resp.get("body", ""),
            ),
        )


def match_key(method: str, url: str) -> tuple[str, str]:
    """Canonical lookup key: upper method + URL with lowercased scheme/host
    and sorted query parameters."""
    parts = urlsplit(url)
    query = urlencode(sorted(parse_qsl(parts.query, keep_blank_values=True)))
    normalized = urlunsplit(
        (
            parts.scheme.lower(),
            (parts.netloc or "").lower(),
            parts.path or "/",
            query,
            "",
        )
    )
    return method.upper(), normalized


@dataclass
class Cassette:
    recorded_at: int
    volatile_headers: tuple[str, ...] = DEFAULT_VOLATILE_HEADERS
    entries: dict[tuple[str, str], Interaction] = field(default_factory=dict)

    def add(self, interaction: Interaction) -> bool:
        """Insert unless the key is already present; returns True if added."""
        key = match_key(interaction.method, interaction.url)
        if key in self.entries:
            return False
        clean_headers = {
            k: v
            for k, v in interaction.response.headers.items()
            if k.lower() not in self.volatile_headers
        }
        self.entries[key] = Interaction(
            method=interaction.method,
            url=interaction.url,
            request_headers=interaction.request_headers,
            response=HttpResponse(
                status=interaction.response.status,
                headers=clean_headers,
                body=interaction.response.body,
            ),
        )
        return True

    def lookup(self, method: str, url: str) -> Interaction:
        key = match_key(method, url)
        try:
            return self.entries[key]
        except KeyError:
            raise UnmatchedInteraction(f"{key[0]} {key[1]}") from None

    def save(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as f:
            header = {
                "version": CASSETTE_VERSION,
                "recorded_at": render_iso_timestamp(self.recorded_at),
                "volatile_headers": list(self.volatile_headers),
            }
            f.write(json.dumps(header) + "\n")
            for interaction in self.entries.values():
                f.write(json.dumps(interaction.to_json()) + "\n")

    @classmethod
    def load(cls, path: str) -> "Cassette":
        with open(path, "r", encoding="utf-8") as f:
            lines = [line for line in f if line.strip()]
        if not lines:
            raise ValueError(f"empty cassette file: {path}")
        header = json.loads(lines[0])
        cassette = cls(
            recorded_at=parse_iso_timestamp(header["recorded_at"]),
            volatile_headers=tuple(
                h.lower() for h in header.get("volatile_headers", [])
            ),
        )
        for line in lines[1:]:
            cassette.add(Interaction.from_json(json.loads(line)))
        return cassette


class ReplayTransport:
    """Serves recorded responses; raises UnmatchedInteraction otherwise.

    Read-only after construction, so concurrent lookups are safe.
    """

    def __init__(self, cassette: Cassette):
        self.cassette = cassette

    def request(self, method: str, url: str) -> HttpResponse:
        return self.cassette.lookup(method, url).response


class RecordingTransport:
    """Pass-through wrapper that appends every interaction to a cassette.

    Repeated requests for an already-recorded key are answered from the
    cassette, keeping keys unique.
    """

    def __init__(self, inner, sink: Cassette):
        self.inner = inner
        self.sink = sink
        self._lock = threading.Lock()

    def request(self, method: str, url: str) -> HttpResponse:
        with self._lock:
            key = match_key(method, url)
            if key in self.sink.entries:
                return self.sink.entries[key].response
        response = self.inner.request(method, url)
        with self._lock:
            self.sink.add(Interaction(method=method.upper(), url=url, response=response))
        return response


class LiveTransport:
    """Real HTTP via requests. Only used outside of tests."""

    def __init__(self, timeout_s: float = 10.0):
        self.timeout_s = timeout_s

    def request(self, method: str, url: str) -> HttpResponse:
        import requests

        resp = requests.request(
            method, url, timeout=self.timeout_s, allow_redirects=True
        )
        return HttpResponse(
            status=resp.status_code,
            headers=dict(resp.headers),
            body=resp.text,
        )
