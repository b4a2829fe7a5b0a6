"""Chat providers: a real HTTP client and a deterministic scripted mock.

Both expose one method, ``complete(messages, temperature) -> str``, and the
orchestration code never branches on which one it holds. Requests always
carry the full message history; the mock keys its replies on the latest user
turn only, which is enough to identify a request because the workflows never
send the same prompt twice at the same temperature unless a repeat is meant.
"""

from __future__ import annotations

import base64
import hashlib
import json
import os
import threading
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import httpx

from ..errors import ConfigError, ProviderError

ROLES = ("system", "user", "assistant")


@dataclass(frozen=True)
class Message:
    """One chat turn. Images ride along as raw encoded bytes."""

    role: str
    text: str
    images: tuple[bytes, ...] = ()

    def __post_init__(self):
        if self.role not in ROLES:
            raise ProviderError(f"unknown message role {self.role!r}")


def reply_key(temperature: float, text: str, images: Sequence[bytes] = ()) -> str:
    """Hash identifying one request: temperature, latest user text, image digests."""
    h = hashlib.sha256()
    h.update(f"{temperature:.6f}".encode("ascii"))
    h.update(b"\x00")
    h.update(text.encode("utf-8"))
    for image in images:
        h.update(b"\x00")
        h.update(hashlib.sha256(image).digest())
    return h.hexdigest()


def _last_user(messages: Sequence[Message]) -> Message:
    for message in reversed(messages):
        if message.role == "user":
            return message
    raise ProviderError("request contains no user message")


class RateLimiter:
    """Spaces requests at least 1/rate seconds apart, shared across sessions."""

    def __init__(self, rate_per_second: float):
        if rate_per_second <= 0:
            raise ConfigError(f"request rate must be positive, got {rate_per_second}")
        self._interval = 1.0 / rate_per_second
        self._lock = threading.Lock()
        self._next_at = 0.0

    def wait(self) -> None:
        with self._lock:
            now = time.monotonic()
            delay = self._next_at - now
            self._next_at = max(self._next_at, now) + self._interval
        if delay > 0:
            time.sleep(delay)


class MockProvider:
    """Scripted provider; unscripted requests fail loudly.

    The transcript maps request hashes (see ``reply_key``) to a reply string,
    answered every time that request recurs, or to a list of replies consumed
    in order so a scenario can answer a repeated prompt differently each time.
    """

    def __init__(self, transcript: dict | None = None):
        self._replies: dict[str, str | list[str]] = {}
        self.seen: list[str] = []
        for key, value in (transcript or {}).items():
            self._replies[key] = list(value) if isinstance(value, list) else value

    @classmethod
    def from_file(cls, path: str | Path) -> "MockProvider":
        path = Path(path)
        if not path.is_file():
            raise ConfigError(f"transcript file not found: {path}")
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"bad transcript file {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError(f"transcript must be a JSON object: {path}")
        return cls(data)

    def transcript(self) -> dict:
        """Snapshot of the scripted replies, suitable for a transcript file.

        Entries whose queued replies are all identical collapse to a plain
        string, which answers that request every time it recurs; varied
        queues stay lists and keep their consumption order.
        """
        out: dict[str, str | list[str]] = {}
        for key, entry in self._replies.items():
            if isinstance(entry, str):
                out[key] = entry
            elif entry and all(reply == entry[0] for reply in entry):
                out[key] = entry[0]
            else:
                out[key] = list(entry)
        return out

    def script(self, temperature: float, text: str, reply: str,
               images: Sequence[bytes] = ()) -> str:
        """Queue a reply for the request this (temperature, prompt) hashes to."""
        key = reply_key(temperature, text, images)
        existing = self._replies.get(key)
        if existing is None:
            self._replies[key] = [reply]
        elif isinstance(existing, list):
            existing.append(reply)
        else:
            self._replies[key] = [existing, reply]
        return key

    def complete(self, messages: Sequence[Message], temperature: float) -> str:
        last = _last_user(messages)
        key = reply_key(temperature, last.text, last.images)
        self.seen.append(key)
        entry = self._replies.get(key)
        if isinstance(entry, str):
            return entry
        if not entry:
            head = last.text.splitlines()[0][:80] if last.text else ""
            raise ProviderError(f"no scripted reply for request {key[:12]} ({head!r})")
        return entry.pop(0)


@dataclass
class HttpProvider:
    """Minimal JSON-over-HTTP chat client.

    Sends the full history each call and expects ``{"text": ...}`` back. The
    API key is read from the environment at request time, so a constructed
    provider survives a key rotation.
    """

    endpoint: str
    api_key_env: str = "VERISPICE_API_KEY"
    limiter: RateLimiter | None = None
    timeout: float = 120.0

    def complete(self, messages: Sequence[Message], temperature: float) -> str:
        api_key = os.environ.get(self.api_key_env, "")
        if not api_key:
            raise ConfigError(f"API key environment variable {self.api_key_env} is not set")
        if self.limiter is not None:
            self.limiter.wait()
        payload = {
            "temperature": temperature,
            "messages": [
                {
                    "role": m.role,
                    "text": m.text,
                    "images": [base64.b64encode(i).decode("ascii") for i in m.images],
                }
                for m in messages
            ],
        }
        try:
            response = httpx.post(
                self.endpoint,
                json=payload,
                headers={"Authorization": f"Bearer {api_key}"},
                timeout=self.timeout,
            )
        except httpx.HTTPError as exc:
            raise ProviderError(f"provider request failed: {exc}") from exc
        if response.status_code != 200:
            raise ProviderError(f"provider returned HTTP {response.status_code}")
        try:
            text = response.json()["text"]
        except (ValueError, KeyError) as exc:
            raise ProviderError("provider response is missing a 'text' field") from exc
        if not isinstance(text, str):
            raise ProviderError("provider 'text' field is not a string")
        return text


def provider_from_config(config) -> MockProvider | HttpProvider:
    """Build the provider a RunConfig asks for."""
    if config.provider_kind == "mock":
        if not config.transcript_path:
            raise ConfigError("mock provider requires transcript_path")
        return MockProvider.from_file(config.transcript_path)
    if not config.provider_endpoint:
        raise ConfigError("http provider requires provider_endpoint")
    return HttpProvider(
        endpoint=config.provider_endpoint,
        api_key_env=config.provider_api_key_env,
        limiter=RateLimiter(config.provider_rate_per_second),
    )
