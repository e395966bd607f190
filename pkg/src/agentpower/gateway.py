"""Remote decision backend over an OpenAI-compatible chat-completions endpoint."""
from __future__ import annotations

import json
import logging
import os
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

import httpx

from .agents.planning import DecisionRequest
from .errors import GatewayConnectionError, GatewayTimeout, HttpStatusError, MalformedResponse

API_KEY_ENV = "GENAINET_API_KEY"
REDACTED = "[REDACTED]"

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class GatewayConfig:
    base_url: str
    model_name: str
    temperature: float = 0.2
    max_tokens: int = 512
    timeout_s: float = 60.0
    max_retries: int = 3
    backoff_base_s: float = 1.0
    backoff_factor: float = 2.0
    api_key: str | None = field(default=None, repr=False)

    def __post_init__(self) -> None:
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")
        if not self.timeout_s > 0:
            raise ValueError("timeout_s must be positive")

    @classmethod
    def from_env(cls, base_url: str, model_name: str, **kwargs: Any) -> "GatewayConfig":
        return cls(base_url=base_url, model_name=model_name, api_key=os.environ.get(API_KEY_ENV), **kwargs)

    def public_dict(self) -> dict[str, Any]:
        """Config echo safe to write into run artifacts (no key)."""
        return {
            "base_url": self.base_url,
            "model_name": self.model_name,
            "temperature": self.temperature,
            "max_tokens": self.max_tokens,
            "timeout_s": self.timeout_s,
            "max_retries": self.max_retries,
        }


class TranscriptLog:
    """Thread-safe JSON-lines sink; keeps records in memory and optionally on disk."""

    def __init__(self, path: str | Path | None = None, secrets: tuple[str, ...] = ()):
        self.path = Path(path) if path else None
        self.records: list[dict[str, Any]] = []
        self._secrets = tuple(s for s in secrets if s)
        self._lock = threading.Lock()

    def add_secret(self, secret: str | None) -> None:
        if secret:
            self._secrets = (*self._secrets, secret)

    def _redact(self, line: str) -> str:
        for s in self._secrets:
            line = line.replace(s, REDACTED)
        return line

    def append(self, record: dict[str, Any]) -> None:
        line = self._redact(json.dumps(record, sort_keys=True))
        with self._lock:
            self.records.append(json.loads(line))
            if self.path is not None:
                with self.path.open("a", encoding="utf-8") as fh:
                    fh.write(line + "\n")


def build_messages(system_text: str, user_text: str, memory_text: str) -> list[dict[str, str]]:
    user = f"{user_text}\n\n{memory_text}" if memory_text else user_text
    return [{"role": "system", "content": system_text}, {"role": "user", "content": user}]


def _retryable(exc: Exception) -> bool:
    if isinstance(exc, GatewayTimeout):
        return True
    if isinstance(exc, HttpStatusError):
        return exc.code == 429 or exc.code >= 500
    return isinstance(exc, GatewayConnectionError)


def chat_complete(
    config: GatewayConfig,
    system_text: str,
    user_text: str,
    memory_text: str = "",
    *,
    transcript: TranscriptLog | None = None,
    client: httpx.Client | None = None,
    sleep: Callable[[float], None] = time.sleep,
) -> str:
    """Send one chat request, retrying transient failures with exponential backoff.

    Timeouts, HTTP 429 and 5xx, and transport errors are retried up to
    ``config.max_retries`` times. Other HTTP errors and unparseable bodies
    are raised immediately.
    """
    url = config.base_url.rstrip("/") + "/chat/completions"
    body = {
        "model": config.model_name,
        "messages": build_messages(system_text, user_text, memory_text),
        "temperature": config.temperature,
        "max_tokens": config.max_tokens,
    }
    headers = {"Content-Type": "application/json"}
    if config.api_key:
        headers["Authorization"] = f"Bearer {config.api_key}"
    if transcript is not None:
        transcript.add_secret(config.api_key)

    own_client = client is None
    http = client or httpx.Client(timeout=config.timeout_s)
    try:
        attempt = 0
        while True:
            attempt += 1
            record: dict[str, Any] = {"attempt": attempt, "url": url, "request": body}
            started = time.monotonic()
            try:
                return _post_once(http, url, body, headers, config.timeout_s, record)
            except Exception as exc:
                record["error"] = f"{type(exc).__name__}: {exc}"
                failure = exc
            finally:
                record["latency_s"] = round(time.monotonic() - started, 6)
                if transcript is not None:
                    transcript.append(record)
            if attempt > config.max_retries or not _retryable(failure):
                raise failure
            delay = config.backoff_base_s * config.backoff_factor ** (attempt - 1)
            log.warning("chat attempt %d failed (%s); retrying in %.1fs", attempt, failure, delay)
            sleep(delay)
    finally:
        if own_client:
            http.close()


def _post_once(
    http: httpx.Client, url: str, body: dict, headers: dict, timeout_s: float, record: dict[str, Any]
) -> str:
    try:
        resp = http.post(url, json=body, headers=headers, timeout=timeout_s)
    except httpx.TimeoutException as exc:
        raise GatewayTimeout(f"no response within {timeout_s}s") from exc
    except httpx.TransportError as exc:
        raise GatewayConnectionError(str(exc) or type(exc).__name__) from exc
    record["status"] = resp.status_code
    record["response"] = resp.text
    if resp.status_code != 200:
        raise HttpStatusError(resp.status_code, resp.text)
    try:
        content = resp.json()["choices"][0]["message"]["content"]
    except (ValueError, KeyError, IndexError, TypeError) as exc:
        raise MalformedResponse(f"unexpected response body: {resp.text[:200]}") from exc
    if not isinstance(content, str):
        raise MalformedResponse("choices[0].message.content is not a string")
    return content


class RemoteBackend:
    deterministic = False

    def __init__(self, config: GatewayConfig, transcript: TranscriptLog | None = None, **kwargs: Any):
        self.config = config
        self.transcript = transcript
        self._kwargs = kwargs

    def decide(self, request: DecisionRequest) -> str:
        p = request.prompt
        return chat_complete(
            self.config, p.system_text, p.user_text, p.memory_text, transcript=self.transcript, **self._kwargs
        )
