"""Model providers: a chat-completion HTTP client and a replay provider.

Every completion is requested at temperature 0.  The replay provider
returns pre-recorded responses keyed by (instance, strategy, stage,
attempt) and keeps tests and experiments fully deterministic and offline.
"""

from __future__ import annotations

import os
import threading
import time
from dataclasses import dataclass

import requests


class ProviderError(Exception):
    pass


class ApiError(ProviderError):
    def __init__(self, status: int, body: str):
        super().__init__(f"provider error {status}: {body}")
        self.status = status
        self.body = body


class CompletionTimeout(ProviderError):
    pass


@dataclass(frozen=True)
class CallKey:
    """Identifies one completion request within an experiment."""

    instance: str
    strategy: str
    stage: str
    attempt: int

    def as_string(self) -> str:
        return f"{self.instance}|{self.strategy}|{self.stage}|{self.attempt}"


@dataclass(frozen=True)
class ProviderSpec:
    name: str
    endpoint: str
    model: str
    auth_env: str
    temperature: float = 0.0
    request_timeout_sec: float = 120.0
    rate_limit_per_sec: float | None = None

    def __post_init__(self):
        if self.temperature != 0.0:
            raise ValueError("temperature is fixed at 0")
        if self.request_timeout_sec <= 0:
            raise ValueError("request_timeout_sec must be positive")


class RateLimiter:
    """Token bucket; acquire() blocks until a token is available."""

    def __init__(self, rate_per_sec: float, burst: int = 1, clock=time.monotonic, sleeper=time.sleep):
        if rate_per_sec <= 0:
            raise ValueError("rate_per_sec must be positive")
        self.rate = rate_per_sec
        self.capacity = max(1, burst)
        self.tokens = float(self.capacity)
        self.updated = clock()
        self.clock = clock
        self.sleeper = sleeper
        self.lock = threading.Lock()

    def acquire(self) -> None:
        while True:
            with self.lock:
                now = self.clock()
                self.tokens = min(self.capacity, self.tokens + (now - self.updated) * self.rate)
                self.updated = now
                if self.tokens >= 1.0:
                    self.tokens -= 1.0
                    return
                wait = (1.0 - self.tokens) / self.rate
            self.sleeper(wait)


class HttpProvider:
    """OpenAI-style chat-completions client.

    Sends ``{"model": ..., "temperature": 0, "messages": [...]}`` and reads
    ``choices[0].message.content``.  The API key is read from the
    environment variable named by the spec; it never appears in any stored
    artifact.
    """

    def __init__(self, spec: ProviderSpec, session=None):
        self.spec = spec
        self.name = spec.name
        self.session = session or requests.Session()
        self.limiter = (
            RateLimiter(spec.rate_limit_per_sec) if spec.rate_limit_per_sec else None
        )

    def complete(self, prompt: str, key: CallKey | None = None) -> str:
        api_key = os.environ.get(self.spec.auth_env)
        if not api_key:
            raise ApiError(0, f"auth environment variable {self.spec.auth_env} is not set")
        if self.limiter is not None:
            self.limiter.acquire()
        payload = {
            "model": self.spec.model,
            "temperature": 0,
            "messages": [{"role": "user", "content": prompt}],
        }
        try:
            response = self.session.post(
                self.spec.endpoint,
                json=payload,
                headers={"Authorization": f"Bearer {api_key}"},
                timeout=self.spec.request_timeout_sec,
            )
        except requests.Timeout:
            raise CompletionTimeout(
                f"no response within {self.spec.request_timeout_sec} s"
            ) from None
        except requests.RequestException as exc:
            raise ApiError(0, str(exc)) from None
        if response.status_code != 200:
            raise ApiError(response.status_code, response.text)
        try:
            return response.json()["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError, ValueError):
            raise ApiError(response.status_code, "unexpected response shape") from None


class ReplayProvider:
    """Serves pre-recorded completions by call key; raises ApiError on a
    key with no recorded response."""

    def __init__(self, name: str, responses: dict[str, str]):
        self.name = name
        self.responses = dict(responses)

    def complete(self, prompt: str, key: CallKey | None = None) -> str:
        if key is None:
            raise ApiError(404, "replay provider needs a call key")
        wanted = key.as_string()
        if wanted not in self.responses:
            raise ApiError(404, f"no recorded response for {wanted}")
        return self.responses[wanted]

    @classmethod
    def from_file(cls, name: str, path: str) -> "ReplayProvider":
        import json

        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
        return cls(name, doc["responses"] if "responses" in doc else doc)
