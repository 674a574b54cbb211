"""HTTP clients for the chat, embedding, and rerank endpoints.

One wire style for all text models: chat-completion-like JSON. Transport
failures and 5xx responses are retried with exponential backoff; 4xx
responses are never retried. API keys are read from the environment at call
time and never appear in error messages or logs.

Wire formats (all POST, JSON in/out):

    {base_url}/chat    {"model", "messages", "max_tokens", temperature?, top_p?, top_k?} -> {"text": str}
    {base_url}/embed   {"model", "texts": [str]}                  -> {"vectors": [[float]]}
    {base_url}/rerank  {"model", "query": str, "passages": [str]} -> {"scores": [float]}
"""
from __future__ import annotations

import os
import time
from dataclasses import dataclass
from typing import Any, Protocol

import httpx

Message = dict[str, str]


class LlmError(Exception):
    """Base class for endpoint failures."""


class TransportError(LlmError):
    """Network-level failure (connection, protocol), retryable."""


class EndpointTimeoutError(TransportError):
    pass


class ServerError(TransportError):
    """5xx response, retryable."""


class AuthError(LlmError):
    """401/403 response, not retryable."""


class RateLimitError(LlmError):
    """429 response, not retryable at this layer."""


class BadRequestError(LlmError):
    """Any other 4xx response, not retryable."""


class MalformedResponseError(LlmError):
    """Response parsed but does not match the expected schema."""


@dataclass(frozen=True)
class EndpointConfig:
    base_url: str
    model: str = ""
    api_key_env: str | None = None
    timeout_ms: int = 30_000
    max_retries: int = 2
    backoff_initial_ms: int = 200
    backoff_multiplier: float = 2.0
    batch_size: int = 32

    def __post_init__(self) -> None:
        if self.timeout_ms <= 0:
            raise ValueError("timeout_ms must be > 0")
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")


@dataclass(frozen=True)
class PromptTemplate:
    """A system/user message pair with literal placeholder substitution.

    Placeholders like ``{question}`` are replaced verbatim, so braces in the
    substituted values cannot break rendering.
    """

    system: str
    user: str = "{question}"

    def render(self, **subs: str) -> list[Message]:
        system, user = self.system, self.user
        for key, value in subs.items():
            marker = "{" + key + "}"
            system = system.replace(marker, value)
            user = user.replace(marker, value)
        messages: list[Message] = []
        if system:
            messages.append({"role": "system", "content": system})
        messages.append({"role": "user", "content": user})
        return messages


class ChatClient(Protocol):
    def chat(self, messages: list[Message], decoding: Any | None = None) -> str: ...


class RerankClient(Protocol):
    def rerank_score(self, query: str, passages: list[str]) -> list[float]: ...


class _HttpBase:
    def __init__(self, cfg: EndpointConfig, transport: httpx.BaseTransport | None = None):
        self.cfg = cfg
        self._client = httpx.Client(
            timeout=cfg.timeout_ms / 1000.0,
            transport=transport,
        )

    def _headers(self) -> dict[str, str]:
        headers = {"Content-Type": "application/json"}
        if self.cfg.api_key_env:
            key = os.environ.get(self.cfg.api_key_env)
            if key:
                headers["Authorization"] = f"Bearer {key}"
        return headers

    def _post(self, path: str, payload: dict) -> dict:
        url = self.cfg.base_url.rstrip("/") + path
        delay = self.cfg.backoff_initial_ms / 1000.0
        last_error: LlmError | None = None
        for attempt in range(self.cfg.max_retries + 1):
            try:
                resp = self._client.post(url, json=payload, headers=self._headers())
            except httpx.TimeoutException:
                last_error = EndpointTimeoutError(f"timeout after {self.cfg.timeout_ms} ms: {url}")
            except httpx.HTTPError as exc:
                last_error = TransportError(f"transport failure for {url}: {type(exc).__name__}")
            else:
                status = resp.status_code
                if 200 <= status < 300:
                    try:
                        body = resp.json()
                    except ValueError as exc:
                        raise MalformedResponseError(f"{url}: response is not JSON") from exc
                    if not isinstance(body, dict):
                        raise MalformedResponseError(f"{url}: expected a JSON object")
                    return body
                if status in (401, 403):
                    raise AuthError(f"{url}: HTTP {status}")
                if status == 429:
                    raise RateLimitError(f"{url}: HTTP 429")
                if 400 <= status < 500:
                    raise BadRequestError(f"{url}: HTTP {status}: {resp.text[:200]}")
                last_error = ServerError(f"{url}: HTTP {status}")
            if attempt < self.cfg.max_retries:
                time.sleep(delay)
                delay *= self.cfg.backoff_multiplier
        assert last_error is not None
        raise last_error


class HttpChatClient(_HttpBase):
    """Chat-completion client for generation, rewriting, classification, judging."""

    def chat(self, messages: list[Message], decoding: Any | None = None) -> str:
        payload: dict = {"model": self.cfg.model, "messages": messages}
        if decoding is not None:
            payload["max_tokens"] = decoding.max_new_tokens
            if decoding.sampling:
                payload["temperature"] = decoding.temperature
                payload["top_p"] = decoding.top_p
                payload["top_k"] = decoding.top_k
        body = self._post("/chat", payload)
        text = body.get("text")
        if not isinstance(text, str):
            raise MalformedResponseError("chat response missing 'text' string")
        return text


class HttpEmbedClient(_HttpBase):
    """Batch embedding client; vector count must match input count."""

    def __init__(
        self,
        cfg: EndpointConfig,
        dim: int | None = None,
        transport: httpx.BaseTransport | None = None,
    ):
        super().__init__(cfg, transport)
        self.dim = dim

    def embed(self, texts: list[str]) -> list[list[float]]:
        out: list[list[float]] = []
        for start in range(0, len(texts), self.cfg.batch_size):
            batch = texts[start : start + self.cfg.batch_size]
            body = self._post("/embed", {"model": self.cfg.model, "texts": batch})
            vectors = body.get("vectors")
            if not isinstance(vectors, list) or len(vectors) != len(batch):
                raise MalformedResponseError(
                    f"embed response returned {len(vectors) if isinstance(vectors, list) else 'no'} "
                    f"vectors for {len(batch)} texts"
                )
            out.extend([float(x) for x in vec] for vec in vectors)
        return out


class HttpRerankClient(_HttpBase):
    """Cross-encoder scoring client; scores align with the passage list."""

    def rerank_score(self, query: str, passages: list[str]) -> list[float]:
        out: list[float] = []
        for start in range(0, len(passages), self.cfg.batch_size):
            batch = passages[start : start + self.cfg.batch_size]
            body = self._post("/rerank", {"model": self.cfg.model, "query": query, "passages": batch})
            scores = body.get("scores")
            if not isinstance(scores, list) or len(scores) != len(batch):
                raise MalformedResponseError(
                    f"rerank response returned {len(scores) if isinstance(scores, list) else 'no'} "
                    f"scores for {len(batch)} passages"
                )
            out.extend(float(s) for s in scores)
        return out
