"""Provider-agnostic chat-completion gateway.

Talks the OpenAI-compatible chat-completions wire format over HTTP in live
mode, and supports record/replay against a content-addressed fixture store so
every downstream test and evaluation can run offline and deterministically.

Configuration comes from the environment:

* ``NOTEELINE_LLM_BASE_URL`` / ``NOTEELINE_LLM_API_KEY`` - endpoint + credential
* ``NOTEELINE_LLM_MODE`` - ``live`` | ``record`` | ``replay`` (default replay)
"""

from __future__ import annotations

import hashlib
import json
import os
import threading
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import httpx

ENV_BASE_URL = "NOTEELINE_LLM_BASE_URL"
ENV_API_KEY = "NOTEELINE_LLM_API_KEY"
ENV_MODE = "NOTEELINE_LLM_MODE"

MODES = ("live", "record", "replay")

DEFAULT_MODEL_ID = "gpt-4-turbo"
DEFAULT_TEMPERATURE = 0.5
DEFAULT_SEED = 1

# case-insensitive; "starts:" anchors at the beginning, "contains:" anywhere
DEFAULT_REFUSAL_PATTERNS = (
    "starts:please provide",
    "starts:i cannot",
    "starts:i'm sorry",
    "contains:provide the transcript",
)

RETRY_BACKOFF_SECONDS = (1.0, 2.0)


class GatewayError(RuntimeError):
    """Base for completion failures; always carries the prompt fingerprint."""

    code = "GATEWAY"

    def __init__(self, detail: str, fingerprint: str = "") -> None:
        super().__init__(detail)
        self.detail = detail
        self.fingerprint = fingerprint


class AuthError(GatewayError):
    code = "AUTH_ERROR"


class RateLimited(GatewayError):
    code = "RATE_LIMITED"

    def __init__(self, detail: str, fingerprint: str = "", retry_after: float = 0.0) -> None:
        super().__init__(detail, fingerprint)
        self.retry_after = retry_after


class Timeout(GatewayError):
    code = "TIMEOUT"


class TransportError(GatewayError):
    code = "TRANSPORT_ERROR"


class FixtureMiss(GatewayError):
    code = "FIXTURE_MISS"

    def __init__(self, fingerprint: str) -> None:
        super().__init__(f"no recorded completion for fingerprint {fingerprint}", fingerprint)


@dataclass(frozen=True)
class GenerationConfig:
    model_id: str = DEFAULT_MODEL_ID
    temperature: float = DEFAULT_TEMPERATURE
    seed: int = DEFAULT_SEED
    max_output_tokens: int = 1024
    timeout: float = 30.0

    def __post_init__(self) -> None:
        if not (0.0 <= self.temperature <= 2.0):
            raise ValueError(f"temperature {self.temperature} outside [0, 2]")
        if self.max_output_tokens <= 0:
            raise ValueError("max_output_tokens must be positive")


def fingerprint(system: str, user: str, cfg: GenerationConfig) -> str:
    """SHA-256 over the exact prompt content and generation settings."""
    payload = json.dumps(
        {
            "system": system,
            "user": user,
            "model_id": cfg.model_id,
            "temperature": cfg.temperature,
            "seed": cfg.seed,
            "max_output_tokens": cfg.max_output_tokens,
            "timeout": cfg.timeout,
        },
        sort_keys=True,
        ensure_ascii=False,
    )
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class PromptBundle:
    system: str
    user: str
    fingerprint: str

    @classmethod
    def build(cls, system: str, user: str, cfg: GenerationConfig) -> "PromptBundle":
        if not user.strip():
            raise ValueError("user message must be non-empty")
        return cls(system=system, user=user, fingerprint=fingerprint(system, user, cfg))


@dataclass(frozen=True)
class CompletionResult:
    text: str
    latency: float
    model_id: str
    finish_reason: str


def detect_refusal(text: str, patterns=DEFAULT_REFUSAL_PATTERNS) -> bool:
    """True when the model asked for more input instead of producing a note
    (or returned nothing). Heuristic patterns, configurable per deployment."""
    lowered = text.strip().lower()
    if not lowered:
        return True
    for pattern in patterns:
        kind, _, needle = pattern.partition(":")
        if kind == "starts" and lowered.startswith(needle):
            return True
        if kind == "contains" and needle in lowered:
            return True
    return False


class FixtureStore:
    """Content-addressed map fingerprint -> recorded completion text, persisted
    as one JSON document. Access is internally serialized."""

    def __init__(self, path: Path) -> None:
        self.path = Path(path)
        self._lock = threading.Lock()
        self._fixtures: dict[str, str] = {}
        if self.path.exists():
            doc = json.loads(self.path.read_text("utf-8"))
            self._fixtures = dict(doc.get("fixtures", {}))

    def get(self, key: str) -> Optional[str]:
        with self._lock:
            return self._fixtures.get(key)

    def put(self, key: str, text: str) -> None:
        with self._lock:
            if self._fixtures.get(key) == text:
                return
            self._fixtures[key] = text
            self._flush()

    def _flush(self) -> None:
        self.path.parent.mkdir(parents=True, exist_ok=True)
        doc = {"schema_version": 1, "fixtures": dict(sorted(self._fixtures.items()))}
        tmp = self.path.with_suffix(".tmp")
        tmp.write_text(json.dumps(doc, ensure_ascii=False, indent=2, sort_keys=True) + "\n", "utf-8")
        os.replace(tmp, self.path)

    def __len__(self) -> int:
        with self._lock:
            return len(self._fixtures)


class Gateway:
    """Chat-completion client with bounded retries and record/replay modes.

    Shareable across threads; at most ``max_concurrency`` live requests are
    in flight at once. ``call_count`` counts complete() calls in any mode,
    which structured-output tests use to assert repair-retry budgets.
    """

    def __init__(
        self,
        mode: Optional[str] = None,
        base_url: Optional[str] = None,
        api_key: Optional[str] = None,
        fixtures: Optional[FixtureStore] = None,
        max_concurrency: int = 4,
        refusal_patterns=DEFAULT_REFUSAL_PATTERNS,
        sleep=time.sleep,
    ) -> None:
        self.mode = mode or os.environ.get(ENV_MODE, "replay")
        if self.mode not in MODES:
            raise ValueError(f"unknown gateway mode {self.mode!r}")
        self.base_url = (base_url or os.environ.get(ENV_BASE_URL, "")).rstrip("/")
        self.api_key = api_key if api_key is not None else os.environ.get(ENV_API_KEY, "")
        self.fixtures = fixtures
        self.refusal_patterns = tuple(refusal_patterns)
        self._semaphore = threading.Semaphore(max_concurrency)
        self._sleep = sleep
        self._count_lock = threading.Lock()
        self.call_count = 0

    @property
    def configured(self) -> bool:
        """Live readiness: endpoint and credential both present."""
        return bool(self.base_url) and bool(self.api_key)

    def detect_refusal(self, text: str) -> bool:
        return detect_refusal(text, self.refusal_patterns)

    def complete(self, bundle: PromptBundle, cfg: GenerationConfig) -> CompletionResult:
        with self._count_lock:
            self.call_count += 1

        if self.mode in ("record", "replay"):
            if self.fixtures is None:
                raise FixtureMiss(bundle.fingerprint)
            recorded = self.fixtures.get(bundle.fingerprint)
            if recorded is not None:
                return CompletionResult(
                    text=recorded, latency=0.0, model_id=cfg.model_id, finish_reason="replay"
                )
            if self.mode == "replay":
                raise FixtureMiss(bundle.fingerprint)

        result = self._complete_live(bundle, cfg)
        if self.mode == "record":
            assert self.fixtures is not None
            self.fixtures.put(bundle.fingerprint, result.text)
        return result

    def _complete_live(self, bundle: PromptBundle, cfg: GenerationConfig) -> CompletionResult:
        # up to 2 retries on RateLimited/Timeout; AuthError never retries
        attempts = len(RETRY_BACKOFF_SECONDS) + 1
        started = time.monotonic()
        last_error: GatewayError = TransportError("no attempt made", bundle.fingerprint)
        for attempt in range(attempts):
            try:
                text, finish_reason = self._request_once(bundle, cfg)
                return CompletionResult(
                    text=text,
                    latency=time.monotonic() - started,
                    model_id=cfg.model_id,
                    finish_reason=finish_reason,
                )
            except (RateLimited, Timeout) as err:
                last_error = err
                if attempt < attempts - 1:
                    self._sleep(RETRY_BACKOFF_SECONDS[attempt])
        raise last_error

    def _request_once(self, bundle: PromptBundle, cfg: GenerationConfig) -> tuple[str, str]:
        if not self.base_url:
            raise TransportError("no endpoint configured", bundle.fingerprint)
        payload = {
            "model": cfg.model_id,
            "messages": [
                {"role": "system", "content": bundle.system},
                {"role": "user", "content": bundle.user},
            ],
            "temperature": cfg.temperature,
            "seed": cfg.seed,
            "max_tokens": cfg.max_output_tokens,
        }
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        with self._semaphore:
            try:
                response = httpx.post(
                    f"{self.base_url}/chat/completions",
                    json=payload,
                    headers=headers,
                    timeout=cfg.timeout,
                )
            except httpx.TimeoutException as err:
                raise Timeout(str(err), bundle.fingerprint) from None
            except httpx.HTTPError as err:
                raise TransportError(str(err), bundle.fingerprint) from None

        if response.status_code in (401, 403):
            raise AuthError(f"HTTP {response.status_code}", bundle.fingerprint)
        if response.status_code == 429:
            retry_after = float(response.headers.get("Retry-After", 0) or 0)
            raise RateLimited("HTTP 429", bundle.fingerprint, retry_after=retry_after)
        if response.status_code >= 400:
            raise TransportError(
                f"HTTP {response.status_code}: {response.text[:300]}", bundle.fingerprint
            )
        try:
            body = response.json()
            choice = body["choices"][0]
            text = choice["message"]["content"] or ""
            finish_reason = choice.get("finish_reason") or "stop"
        except (KeyError, IndexError, TypeError, ValueError) as err:
            raise TransportError(f"malformed completion body: {err}", bundle.fingerprint) from None
        return text, finish_reason
