"""HTTP clients for the chat-completion and TTS endpoints.

Every request is content-addressed by a stable digest; responses are
persisted under ``cache/llm/<digest>.json`` and ``cache/tts/<digest>.wav``.
In replay mode the store is the only source, which keeps the whole pipeline
reproducible and testable offline. Live calls are rate limited by a bounded
in-flight semaphore and retried with exponential backoff on transient
failures.
"""
from __future__ import annotations

import hashlib
import io
import json
import logging
import os
import threading
import time
import wave
from dataclasses import dataclass, field
from pathlib import Path

import requests as _requests

logger = logging.getLogger(__name__)

TRANSIENT_STATUS = frozenset([429, 500, 502, 503, 504])


class GatewayError(RuntimeError):
    """Base class for gateway failures."""


class ReplayMissError(GatewayError):
    """Request digest not present in the replay store."""


class RetriesExhaustedError(GatewayError):
    """Live request kept failing after all retries."""


class AuthError(GatewayError):
    """Endpoint rejected the credentials."""


def _digest(payload: dict) -> str:
    canonical = json.dumps(
        payload, sort_keys=True, ensure_ascii=False, separators=(",", ":")
    )
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class LlmRequest:
    """One chat-completion call; run_index keeps repeated runs distinct."""

    model_id: str
    prompt: str
    params: dict = field(default_factory=dict, hash=False)
    run_index: int = 0

    @property
    def digest(self) -> str:
        return _digest({
            "kind": "llm",
            "model_id": self.model_id,
            "prompt": self.prompt,
            "params": self.params,
            "run_index": self.run_index,
        })


@dataclass(frozen=True)
class TtsRequest:
    """One synthesis call. There is deliberately no language field: the
    provider infers the language from the text's script."""

    text: str
    speaker_prompt: tuple[str, ...] = ()
    params: dict = field(default_factory=dict, hash=False)

    @property
    def digest(self) -> str:
        return _digest({
            "kind": "tts",
            "text": self.text,
            "speaker_prompt": list(self.speaker_prompt),
            "params": self.params,
        })


@dataclass
class LlmEndpoint:
    """Adapter config for a chat/completion HTTP endpoint."""

    url: str
    api_key: str | None = None
    auth_header: str = "Authorization"
    auth_prefix: str = "Bearer "
    payload_style: str = "chat"  # "chat" or "prompt"
    model_field: str = "model"
    prompt_field: str = "prompt"
    response_path: tuple = ("choices", 0, "message", "content")
    extra_headers: dict = field(default_factory=dict)


@dataclass
class TtsEndpoint:
    """Adapter config for a TTS HTTP endpoint returning audio bytes."""

    url: str
    api_key: str | None = None
    auth_header: str = "xi-api-key"
    auth_prefix: str = ""
    text_field: str = "text"
    speaker_field: str = "speaker_prompt"
    extra_headers: dict = field(default_factory=dict)


@dataclass
class TtsResult:
    audio: bytes
    path: Path
    metadata: dict


def _dig(obj, path):
    for step in path:
        obj = obj[step]
    return obj


def wav_metadata(audio: bytes) -> dict:
    """Duration and sample rate from a WAV payload; empty if unparseable."""
    try:
        with wave.open(io.BytesIO(audio)) as wav:
            frames = wav.getnframes()
            rate = wav.getframerate()
            return {
                "sample_rate": rate,
                "channels": wav.getnchannels(),
                "duration_s": frames / rate if rate else None,
            }
    except (wave.Error, EOFError):
        return {}


class Gateway:
    """Thread-safe handle over the LLM and TTS backends with a shared
    content-addressed cache.

    mode "replay" serves exclusively from the cache; mode "live" fills cache
    misses over HTTP.
    """

    def __init__(
        self,
        cache_dir: str | Path,
        llm: LlmEndpoint | None = None,
        tts: TtsEndpoint | None = None,
        mode: str = "replay",
        max_in_flight: int = 4,
        max_retries: int = 3,
        backoff_s: float = 0.2,
        timeout_s: float = 60.0,
    ):
        if mode not in ("replay", "live"):
            raise ValueError(f"mode must be replay or live, got {mode!r}")
        self.cache_dir = Path(cache_dir)
        self.llm = llm
        self.tts = tts
        self.mode = mode
        self.max_retries = max_retries
        self.backoff_s = backoff_s
        self.timeout_s = timeout_s
        self._inflight = threading.BoundedSemaphore(max_in_flight)
        self._stats_lock = threading.Lock()
        self._digest_locks: dict[str, threading.Lock] = {}
        self._digest_locks_guard = threading.Lock()
        self._session = _requests.Session()
        self.network_calls = 0
        self.cache_hits = 0

    # -- cache plumbing ----------------------------------------------------

    def _llm_path(self, digest: str) -> Path:
        return self.cache_dir / "llm" / f"{digest}.json"

    def _tts_path(self, digest: str) -> Path:
        return self.cache_dir / "tts" / f"{digest}.wav"

    def _lock_for(self, digest: str) -> threading.Lock:
        with self._digest_locks_guard:
            return self._digest_locks.setdefault(digest, threading.Lock())

    def _count(self, attr: str) -> None:
        with self._stats_lock:
            setattr(self, attr, getattr(self, attr) + 1)

    @staticmethod
    def _write_atomic(path: Path, data: bytes) -> None:
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_suffix(path.suffix + ".tmp")
        tmp.write_bytes(data)
        os.replace(tmp, path)

    def seed_llm(self, req: LlmRequest, response_text: str) -> str:
        """Prime the replay store with a known response. Returns the digest."""
        record = {
            "digest": req.digest,
            "model_id": req.model_id,
            "prompt": req.prompt,
            "params": req.params,
            "run_index": req.run_index,
            "response": response_text,
        }
        self._write_atomic(
            self._llm_path(req.digest),
            json.dumps(record, ensure_ascii=False, indent=2).encode("utf-8"),
        )
        return req.digest

    def seed_tts(self, req: TtsRequest, audio: bytes,
                 metadata: dict | None = None) -> str:
        path = self._tts_path(req.digest)
        self._write_atomic(path, audio)
        meta = {"digest": req.digest, "provider": "seeded",
                "bytes": len(audio), **wav_metadata(audio),
                **(metadata or {})}
        self._write_atomic(
            path.with_suffix(".json"),
            json.dumps(meta, ensure_ascii=False, indent=2).encode("utf-8"),
        )
        return req.digest

    # -- HTTP with retries -------------------------------------------------

    def _post(self, url: str, headers: dict, payload: dict) -> _requests.Response:
        last_error: Exception | None = None
        for attempt in range(self.max_retries + 1):
            try:
                with self._inflight:
                    self._count("network_calls")
                    resp = self._session.post(
                        url, json=payload, headers=headers,
                        timeout=self.timeout_s,
                    )
                if resp.status_code in (401, 403):
                    raise AuthError(
                        f"authentication failed ({resp.status_code}) at {url}"
                    )
                if resp.status_code in TRANSIENT_STATUS:
                    last_error = GatewayError(
                        f"transient status {resp.status_code} from {url}"
                    )
                else:
                    resp.raise_for_status()
                    return resp
            except (_requests.ConnectionError, _requests.Timeout) as exc:
                last_error = exc
            if attempt < self.max_retries:
                delay = self.backoff_s * (2 ** attempt)
                logger.warning("retrying %s in %.2fs: %s", url, delay, last_error)
                time.sleep(delay)
        raise RetriesExhaustedError(
            f"gave up on {url} after {self.max_retries + 1} attempts: "
            f"{last_error}"
        )

    @staticmethod
    def _headers(endpoint) -> dict:
        headers = dict(endpoint.extra_headers)
        if endpoint.api_key:
            headers[endpoint.auth_header] = endpoint.auth_prefix + endpoint.api_key
        return headers

    # -- public operations ---------------------------------------------------

    def llm_complete(self, req: LlmRequest) -> str:
        """Response body text for the request, from cache when possible."""
        path = self._llm_path(req.digest)
        if path.exists():
            self._count("cache_hits")
            return json.loads(path.read_text(encoding="utf-8"))["response"]
        if self.mode == "replay":
            raise ReplayMissError(
                f"no cached response for digest {req.digest} "
                f"(model {req.model_id}, run {req.run_index})"
            )
        if self.llm is None:
            raise GatewayError("no LLM endpoint configured")
        with self._lock_for(req.digest):
            if path.exists():
                self._count("cache_hits")
                return json.loads(path.read_text(encoding="utf-8"))["response"]
            payload = {self.llm.model_field: req.model_id, **req.params}
            if self.llm.payload_style == "chat":
                payload["messages"] = [{"role": "user", "content": req.prompt}]
            else:
                payload[self.llm.prompt_field] = req.prompt
            resp = self._post(self.llm.url, self._headers(self.llm), payload)
            try:
                body = _dig(resp.json(), self.llm.response_path)
            except (ValueError, KeyError, IndexError, TypeError) as exc:
                raise GatewayError(
                    f"cannot extract response text via {self.llm.response_path}: "
                    f"{exc}"
                ) from exc
            if not isinstance(body, str):
                raise GatewayError(
                    f"response text is {type(body).__name__}, expected str"
                )
            self.seed_llm(req, body)
            return body

    def tts_synthesize(self, req: TtsRequest) -> TtsResult:
        """Audio bytes plus metadata; persisted content-addressed."""
        if not req.text.strip():
            raise ValueError("empty text for synthesis")
        path = self._tts_path(req.digest)
        meta_path = path.with_suffix(".json")
        if path.exists():
            self._count("cache_hits")
            audio = path.read_bytes()
            metadata = (
                json.loads(meta_path.read_text(encoding="utf-8"))
                if meta_path.exists() else wav_metadata(audio)
            )
            return TtsResult(audio=audio, path=path, metadata=metadata)
        if self.mode == "replay":
            raise ReplayMissError(f"no cached audio for digest {req.digest}")
        if self.tts is None:
            raise GatewayError("no TTS endpoint configured")
        with self._lock_for(req.digest):
            if path.exists():
                return self.tts_synthesize(req)
            payload = {
                self.tts.text_field: req.text,
                self.tts.speaker_field: list(req.speaker_prompt),
                **req.params,
            }
            resp = self._post(self.tts.url, self._headers(self.tts), payload)
            audio = resp.content
            if not audio:
                raise GatewayError("provider returned empty audio")
            metadata = {
                "digest": req.digest,
                "provider": self.tts.url,
                "bytes": len(audio),
                **wav_metadata(audio),
            }
            self._write_atomic(path, audio)
            self._write_atomic(
                meta_path,
                json.dumps(metadata, ensure_ascii=False, indent=2).encode("utf-8"),
            )
            return TtsResult(audio=audio, path=path, metadata=metadata)


def llm_endpoint_from_config(cfg: dict) -> LlmEndpoint:
    """Build an endpoint from a config mapping, honoring env overrides."""
    url = os.environ.get("LLM_BASE_URL", cfg.get("url", ""))
    api_key = os.environ.get("LLM_API_KEY", cfg.get("api_key"))
    return LlmEndpoint(
        url=url,
        api_key=api_key,
        auth_header=cfg.get("auth_header", "Authorization"),
        auth_prefix=cfg.get("auth_prefix", "Bearer "),
        payload_style=cfg.get("payload_style", "chat"),
        model_field=cfg.get("model_field", "model"),
        prompt_field=cfg.get("prompt_field", "prompt"),
        response_path=tuple(cfg.get(
            "response_path", ("choices", 0, "message", "content"))),
        extra_headers=dict(cfg.get("extra_headers", {})),
    )


def tts_endpoint_from_config(cfg: dict) -> TtsEndpoint:
    url = os.environ.get("TTS_BASE_URL", cfg.get("url", ""))
    api_key = os.environ.get("TTS_API_KEY", cfg.get("api_key"))
    return TtsEndpoint(
        url=url,
        api_key=api_key,
        auth_header=cfg.get("auth_header", "xi-api-key"),
        auth_prefix=cfg.get("auth_prefix", ""),
        text_field=cfg.get("text_field", "text"),
        speaker_field=cfg.get("speaker_field", "speaker_prompt"),
        extra_headers=dict(cfg.get("extra_headers", {})),
    )
