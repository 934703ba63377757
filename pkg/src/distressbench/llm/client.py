"""Chat-completion client with a hard cap on in-flight requests."""

from __future__ import annotations

import asyncio
import hashlib
import json
import os
import time
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Sequence

import httpx

from ..errors import ConfigError
from .parse import parse_response

TRANSIENT_STATUS = {408, 409, 425, 429, 500, 502, 503, 504}


@dataclass(frozen=True)
class ClientConfig:
    base_url: str
    model: str
    api_key_env: str = "DISTRESSBENCH_API_KEY"
    max_concurrent: int = 8
    timeout: float = 60.0
    retries: int = 3
    backoff_base: float = 0.5
    backoff_max: float = 8.0
    parse_mode: str = "strict"
    temperature: float = 0.0
    token: str | None = None  # overrides the environment (used for the in-process mock)

    def validate(self) -> None:
        if self.max_concurrent < 1:
            raise ConfigError("max_concurrent must be >= 1")
        if self.retries < 0:
            raise ConfigError("retries must be >= 0")

    def api_key(self) -> str:
        key = self.token or os.environ.get(self.api_key_env)
        if not key:
            raise ConfigError(f"environment variable {self.api_key_env} is not set; it must hold the API token")
        return key


@dataclass
class LLMExchange:
    index: int
    prompt_hash: str
    prompt: str
    response: str | None
    ok: bool
    label: int | None
    probability: float | None
    parse_mode: str | None
    error: str | None
    attempts: int
    latency: float

    def record(self, include_prompt: bool = False) -> dict:
        out = asdict(self)
        if not include_prompt:
            out.pop("prompt")
        return out


def prompt_hash(prompt: str) -> str:
    return hashlib.sha256(prompt.encode("utf-8")).hexdigest()


async def _one(client: httpx.AsyncClient, config: ClientConfig, sem: asyncio.Semaphore, index: int, prompt: str):
    payload = {
        "model": config.model,
        "messages": [{"role": "user", "content": prompt}],
        "temperature": config.temperature,
    }
    error = None
    attempts = 0
    start = time.perf_counter()
    text = None
    for attempt in range(config.retries + 1):
        attempts = attempt + 1
        try:
            async with sem:
                resp = await client.post("/chat/completions", json=payload)
            if resp.status_code in TRANSIENT_STATUS:
                error = f"HTTP {resp.status_code}"
            elif resp.status_code >= 400:
                error = f"HTTP {resp.status_code}"
                break
            else:
                text = resp.json()["choices"][0]["message"]["content"]
                error = None
                break
        except (httpx.TransportError, httpx.TimeoutException) as exc:
            error = f"{type(exc).__name__}: {exc}"
        except (KeyError, IndexError, ValueError) as exc:
            error = f"malformed reply: {exc}"
            break
        if attempt < config.retries:
            await asyncio.sleep(min(config.backoff_max, config.backoff_base * 2**attempt))
    latency = time.perf_counter() - start
    if text is None:
        return LLMExchange(index, prompt_hash(prompt), prompt, None, False, None, None, None, error, attempts, latency)
    parsed = parse_response(text, config.parse_mode)
    return LLMExchange(
        index,
        prompt_hash(prompt),
        prompt,
        text,
        parsed.ok,
        parsed.label,
        parsed.probability,
        parsed.mode,
        parsed.error,
        attempts,
        latency,
    )


async def query_endpoint_async(
    config: ClientConfig, prompts: Sequence[str], transport: httpx.AsyncBaseTransport | None = None
) -> list[LLMExchange]:
    """Send every prompt; results come back in input order. Failures are marked, not raised."""
    config.validate()
    headers = {"Authorization": f"Bearer {config.api_key()}"}
    sem = asyncio.Semaphore(config.max_concurrent)
    limits = httpx.Limits(max_connections=config.max_concurrent)
    async with httpx.AsyncClient(
        base_url=config.base_url, headers=headers, timeout=config.timeout, transport=transport, limits=limits
    ) as client:
        tasks = [_one(client, config, sem, i, p) for i, p in enumerate(prompts)]
        return list(await asyncio.gather(*tasks))


def query_endpoint(
    config: ClientConfig, prompts: Sequence[str], transport: httpx.AsyncBaseTransport | None = None
) -> list[LLMExchange]:
    return asyncio.run(query_endpoint_async(config, prompts, transport))


def write_exchanges(path: str | Path, exchanges: Sequence[LLMExchange], include_latency: bool = True) -> None:
    """JSON lines, one exchange per line, in input order."""
    with open(path, "w", encoding="utf-8") as fh:
        for ex in exchanges:
            rec = ex.record()
            if not include_latency:
                rec.pop("latency")
            fh.write(json.dumps(rec, sort_keys=True) + "\n")


def read_exchanges(path: str | Path) -> list[dict]:
    with open(path, encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]
