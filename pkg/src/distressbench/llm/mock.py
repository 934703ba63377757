"""Rule-based stand-in for a chat-completion endpoint.

The reply depends only on the target company's risk flags, so it is a pure
function of the prompt and emits a handful of discrete probabilities.
"""

from __future__ import annotations

import asyncio
import re
from collections import defaultdict
from dataclasses import dataclass, field

from fastapi import FastAPI, HTTPException, Request
from pydantic import BaseModel

from .prompt import TARGET_HEADER

_FLAG = re.compile(r"(Insolvency_flag|Loss_flag)=(-?\d+(?:\.\d+)?)")


class ChatMessage(BaseModel):
    role: str
    content: str


class ChatRequest(BaseModel):
    model: str
    messages: list[ChatMessage]
    temperature: float = 0.0


class Choice(BaseModel):
    index: int = 0
    message: ChatMessage
    finish_reason: str = "stop"


class ChatResponse(BaseModel):
    id: str = "mock"
    object: str = "chat.completion"
    model: str
    choices: list[Choice]


def mock_reply(prompt: str) -> str:
    """``1,0.9`` insolvent with a loss, ``1,0.7`` insolvent, ``0,0.2`` loss only, else ``0,0.1``."""
    target = prompt.rsplit(TARGET_HEADER, 1)[-1]
    flags = {name: float(v) for name, v in _FLAG.findall(target)}
    insolvent = flags.get("Insolvency_flag", 0.0) >= 0.5
    loss = flags.get("Loss_flag", 0.0) >= 0.5
    if insolvent:
        return "1,0.9" if loss else "1,0.7"
    return "0,0.2" if loss else "0,0.1"


@dataclass
class MockState:
    """Instrumentation plus optional failure injection."""

    in_flight: int = 0
    peak: int = 0
    requests: int = 0
    delay: float = 0.0
    fail_first: int = 0  # transient 503s per distinct prompt before answering
    fixed_reply: str | None = None
    failures: dict = field(default_factory=lambda: defaultdict(int))


def create_mock_app(state: MockState | None = None) -> FastAPI:
    state = state or MockState()
    app = FastAPI(title="distressbench mock chat endpoint")
    app.state.mock = state

    @app.post("/v1/chat/completions", response_model=ChatResponse)
    async def chat(req: ChatRequest, request: Request) -> ChatResponse:
        if not request.headers.get("authorization", "").startswith("Bearer "):
            raise HTTPException(status_code=401, detail="missing bearer token")
        state.requests += 1
        state.in_flight += 1
        state.peak = max(state.peak, state.in_flight)
        try:
            await asyncio.sleep(state.delay)
            prompt = req.messages[-1].content
            if state.failures[prompt] < state.fail_first:
                state.failures[prompt] += 1
                raise HTTPException(status_code=503, detail="transient failure")
            reply = state.fixed_reply if state.fixed_reply is not None else mock_reply(prompt)
            return ChatResponse(model=req.model, choices=[Choice(message=ChatMessage(role="assistant", content=reply))])
        finally:
            state.in_flight -= 1

    return app
