"""Offline chat-completions endpoint that plays back recorded assistant replies."""

import functools
import json
from importlib.resources import files
from typing import Any

import httpx
from pydantic import BaseModel

from mb_hybrid4x.codec.tokens import estimate_tokens

DEFAULT_TRANSCRIPT = "default.json"


class _Transcript(BaseModel):
    version: int
    description: str = ""
    replies: list[dict[str, Any]]


@functools.cache
def load_transcript(name: str = DEFAULT_TRANSCRIPT) -> tuple[dict[str, Any], ...]:
    """Assistant replies of a bundled transcript fixture."""
    raw = files("mb_hybrid4x.data").joinpath("transcripts", name).read_text(encoding="utf-8")
    return tuple(_Transcript.model_validate_json(raw).replies)


def tool_call_reply(*calls: tuple[str, dict[str, Any] | str], content: str | None = None) -> dict[str, Any]:
    """Assistant message with parallel tool calls. String arguments are sent as-is, so they may be malformed JSON."""
    return {
        "role": "assistant",
        "content": content,
        "tool_calls": [
            {
                "id": f"call_{i}",
                "type": "function",
                "function": {"name": name, "arguments": args if isinstance(args, str) else json.dumps(args)},
            }
            for i, (name, args) in enumerate(calls)
        ],
    }


def function_call_reply(name: str, arguments: dict[str, Any]) -> dict[str, Any]:
    """Assistant message in the legacy single `function_call` form."""
    return {"role": "assistant", "content": None, "function_call": {"name": name, "arguments": json.dumps(arguments)}}


class MockChatEndpoint:
    """Answers `/chat/completions` with the next reply in order, cycling at the end.

    The first `fail_times` requests get `fail_status` instead. Every request body is kept in `requests`.
    """

    def __init__(self, replies: list[dict[str, Any]] | None = None, *, fail_times: int = 0, fail_status: int = 503) -> None:
        """Play back `replies`, or the bundled default transcript."""
        self.replies = list(replies) if replies is not None else list(load_transcript())
        self.fail_times = fail_times
        self.fail_status = fail_status
        self.requests: list[dict[str, Any]] = []
        self._served = 0

    @property
    def transport(self) -> httpx.MockTransport:
        """Transport to hand to `LlmClient`."""
        return httpx.MockTransport(self.handle)

    def handle(self, request: httpx.Request) -> httpx.Response:
        """Answer one HTTP request."""
        if request.method != "POST" or not request.url.path.endswith("/chat/completions"):
            return httpx.Response(404, json={"error": {"message": f"No route {request.url.path}"}})
        body = json.loads(request.content)
        self.requests.append(body)
        if len(self.requests) <= self.fail_times:
            return httpx.Response(self.fail_status, json={"error": {"message": "injected failure"}})

        reply = self.replies[self._served % len(self.replies)]
        self._served += 1
        prompt = estimate_tokens(json.dumps(body.get("messages", []), ensure_ascii=False)).input_tokens
        completion = estimate_tokens(json.dumps(reply, ensure_ascii=False)).input_tokens
        return httpx.Response(
            200,
            json={
                "id": f"mock-{self._served}",
                "object": "chat.completion",
                "model": body.get("model", "mock-model"),
                "choices": [{"index": 0, "message": reply, "finish_reason": "tool_calls"}],
                "usage": {"prompt_tokens": prompt, "completion_tokens": completion, "total_tokens": prompt + completion},
            },
        )
