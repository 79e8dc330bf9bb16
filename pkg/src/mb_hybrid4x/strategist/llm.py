"""Chat-completions strategist: tool calling over HTTP+JSON."""

import asyncio
import json
import logging
from collections.abc import Awaitable, Callable
from typing import Any

import httpx

from mb_hybrid4x.bridge.tool_server import ToolRequest
from mb_hybrid4x.codec.tools import ToolSchema, tool_schemas
from mb_hybrid4x.config import LlmSettings
from mb_hybrid4x.core.errors import TransportError
from mb_hybrid4x.strategist.models import EpisodeContext, RoundResult, StrategistReply

logger = logging.getLogger(__name__)

MAX_TRIES = 5
BACKOFF_BASE_SEC = 1.0
BACKOFF_FACTOR = 2.0
NUDGE = "Respond only with tool calls. Finish with set-strategy or keep-status-quo."

type Sleep = Callable[[float], Awaitable[None]]
type Message = dict[str, Any]


def _retryable(status: int) -> bool:
    return status == httpx.codes.TOO_MANY_REQUESTS or status >= httpx.codes.INTERNAL_SERVER_ERROR


def openai_tools(schemas: list[ToolSchema]) -> list[dict[str, Any]]:
    """Tool descriptors in the chat-completions `tools` format."""
    return [
        {"type": "function", "function": {"name": s.name, "description": s.description, "parameters": s.parameters}}
        for s in schemas
    ]


class LlmClient:
    """POSTs to `{base_url}/chat/completions`, retrying 429, 5xx and transport failures with exponential backoff."""

    def __init__(
        self,
        settings: LlmSettings,
        *,
        transport: httpx.AsyncBaseTransport | None = None,
        sleep: Sleep = asyncio.sleep,
        max_tries: int = MAX_TRIES,
    ) -> None:
        """Create the HTTP client. `transport` and `sleep` are replaceable for offline runs."""
        headers = {"Content-Type": "application/json"}
        if settings.api_key:
            headers["Authorization"] = f"Bearer {settings.api_key}"
        self.model = settings.model
        self.max_tries = max_tries
        self._sleep = sleep
        self._http = httpx.AsyncClient(
            base_url=settings.base_url.rstrip("/"),
            headers=headers,
            timeout=settings.timeout_sec,
            transport=transport,
        )

    async def complete(self, messages: list[Message], tools: list[dict[str, Any]]) -> dict[str, Any]:
        """Send one chat completion request and return the decoded body.

        Args:
            messages: Conversation so far.
            tools: Tool descriptors in chat-completions form; omitted from the payload when empty.

        Returns:
            The response JSON object.

        Raises:
            TransportError: On a non-retryable status, a non-JSON body, or when every try failed.

        """
        payload: dict[str, Any] = {"model": self.model, "messages": messages}
        if tools:
            payload["tools"] = tools
        delay = BACKOFF_BASE_SEC
        problem = ""
        for attempt in range(1, self.max_tries + 1):
            try:
                response = await self._http.post("/chat/completions", json=payload)
            except httpx.TransportError as e:
                problem = f"{type(e).__name__}: {e}"
            else:
                if response.is_success:
                    try:
                        body = response.json()
                    except ValueError as e:
                        raise TransportError("Completion body is not JSON.") from e
                    if not isinstance(body, dict):
                        raise TransportError("Completion body is not an object.")
                    return body
                if not _retryable(response.status_code):
                    raise TransportError(f"Completion request rejected with HTTP {response.status_code}.")
                problem = f"HTTP {response.status_code}"
            if attempt < self.max_tries:
                logger.warning("LLM request failed attempt=%d/%d retry_in=%.1fs: %s", attempt, self.max_tries, delay, problem)
                await self._sleep(delay)
                delay *= BACKOFF_FACTOR
        raise TransportError(f"Completion request failed after {self.max_tries} tries: {problem}.")

    async def aclose(self) -> None:
        """Close the underlying HTTP client."""
        await self._http.aclose()


def _arguments(raw: object) -> dict[str, Any]:
    if isinstance(raw, dict):
        return raw
    try:
        parsed = json.loads(raw) if isinstance(raw, str) else None
    except json.JSONDecodeError:
        parsed = None
    # Kept under a key no tool accepts, so the tool server answers with a schema error.
    return parsed if isinstance(parsed, dict) else {"_malformed": raw}


def parse_completion(body: dict[str, Any]) -> tuple[Message, list[ToolRequest]]:
    """Assistant message and tool calls of a completion, in either the parallel or the legacy single form.

    Raises:
        TransportError: If the body has no assistant message.

    """
    try:
        message = body["choices"][0]["message"]
    except (KeyError, IndexError, TypeError) as e:
        raise TransportError("Completion has no assistant message.") from e
    if not isinstance(message, dict):
        raise TransportError("Completion has no assistant message.")
    calls: list[ToolRequest] = []
    for i, call in enumerate(message.get("tool_calls") or []):
        function = call.get("function") or {}
        calls.append(
            ToolRequest(
                name=str(function.get("name", "")),
                arguments=_arguments(function.get("arguments")),
                call_id=str(call.get("id") or f"call_{i}"),
            )
        )
    if not calls and isinstance(legacy := message.get("function_call"), dict):
        calls.append(ToolRequest(name=str(legacy.get("name", "")), arguments=_arguments(legacy.get("arguments"))))
    return message, calls


def _usage(body: dict[str, Any], key: str) -> int | None:
    usage = body.get("usage")
    value = usage.get(key) if isinstance(usage, dict) else None
    return value if isinstance(value, int) and value >= 0 else None


def _tool_message(result: RoundResult) -> Message:
    content = result.response.model_dump_json(exclude_none=True)
    if result.request.call_id is None:
        return {"role": "function", "name": result.request.name, "content": content}
    return {"role": "tool", "tool_call_id": result.request.call_id, "content": content}


class LlmStrategist:
    """Runs episodes as one chat: system prompt, the state document, then tool results round by round."""

    def __init__(self, client: LlmClient, name: str = "llm") -> None:
        """Talk through the given client."""
        self.client = client
        self.name = name
        self._episode: str | None = None
        self._messages: list[Message] = []

    async def decide(self, ctx: EpisodeContext, previous: list[RoundResult]) -> StrategistReply:
        """Send the conversation so far and turn the reply into tool requests."""
        if ctx.episode_id != self._episode:
            self._episode = ctx.episode_id
            self._messages = [
                {"role": "system", "content": ctx.system_prompt},
                {"role": "user", "content": ctx.doc.text},
            ]
            sent = list(self._messages)
        else:
            sent = [_tool_message(r) for r in previous] or [{"role": "user", "content": NUDGE}]
            self._messages.extend(sent)

        session = ctx.host.episodes.get(ctx.player)
        schemas = session.list_tools() if session is not None else list(tool_schemas())
        body = await self.client.complete(self._messages, openai_tools(schemas))
        message, calls = parse_completion(body)
        self._messages.append({k: v for k, v in message.items() if v is not None})
        return StrategistReply(
            calls=calls,
            input_tokens=_usage(body, "prompt_tokens"),
            output_tokens=_usage(body, "completion_tokens"),
            exchange={"episode_id": ctx.episode_id, "sent": sent, "received": message, "usage": body.get("usage")},
        )
