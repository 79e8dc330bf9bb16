"""Framed stream server around a hosted game.

One client at a time per game. Requests are answered strictly in order; after each `advance` the
server also pushes an event frame with the round's events. Bad frames get an error response and
the connection stays up, except for oversized or truncated frames, which end the connection.
"""

import asyncio
import logging
from collections.abc import Callable
from typing import Any

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from mb_hybrid4x.bridge.frames import Frame, FrameKind, decode_payload, read_frame, write_frame
from mb_hybrid4x.bridge.host import GameHost
from mb_hybrid4x.bridge.tool_server import ToolRequest
from mb_hybrid4x.core.errors import (
    FrameTooLargeError,
    GameError,
    MalformedFrameError,
    SchemaError,
    TransportError,
    UnknownToolError,
)

logger = logging.getLogger(__name__)


class _PlayerArgs(BaseModel):
    model_config = ConfigDict(extra="forbid")

    player: int


class _EventArgs(BaseModel):
    model_config = ConfigDict(extra="forbid")

    since: int | None = None
    player: int | None = None


class _CallArgs(BaseModel):
    model_config = ConfigDict(extra="forbid")

    player: int
    name: str
    arguments: dict[str, Any] = Field(default_factory=dict)


def _args[M: BaseModel](model: type[M], frame: Frame) -> M:
    try:
        return model.model_validate(frame.args)
    except ValidationError as e:
        where = ".".join(str(p) for p in e.errors()[0]["loc"]) or "args"
        raise SchemaError(f"Invalid arguments for {frame.op}: {where}: {e.errors()[0]['msg']}.", field=where) from e


def _error(request_id: int, error: GameError) -> Frame:
    return Frame(
        kind=FrameKind.RESPONSE,
        id=request_id,
        ok=False,
        error={"code": error.code, "message": error.message, "field": error.field},
    )


class FrameHandler:
    """Answers decoded frames for one hosted game. Pure dispatch, no I/O."""

    def __init__(self, host: GameHost) -> None:
        """Serve the given game."""
        self.host = host
        self._ops: dict[str, Callable[[Frame], Any]] = {
            "get_turn": self._get_turn,
            "get_state": self._get_state,
            "get_catalog": self._get_catalog,
            "get_events": self._get_events,
            "list_tools": self._list_tools,
            "call_tool": self._call_tool,
            "advance": self._advance,
        }
        self.pending_events: list[Frame] = []

    def respond(self, payload: bytes, seen_ids: set[int] | None = None) -> Frame:
        """Response frame for a raw frame body. Never raises.

        With `seen_ids`, the ids already used on a connection, a repeated request id is MALFORMED.
        """
        try:
            frame = decode_payload(payload)
        except MalformedFrameError as e:
            logger.warning("Malformed frame: %s", e.message)
            return _error(0, e)
        if seen_ids is not None:
            if frame.id in seen_ids:
                logger.warning("Duplicate request id=%d op=%s", frame.id, frame.op)
                return _error(frame.id, MalformedFrameError(f"Request id {frame.id} was already used.", field="id"))
            seen_ids.add(frame.id)
        return self.dispatch(frame)

    def dispatch(self, frame: Frame) -> Frame:
        """Run one request frame."""
        try:
            if frame.kind != FrameKind.REQUEST:
                raise MalformedFrameError(f"Expected a request frame, got {frame.kind}.", field="kind")
            operation = self._ops.get(frame.op or "")
            if operation is None:
                raise UnknownToolError(f"Unknown operation: {frame.op}.", field=frame.op)
            return Frame(kind=FrameKind.RESPONSE, id=frame.id, ok=True, result=operation(frame))
        except GameError as e:
            return _error(frame.id, e)
        except Exception as e:
            logger.exception("Frame handler failed op=%s", frame.op)
            return _error(frame.id, TransportError(f"Internal error: {type(e).__name__}.", field=frame.op))

    def _get_turn(self, _frame: Frame) -> dict[str, Any]:
        state = self.host.state
        return {"turn": state.turn, "terminal": state.is_terminal}

    def _get_state(self, frame: Frame) -> dict[str, Any]:
        doc = self.host.state_doc(_args(_PlayerArgs, frame).player)
        return {"turn": doc.turn, "text": doc.text}

    def _get_catalog(self, frame: Frame) -> dict[str, Any]:
        return self.host.catalog(_args(_PlayerArgs, frame).player).model_dump(mode="json")

    def _get_events(self, frame: Frame) -> list[dict[str, Any]]:
        args = _args(_EventArgs, frame)
        return [e.model_dump(mode="json") for e in self.host.events(args.since, args.player)]

    def _list_tools(self, frame: Frame) -> list[dict[str, Any]]:
        tools = self.host.tools(_args(_PlayerArgs, frame).player)
        return [t.model_dump(mode="json") for t in tools]

    def _call_tool(self, frame: Frame) -> dict[str, Any]:
        args = _args(_CallArgs, frame)
        response = self.host.call_tool(args.player, ToolRequest(name=args.name, arguments=args.arguments))
        return response.model_dump(mode="json")

    def _advance(self, _frame: Frame) -> dict[str, Any]:
        events = self.host.advance()
        self.pending_events.append(
            Frame(
                kind=FrameKind.EVENT,
                id=0,
                op="turn",
                result={"turn": self.host.state.turn, "events": [e.model_dump(mode="json") for e in events]},
            )
        )
        return {"turn": self.host.state.turn, "terminal": self.host.state.is_terminal, "events": len(events)}


class StreamServer:
    """Accepts framed connections for one game, one client at a time."""

    def __init__(self, host: GameHost) -> None:
        """Serve the given game."""
        self.handler = FrameHandler(host)
        self._busy = False

    async def handle_connection(self, reader: asyncio.StreamReader, writer: asyncio.StreamWriter) -> None:
        """Serve one client until it disconnects or sends an unrecoverable frame."""
        peer = writer.get_extra_info("peername")
        if self._busy:
            logger.info("Stream client refused peer=%s reason=busy", peer)
            await write_frame(writer, _error(0, TransportError("Another client is connected to this game.")))
            writer.close()
            return
        self._busy = True
        logger.info("Stream client connected peer=%s", peer)
        seen_ids: set[int] = set()
        try:
            while True:
                try:
                    payload = await read_frame(reader)
                except (MalformedFrameError, FrameTooLargeError) as e:
                    logger.warning("Closing stream peer=%s code=%s", peer, e.code)
                    await write_frame(writer, _error(0, e))
                    break
                if payload is None:
                    break
                await write_frame(writer, self.handler.respond(payload, seen_ids))
                for event in self.handler.pending_events:
                    await write_frame(writer, event)
                self.handler.pending_events.clear()
        except ConnectionError:
            logger.info("Stream client dropped peer=%s", peer)
        finally:
            self._busy = False
            writer.close()
            logger.info("Stream client disconnected peer=%s", peer)


async def serve_stream(host: GameHost, bind: str, port: int, started: asyncio.Event | None = None) -> None:
    """Run the frame server until cancelled. `started` is set once the socket listens."""
    server = StreamServer(host)
    listener = await asyncio.start_server(server.handle_connection, bind, port)
    logger.info("Stream server listening bind=%s port=%d", bind, port)
    if started is not None:
        started.set()
    async with listener:
        await listener.serve_forever()
