"""Read-mostly HTTP facade over a hosted game, served with h11.

Routes:
    GET  /state?player=N     the player's Markdown document (text/markdown)
    GET  /catalog?player=N   the player's option catalog
    GET  /events?since=T     events after turn T, optionally `&player=N` for that player's view
    GET  /tools?player=N     tools still available in the player's episode
    POST /tool               {"player": N, "name": ..., "arguments": {...}}
    POST /advance            run one round; only when the server runs in test mode
"""

import asyncio
import json
import logging
from typing import Any
from urllib.parse import parse_qs, urlsplit

import h11
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from mb_hybrid4x.bridge.host import GameHost
from mb_hybrid4x.bridge.tool_server import ToolRequest
from mb_hybrid4x.core.errors import GameError, SchemaError

logger = logging.getLogger(__name__)

_MAX_BODY_BYTES = 1024 * 1024
_READ_CHUNK = 65536
_CONFLICT_CODES = frozenset({"TERMINAL_STATE", "REUSED", "CLOSED"})
_NOT_FOUND_CODES = frozenset({"UNKNOWN_PLAYER"})


def _status(code: str) -> int:
    if code in _NOT_FOUND_CODES:
        return 404
    return 409 if code in _CONFLICT_CODES else 400


class RestResponse(BaseModel):
    """HTTP status, content type and body of one answer."""

    model_config = ConfigDict(frozen=True)

    status: int
    content_type: str = "application/json"
    body: bytes


class _ToolBody(BaseModel):
    model_config = ConfigDict(extra="forbid")

    player: int
    name: str
    arguments: dict[str, Any] = Field(default_factory=dict)


def _json(status: int, data: object) -> RestResponse:
    return RestResponse(status=status, body=json.dumps(data, ensure_ascii=False).encode("utf-8"))


def _error(error: GameError) -> RestResponse:
    return _json(_status(error.code), {"error": {"code": error.code, "message": error.message, "field": error.field}})


def _int_param(query: dict[str, list[str]], name: str, *, required: bool) -> int | None:
    values = query.get(name)
    if not values:
        if required:
            raise SchemaError(f"Query parameter {name!r} is required.", field=name)
        return None
    try:
        return int(values[0])
    except ValueError as e:
        raise SchemaError(f"Query parameter {name!r} must be an integer.", field=name) from e


class RestFacade:
    """Maps HTTP requests onto `GameHost` calls."""

    def __init__(self, host: GameHost, test_mode: bool = False) -> None:
        """Serve the given game; `/advance` exists only in test mode."""
        self.host = host
        self.test_mode = test_mode

    def handle(self, method: str, target: str, body: bytes = b"") -> RestResponse:
        """Answer one request. Never raises for bad input."""
        url = urlsplit(target)
        query = parse_qs(url.query)
        route = (method.upper(), url.path.rstrip("/") or "/")
        try:
            match route:
                case ("GET", "/state"):
                    doc = self.host.state_doc(_int_param(query, "player", required=True) or 0)
                    body = doc.text.encode("utf-8")
                    return RestResponse(status=200, content_type="text/markdown; charset=utf-8", body=body)
                case ("GET", "/catalog"):
                    catalog = self.host.catalog(_int_param(query, "player", required=True) or 0)
                    return _json(200, catalog.model_dump(mode="json"))
                case ("GET", "/events"):
                    since = _int_param(query, "since", required=False)
                    player = _int_param(query, "player", required=False)
                    return _json(200, [e.model_dump(mode="json") for e in self.host.events(since, player)])
                case ("GET", "/tools"):
                    tools = self.host.tools(_int_param(query, "player", required=True) or 0)
                    return _json(200, [t.model_dump(mode="json") for t in tools])
                case ("POST", "/tool"):
                    return self._tool(body)
                case ("POST", "/advance") if self.test_mode:
                    events = self.host.advance()
                    state = self.host.state
                    return _json(200, {"turn": state.turn, "terminal": state.is_terminal, "events": len(events)})
                case _:
                    return _json(404, {"error": {"code": "NOT_FOUND", "message": f"No route {route[0]} {route[1]}."}})
        except GameError as e:
            return _error(e)

    def _tool(self, body: bytes) -> RestResponse:
        try:
            request = _ToolBody.model_validate_json(body)
        except ValidationError as e:
            where = ".".join(str(p) for p in e.errors()[0]["loc"]) or "body"
            raise SchemaError(f"Invalid tool request: {where}: {e.errors()[0]['msg']}.", field=where) from e
        response = self.host.call_tool(request.player, ToolRequest(name=request.name, arguments=request.arguments))
        if response.ok:
            return _json(200, response.model_dump(mode="json"))
        status = _status(response.error.code) if response.error is not None else 400
        return _json(status, response.model_dump(mode="json"))


async def _send(writer: asyncio.StreamWriter, conn: h11.Connection, response: RestResponse) -> None:
    headers = [("content-type", response.content_type), ("content-length", str(len(response.body)))]
    writer.write(conn.send(h11.Response(status_code=response.status, headers=headers)) or b"")
    writer.write(conn.send(h11.Data(data=response.body)) or b"")
    writer.write(conn.send(h11.EndOfMessage()) or b"")
    await writer.drain()


async def _next_event(reader: asyncio.StreamReader, conn: h11.Connection) -> h11.Event | type[h11.PAUSED]:
    while True:
        event = conn.next_event()
        if event is not h11.NEED_DATA:
            return event
        conn.receive_data(await reader.read(_READ_CHUNK))


class RestServer:
    """HTTP/1.1 server for one game, one request at a time per connection."""

    def __init__(self, facade: RestFacade) -> None:
        """Serve the given facade."""
        self.facade = facade

    async def handle_connection(self, reader: asyncio.StreamReader, writer: asyncio.StreamWriter) -> None:
        """Serve requests on one connection until either side closes it."""
        conn = h11.Connection(h11.SERVER)
        try:
            while True:
                event = await _next_event(reader, conn)
                if isinstance(event, h11.ConnectionClosed) or event is h11.PAUSED:
                    break
                if not isinstance(event, h11.Request):
                    continue
                body = bytearray()
                while True:
                    part = await _next_event(reader, conn)
                    if isinstance(part, h11.Data):
                        body += part.data
                        if len(body) > _MAX_BODY_BYTES:
                            raise SchemaError("Request body too large.", field="body")
                    elif isinstance(part, h11.EndOfMessage):
                        break
                    elif isinstance(part, h11.ConnectionClosed):
                        return
                response = self.facade.handle(event.method.decode("ascii"), event.target.decode("ascii"), bytes(body))
                await _send(writer, conn, response)
                if conn.our_state is h11.MUST_CLOSE:
                    break
                conn.start_next_cycle()
        except (h11.RemoteProtocolError, SchemaError) as e:
            logger.warning("Bad HTTP request: %s", e)
            if conn.our_state in {h11.IDLE, h11.SEND_RESPONSE}:
                await _send(writer, conn, _json(400, {"error": {"code": "MALFORMED", "message": str(e)}}))
        except ConnectionError:
            logger.info("HTTP client dropped")
        except Exception:
            logger.exception("HTTP handler failed")
        finally:
            writer.close()


async def serve_rest(facade: RestFacade, bind: str, port: int, started: asyncio.Event | None = None) -> None:
    """Run the HTTP facade until cancelled."""
    server = RestServer(facade)
    listener = await asyncio.start_server(server.handle_connection, bind, port)
    logger.info("REST server listening bind=%s port=%d test_mode=%s", bind, port, facade.test_mode)
    if started is not None:
        started.set()
    async with listener:
        await listener.serve_forever()
