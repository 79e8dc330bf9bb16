"""Length-prefixed frames: a 4-byte big-endian length followed by a UTF-8 JSON object."""

import asyncio
import json
import struct
from enum import StrEnum
from typing import Any

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from mb_hybrid4x.core.errors import FrameTooLargeError, MalformedFrameError

HEADER = struct.Struct(">I")
MAX_FRAME_BYTES = 16 * 1024 * 1024


class FrameKind(StrEnum):
    """Direction and purpose of a frame."""

    REQUEST = "request"
    RESPONSE = "response"
    EVENT = "event"


class Frame(BaseModel):
    """Decoded frame body. Responses echo the id of their request; events carry id 0."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: FrameKind
    id: int = Field(ge=0)
    op: str | None = None
    args: dict[str, Any] = Field(default_factory=dict)
    ok: bool | None = None
    result: Any = None
    error: dict[str, Any] | None = None


def encode_frame(frame: Frame) -> bytes:
    """Serialize a frame with its length prefix.

    Raises:
        FrameTooLargeError: If the payload exceeds the frame cap.

    """
    payload = frame.model_dump_json(exclude_none=True).encode("utf-8")
    if len(payload) > MAX_FRAME_BYTES:
        raise FrameTooLargeError(f"Frame payload of {len(payload)} bytes exceeds {MAX_FRAME_BYTES}.", field="length")
    return HEADER.pack(len(payload)) + payload


def decode_payload(payload: bytes) -> Frame:
    """Parse a frame body.

    Raises:
        MalformedFrameError: If the body is not UTF-8 JSON describing a frame.

    """
    try:
        raw = json.loads(payload.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise MalformedFrameError(f"Frame payload is not UTF-8 JSON: {e}.", field="payload") from e
    if not isinstance(raw, dict):
        raise MalformedFrameError("Frame payload must be a JSON object.", field="payload")
    try:
        return Frame.model_validate(raw)
    except ValidationError as e:
        where = ".".join(str(p) for p in e.errors()[0]["loc"]) or "payload"
        raise MalformedFrameError(f"Invalid frame: {where}: {e.errors()[0]['msg']}.", field=where) from e


async def read_frame(reader: asyncio.StreamReader) -> bytes | None:
    """Read one frame body; None on a clean end of stream.

    Raises:
        MalformedFrameError: If the stream ends inside a frame.
        FrameTooLargeError: If the declared length exceeds the cap. The body is not read.

    """
    try:
        header = await reader.readexactly(HEADER.size)
    except asyncio.IncompleteReadError as e:
        if not e.partial:
            return None
        raise MalformedFrameError(f"Truncated frame header ({len(e.partial)} bytes).", field="length") from e
    (length,) = HEADER.unpack(header)
    if length > MAX_FRAME_BYTES:
        raise FrameTooLargeError(f"Declared frame length {length} exceeds {MAX_FRAME_BYTES}.", field="length")
    try:
        return await reader.readexactly(length)
    except asyncio.IncompleteReadError as e:
        raise MalformedFrameError(f"Truncated frame body ({len(e.partial)} of {length} bytes).", field="payload") from e


async def write_frame(writer: asyncio.StreamWriter, frame: Frame) -> None:
    """Write one frame and wait for the buffer to drain."""
    writer.write(encode_frame(frame))
    await writer.drain()
