"""Line-delimited JSON record files and their transcript siblings."""

import errno
import json
import logging
from collections.abc import Iterator
from pathlib import Path
from typing import Any

from pydantic import ValidationError

from mb_hybrid4x.core.errors import BatchHaltedError, RecordNotFoundError, SchemaVersionError, UnwritableError
from mb_hybrid4x.harness.models import SCHEMA_VERSION, GameRecord

logger = logging.getLogger(__name__)


def _write_error(path: Path, error: OSError) -> Exception:
    if error.errno in {errno.ENOSPC, errno.EDQUOT}:
        return BatchHaltedError(f"Out of disk space writing {path}; rerun the batch to resume.", field=str(path))
    return UnwritableError(f"Cannot write {path}: {error.strerror or error}.", field=str(path))


def persist_record(record: GameRecord, sink: Path) -> None:
    """Append one record as a single JSON line.

    Raises:
        BatchHaltedError: If the disk is full. Records already written stay valid for resuming.
        UnwritableError: If the file cannot be written for another reason.

    """
    line = record.model_dump_json() + "\n"
    try:
        sink.parent.mkdir(parents=True, exist_ok=True)
        with sink.open("a", encoding="utf-8") as f:
            f.write(line)
    except OSError as e:
        raise _write_error(sink, e) from e


def transcripts_dir(sink: Path) -> Path:
    """Directory beside a record file that holds per-game transcripts."""
    return sink.with_name(sink.stem + ".transcripts")


def transcript_path(sink: Path, condition: str, seed: int) -> Path:
    """Transcript file of one game."""
    return transcripts_dir(sink) / f"{condition}-{seed}.jsonl"


def persist_transcripts(sink: Path, condition: str, seed: int, entries: list[dict[str, Any]]) -> None:
    """Write a game's episode transcripts, replacing an earlier attempt.

    Raises:
        BatchHaltedError: If the disk is full.
        UnwritableError: If the file cannot be written for another reason.

    """
    path = transcript_path(sink, condition, seed)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", encoding="utf-8") as f:
            for entry in entries:
                f.write(json.dumps(entry, ensure_ascii=False, default=str) + "\n")
    except OSError as e:
        raise _write_error(path, e) from e


def read_records(source: Path) -> Iterator[GameRecord]:
    """Stream records one line at a time.

    A final line without a newline is a write cut short and is skipped.

    Raises:
        RecordNotFoundError: If the file does not exist.
        SchemaVersionError: If a record was written with another schema version.

    """
    if not source.is_file():
        raise RecordNotFoundError(f"Record file not found: {source}.", field=str(source))
    with source.open(encoding="utf-8") as f:
        for number, line in enumerate(f, start=1):
            if not line.strip():
                continue
            if not line.endswith("\n"):
                logger.warning("Skipping truncated record path=%s line=%d", source, number)
                return
            try:
                raw = json.loads(line)
            except json.JSONDecodeError as e:
                raise SchemaVersionError(f"{source}:{number} is not a JSON record.", field="schema_version") from e
            version = raw.get("schema_version") if isinstance(raw, dict) else None
            if version != SCHEMA_VERSION:
                raise SchemaVersionError(
                    f"{source}:{number} has schema version {version}, expected {SCHEMA_VERSION}; migrate the file first.",
                    field="schema_version",
                )
            try:
                yield GameRecord.model_validate(raw)
            except ValidationError as e:
                raise SchemaVersionError(f"{source}:{number} does not match schema version {SCHEMA_VERSION}: {e}") from e


def persisted_keys(source: Path) -> set[tuple[str, int]]:
    """(condition, seed) pairs already in a record file; empty when the file does not exist yet."""
    if not source.is_file():
        return set()
    return {r.key for r in read_records(source)}


def find_record(source: Path, condition: str, seed: int) -> GameRecord:
    """The record of one game.

    Raises:
        RecordNotFoundError: If the file or the game is missing.

    """
    for record in read_records(source):
        if record.key == (condition, seed):
            return record
    raise RecordNotFoundError(f"No record for condition={condition} seed={seed} in {source}.", field="seed")


def repair_tail(sink: Path) -> None:
    """Cut a partial last line left by an interrupted write, so appends start on a fresh line."""
    if not sink.is_file():
        return
    data = sink.read_bytes()
    if not data or data.endswith(b"\n"):
        return
    keep = data.rfind(b"\n") + 1
    logger.warning("Dropping partial record path=%s bytes=%d", sink, len(data) - keep)
    with sink.open("r+b") as f:
        f.truncate(keep)
