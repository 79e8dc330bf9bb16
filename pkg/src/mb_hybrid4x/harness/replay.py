"""Replay a recorded game and check that it comes out the same."""

import asyncio
import logging
from pathlib import Path

from pydantic import BaseModel, ConfigDict

from mb_hybrid4x.codec.document import encode_events
from mb_hybrid4x.core.errors import NotReplayableError
from mb_hybrid4x.engine.models import Event
from mb_hybrid4x.harness.game import play_game
from mb_hybrid4x.harness.models import Exclusion, GameRecord
from mb_hybrid4x.harness.store import find_record

logger = logging.getLogger(__name__)


class ReplayResult(BaseModel):
    """A replayed game next to its stored record."""

    model_config = ConfigDict(frozen=True)

    stored: GameRecord
    replayed: GameRecord
    events: list[Event]

    @property
    def matches(self) -> bool:
        """Whether the replay reproduced the stored record exactly."""
        return self.stored == self.replayed

    def event_log(self) -> str:
        """The full event log as text, grouped by turn."""
        return encode_events(self.events, None, window=max(1, self.replayed.game_length + 1))


def replay(source: Path, condition: str, seed: int) -> ReplayResult:
    """Rerun a stored game from its record.

    Raises:
        RecordNotFoundError: If the file or the game is missing.
        NotReplayableError: If the game used a live LLM or crashed.

    """
    stored = find_record(source, condition, seed)
    if not stored.spec.deterministic:
        raise NotReplayableError(f"Condition {condition} used a live LLM; its games cannot be replayed.", field="condition")
    if stored.exclusion == Exclusion.CRASH:
        raise NotReplayableError(f"Game condition={condition} seed={seed} crashed and has nothing to replay.", field="seed")
    played = asyncio.run(play_game(stored.spec, seed, stored.game, stored.episode, stored.fault))
    result = ReplayResult(stored=stored, replayed=played.record, events=played.state.event_log)
    logger.info("Replayed condition=%s seed=%d matches=%s events=%d", condition, seed, result.matches, len(result.events))
    return result
