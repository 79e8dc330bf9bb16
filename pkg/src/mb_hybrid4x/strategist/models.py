"""Decision-episode types shared by the driver and the strategist implementations."""

from enum import StrEnum
from typing import Any, Protocol, Self

from pydantic import BaseModel, ConfigDict, Field, model_validator

from mb_hybrid4x.bridge.host import GameHost
from mb_hybrid4x.bridge.tool_server import ToolRequest, ToolResponse
from mb_hybrid4x.codec.document import MarkdownDoc
from mb_hybrid4x.codec.tools import FINISHING_TOOLS
from mb_hybrid4x.strategy.models import DecisionKind, OptionCatalog


class EpisodeOutcome(StrEnum):
    """How a decision episode ended."""

    COMPLETED = "completed"
    TIMEOUT_GAP = "timeout_gap"
    ERROR_GAP = "error_gap"
    FORCED_CLOSE = "forced_close"


GAP_OUTCOMES = frozenset({EpisodeOutcome.TIMEOUT_GAP, EpisodeOutcome.ERROR_GAP})


class ToolCallRecord(BaseModel):
    """One tool call as made and answered."""

    model_config = ConfigDict(frozen=True)

    round: int
    name: str
    arguments: dict[str, Any]
    ok: bool
    error_code: str | None = None
    error_message: str | None = None


class DecisionRecord(BaseModel):
    """Everything one decision episode produced."""

    model_config = ConfigDict(frozen=True)

    turn: int
    player: int
    episode_id: str
    calls: tuple[ToolCallRecord, ...] = ()
    rationales: dict[DecisionKind, str] = Field(default_factory=dict)
    input_tokens: int = Field(default=0, ge=0)
    output_tokens: int = Field(default=0, ge=0)
    token_method: str = "usage"
    rounds: int = Field(default=0, ge=0)
    latency_ms: float = Field(default=0.0, ge=0)
    outcome: EpisodeOutcome
    transcript: tuple[dict[str, Any], ...] = ()

    @model_validator(mode="after")
    def _check_finishing(self) -> Self:
        """A completed episode has exactly one accepted finishing tool."""
        finished = sum(1 for c in self.calls if c.ok and c.name in FINISHING_TOOLS)
        if self.outcome == EpisodeOutcome.COMPLETED and finished != 1:
            raise ValueError(f"completed episode must have exactly one finishing tool, got {finished}")
        return self

    @property
    def is_gap(self) -> bool:
        """Whether the previous strategy simply persisted."""
        return self.outcome in GAP_OUTCOMES


class EpisodeContext(BaseModel):
    """Inputs of one episode. Tool calls go through `host`, which owns the player's session."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    host: GameHost
    player: int
    turn: int
    episode_id: str
    system_prompt: str
    doc: MarkdownDoc
    catalog: OptionCatalog
    deadline_sec: float = Field(gt=0)
    round_cap: int = Field(ge=1)
    corrective_rounds: int = Field(default=1, ge=0)

    @property
    def consumed(self) -> list[str]:
        """Tools used so far in this episode."""
        session = self.host.episodes.get(self.player)
        return [str(t) for t in session.consumed] if session is not None else []


class RoundResult(BaseModel):
    """A tool call of the previous round paired with its answer."""

    model_config = ConfigDict(frozen=True)

    request: ToolRequest
    response: ToolResponse


class StrategistReply(BaseModel):
    """Tool calls of one round plus what they cost. Token counts are None when the strategist cannot tell."""

    calls: list[ToolRequest] = Field(default_factory=list)
    input_tokens: int | None = None
    output_tokens: int | None = None
    exchange: dict[str, Any] | None = None


class Strategist(Protocol):
    """Anything that answers a round of a decision episode with tool calls."""

    name: str

    async def decide(self, ctx: EpisodeContext, previous: list[RoundResult]) -> StrategistReply:
        """Tool calls for the next round; `previous` holds the answers to the last round's calls."""
        ...
