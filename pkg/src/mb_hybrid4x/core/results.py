"""Result data types returned by the service layer."""

from pathlib import Path

from pydantic import BaseModel, Field

from mb_hybrid4x.codec.tools import ToolSchema
from mb_hybrid4x.engine.models import VictoryKind
from mb_hybrid4x.harness.models import ConditionSummary, Exclusion, OutcomeKind


class RunResult(BaseModel):
    """Result of a single game."""

    condition: str
    seed: int
    outcome: OutcomeKind
    winner: int | None
    victory: VictoryKind | None
    game_length: int
    score_ratio: float
    strategy_changes: int
    persona_changes: int
    gaps: int
    exclusion: Exclusion
    mean_latency_ms: float = 0.0
    record_path: Path | None = None


class BatchResult(BaseModel):
    """Result of a finished batch."""

    output: Path
    ran: int
    skipped: int
    crashed: int
    conditions: list[ConditionSummary] = Field(default_factory=list)


class BatchStartedResult(BaseModel):
    """A batch handed to a background worker."""

    config_path: Path
    output: Path
    pending: int


class AnalyzeResult(BaseModel):
    """Where the analysis went and what it covered."""

    out_dir: Path
    files: list[Path]
    included: int
    excluded: int
    conditions: list[str]
    regressions: list[str]


class ReplayCheckResult(BaseModel):
    """A replayed game compared with its record."""

    condition: str
    seed: int
    matches: bool
    events: int
    event_log: str


class StateResult(BaseModel):
    """A player's state document with its size against the verbose baseline."""

    seed: int
    turn: int
    player: int
    document: str
    tokens: int
    baseline_tokens: int

    @property
    def ratio(self) -> float:
        """Compact size over baseline size."""
        return self.tokens / self.baseline_tokens if self.baseline_tokens else 0.0


class ToolsResult(BaseModel):
    """Published tool descriptors."""

    tools: list[ToolSchema]


class ServeResult(BaseModel):
    """Bridge servers that ran until shutdown."""

    bind: str
    stream_port: int
    rest_port: int
    seed: int
    test_mode: bool
    final_turn: int
