"""Experiment configuration and the persisted game record."""

import tomllib
from enum import StrEnum
from pathlib import Path
from typing import Any, Self

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from mb_hybrid4x.config import EpisodeSettings
from mb_hybrid4x.core.errors import InvalidConfigError
from mb_hybrid4x.engine.models import GameConfig, Ideology, VictoryKind
from mb_hybrid4x.strategist.models import EpisodeOutcome
from mb_hybrid4x.strategist.scripted import ScriptPreset
from mb_hybrid4x.strategy.models import EconomicStrategy, GrandStrategy, MilitaryStrategy

SCHEMA_VERSION = 1
GAP_EXCLUSION_RUN = 15


class StrategistKind(StrEnum):
    """Who plays player 0's macro decisions."""

    BUILTIN = "builtin"
    SCRIPTED = "scripted"
    MOCK = "mock"
    LLM = "llm"


class Condition(BaseModel):
    """One experimental condition: the strategist seated as player 0."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    name: str = Field(min_length=1)
    strategist: StrategistKind = StrategistKind.BUILTIN
    script: ScriptPreset | None = None
    script_path: Path | None = None
    transcript: str | None = None

    @model_validator(mode="after")
    def _check_script(self) -> Self:
        has_script = self.script is not None or self.script_path is not None
        if self.strategist == StrategistKind.SCRIPTED and not has_script:
            raise ValueError(f"scripted condition {self.name!r} needs script or script_path")
        if self.strategist != StrategistKind.SCRIPTED and has_script:
            raise ValueError(f"condition {self.name!r} has a script but strategist {self.strategist}")
        return self

    @property
    def deterministic(self) -> bool:
        """Whether (condition, seed, config) fully determines the record."""
        return self.strategist != StrategistKind.LLM


class FaultPlan(BaseModel):
    """Transport failures injected into player 0's episodes.

    Before each episode outside a burst, a failure burst starts with `failure_probability`; a burst
    fails `burst_length` consecutive episodes. Draws come from the game seed.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    failure_probability: float = Field(default=0.0, ge=0, le=1)
    burst_length: int = Field(default=1, ge=1)


class ExperimentConfig(BaseModel):
    """A batch: conditions times seeds on one game configuration."""

    model_config = ConfigDict(extra="forbid")

    conditions: list[Condition] = Field(min_length=1)
    seeds: list[int] = Field(min_length=1)
    game: GameConfig = Field(default_factory=GameConfig)
    episode: EpisodeSettings = Field(default_factory=EpisodeSettings)
    parallelism: int = Field(default=1, ge=1)
    fault: FaultPlan | None = None
    output: Path = Path("records.jsonl")

    @field_validator("seeds", mode="before")
    @classmethod
    def _expand_range(cls, value: Any) -> Any:  # noqa: ANN401
        """Accept `{start = 0, count = 200}` as well as an explicit list."""
        if isinstance(value, dict) and set(value) == {"start", "count"}:
            return list(range(int(value["start"]), int(value["start"]) + int(value["count"])))
        return value

    @model_validator(mode="after")
    def _check_unique(self) -> Self:
        names = [c.name for c in self.conditions]
        if len(set(names)) != len(names):
            raise ValueError("condition names must be unique")
        if len(set(self.seeds)) != len(self.seeds):
            raise ValueError("seeds must be distinct")
        return self

    @classmethod
    def load(cls, path: Path) -> ExperimentConfig:
        """Read a TOML experiment file. A relative `output` is resolved against the file's directory.

        Raises:
            InvalidConfigError: If the file is missing, is not TOML, or fails validation.

        """
        try:
            raw = tomllib.loads(path.read_text(encoding="utf-8"))
            config = cls.model_validate(raw)
        except (OSError, tomllib.TOMLDecodeError) as e:
            raise InvalidConfigError(f"Cannot read experiment config {path}: {e}", field=str(path)) from e
        except ValidationError as e:
            error = e.errors()[0]
            where = ".".join(str(p) for p in error["loc"]) or str(path)
            raise InvalidConfigError(f"Invalid experiment config {path}: {where}: {error['msg']}", field=where) from e
        if not config.output.is_absolute():
            config.output = path.parent / config.output
        return config


class OutcomeKind(StrEnum):
    """How a game ended from the harness's point of view."""

    VICTORY = "victory"
    DRAW = "draw"
    PLAYER0_ELIMINATED = "player0_eliminated"
    CRASHED = "crashed"


class Exclusion(StrEnum):
    """Why a record is left out of the analysis."""

    NONE = "none"
    CRASH = "crash"
    GAP15 = "gap15"


class GameOutcome(BaseModel):
    """Result of a game."""

    model_config = ConfigDict(frozen=True)

    kind: OutcomeKind
    winner: int | None = None
    victory: VictoryKind | None = None
    turn: int = 0


class StrategyChange(BaseModel):
    """Player 0's strategy set changed before the given turn was played."""

    model_config = ConfigDict(frozen=True)

    turn: int
    writer: str
    grand: GrandStrategy
    economic: tuple[EconomicStrategy, ...] = ()
    military: tuple[MilitaryStrategy, ...] = ()


class PersonaChange(BaseModel):
    """Persona values a committed episode changed."""

    model_config = ConfigDict(frozen=True)

    turn: int
    changed: dict[str, int]


class PolicyPick(BaseModel):
    """One adopted policy."""

    model_config = ConfigDict(frozen=True)

    turn: int
    branch: str
    policy: str


class EpisodeSummary(BaseModel):
    """Deterministic part of a decision record; wall-clock latency lives in the transcript file."""

    model_config = ConfigDict(frozen=True)

    turn: int
    outcome: EpisodeOutcome
    rounds: int
    calls: int
    input_tokens: int
    output_tokens: int
    token_method: str


class GameRecord(BaseModel):
    """Everything the analysis needs about one game."""

    model_config = ConfigDict(frozen=True)

    schema_version: int = SCHEMA_VERSION
    condition: str
    seed: int
    spec: Condition
    game: GameConfig
    episode: EpisodeSettings = Field(default_factory=EpisodeSettings)
    fault: FaultPlan | None = None
    archetypes: list[str] = Field(default_factory=list)
    outcome: GameOutcome
    game_length: int = Field(default=0, ge=0)
    survived_turns: list[int] = Field(default_factory=list)
    final_scores: list[int] = Field(default_factory=list)
    peak_scores: list[int] = Field(default_factory=list)
    grand_by_turn: list[GrandStrategy | None] = Field(default_factory=list)
    strategy_changes: list[StrategyChange] = Field(default_factory=list)
    persona_changes: list[PersonaChange] = Field(default_factory=list)
    policies: list[PolicyPick] = Field(default_factory=list)
    ideology: Ideology | None = None
    episodes: list[EpisodeSummary] = Field(default_factory=list)
    exclusion: Exclusion = Exclusion.NONE
    exclusion_reason: str | None = None

    @model_validator(mode="after")
    def _check_consistency(self) -> Self:
        if any(t > self.game_length for t in self.survived_turns):
            raise ValueError("survived turns exceed the game length")
        if self.exclusion != Exclusion.NONE and not self.exclusion_reason:
            raise ValueError("an excluded record needs a reason")
        return self

    @property
    def key(self) -> tuple[str, int]:
        """(condition, seed) identity of the record."""
        return self.condition, self.seed

    @property
    def included(self) -> bool:
        """Whether the record takes part in the analysis."""
        return self.exclusion == Exclusion.NONE

    @property
    def player0_won(self) -> bool:
        """Whether player 0 achieved any victory."""
        return self.outcome.kind == OutcomeKind.VICTORY and self.outcome.winner == 0

    @property
    def strategist_changes(self) -> list[StrategyChange]:
        """Changes made by player 0's strategist rather than the in-game AI."""
        return [c for c in self.strategy_changes if c.writer == "override"]


def longest_gap_run(episodes: list[EpisodeSummary]) -> int:
    """Longest run of consecutive gap episodes."""
    longest = run = 0
    for episode in episodes:
        run = run + 1 if episode.outcome in {EpisodeOutcome.TIMEOUT_GAP, EpisodeOutcome.ERROR_GAP} else 0
        longest = max(longest, run)
    return longest


class ConditionSummary(BaseModel):
    """Per-condition tally logged at the end of a batch."""

    condition: str
    games: int = 0
    wins: int = 0
    excluded: int = 0


class BatchReport(BaseModel):
    """What a batch run did."""

    output: Path
    ran: int = 0
    skipped: int = 0
    crashed: int = 0
    conditions: list[ConditionSummary] = Field(default_factory=list)
