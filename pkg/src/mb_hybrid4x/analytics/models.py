"""Result types of the analysis."""

import math
from enum import StrEnum

from pydantic import BaseModel, ConfigDict, Field


class ScoreTiming(StrEnum):
    """Which scores the score ratio compares."""

    PEAK = "peak"
    FINAL = "final"


class Proportion(BaseModel):
    """A rate with its 95% normal-approximation interval."""

    model_config = ConfigDict(frozen=True)

    value: float = Field(ge=0, le=1)
    low: float = Field(ge=0, le=1)
    high: float = Field(ge=0, le=1)
    n: int = Field(ge=0)


class TokenPoint(BaseModel):
    """Mean tokens of the episodes played at one turn."""

    model_config = ConfigDict(frozen=True)

    turn: int
    episodes: int
    input_tokens: float
    output_tokens: float


class CostEstimate(BaseModel):
    """Per-game token spend and derived latency."""

    model_config = ConfigDict(frozen=True)

    input_tokens_per_game: float = 0.0
    output_tokens_per_game: float = 0.0
    cost_per_game: float = 0.0
    latency_per_turn_sec: float = 0.0


class PolicyTrajectory(BaseModel):
    """Player 0's policy adoptions in one game, in order."""

    model_config = ConfigDict(frozen=True)

    seed: int
    ideology: str | None
    steps: list[tuple[int, str, str]] = Field(default_factory=list)


class ConditionMetrics(BaseModel):
    """Everything reported for one condition."""

    condition: str
    games: int
    win_rate: Proportion
    score_ratio: float = Field(ge=0, le=1)
    survival_rate: Proportion
    mean_game_length: float = Field(ge=0)
    victory_kinds: dict[str, float] = Field(default_factory=dict)
    adoption: dict[str, float] = Field(default_factory=dict)
    strategy_changes_per_100: float = Field(default=0.0, ge=0)
    strategist_changes_per_100: float = Field(default=0.0, ge=0)
    persona_changes_per_100: float = Field(default=0.0, ge=0)
    ideology_shares: dict[str, float] = Field(default_factory=dict)
    tokens: list[TokenPoint] = Field(default_factory=list)
    cost: CostEstimate = Field(default_factory=CostEstimate)
    trajectories: list[PolicyTrajectory] = Field(default_factory=list)


class MetricsSummary(BaseModel):
    """Per-condition metrics over the included records."""

    score_timing: ScoreTiming = ScoreTiming.PEAK
    included: int = 0
    excluded: int = 0
    conditions: list[ConditionMetrics] = Field(default_factory=list)


class RegressionResult(BaseModel):
    """Coefficients of a fitted model, aligned with the design matrix columns."""

    model_config = ConfigDict(frozen=True)

    model: str
    target: str = "y"
    names: list[str]
    coefficients: list[float]
    std_errors: list[float]
    p_values: list[float]
    marginal_effects: dict[str, float] = Field(default_factory=dict)
    penalty: float | None = None
    n_obs: int = 0
    iterations: int = 0
    r_squared: float | None = None
    log_likelihood: float | None = None
    residual_ss: float | None = None

    def coefficient(self, name: str) -> float:
        """Coefficient of a named column."""
        return self.coefficients[self.names.index(name)]

    def p_value(self, name: str) -> float:
        """p-value of a named column."""
        return self.p_values[self.names.index(name)]

    def significant(self, name: str, alpha: float = 0.05) -> bool:
        """Whether a column's p-value is below `alpha`."""
        p = self.p_value(name)
        return not math.isnan(p) and p < alpha
