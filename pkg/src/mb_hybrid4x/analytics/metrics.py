"""Per-condition metrics over persisted game records."""

import logging
import math
from collections import defaultdict
from collections.abc import Iterable

from mb_hybrid4x.analytics.models import (
    ConditionMetrics,
    CostEstimate,
    MetricsSummary,
    PolicyTrajectory,
    Proportion,
    ScoreTiming,
    TokenPoint,
)
from mb_hybrid4x.config import LlmSettings
from mb_hybrid4x.core.errors import EmptyInputError
from mb_hybrid4x.engine.models import Ideology, VictoryKind
from mb_hybrid4x.harness.models import GameRecord, OutcomeKind
from mb_hybrid4x.strategy.models import GrandStrategy

logger = logging.getLogger(__name__)

Z_95 = 1.959963984540054
NO_IDEOLOGY = "None"


def proportion(successes: int, n: int) -> Proportion:
    """Rate with a 95% normal-approximation interval clipped to [0, 1]."""
    if n == 0:
        return Proportion(value=0.0, low=0.0, high=0.0, n=0)
    p = successes / n
    half = Z_95 * math.sqrt(p * (1 - p) / n)
    return Proportion(value=p, low=max(0.0, p - half), high=min(1.0, p + half), n=n)


def score_ratio(record: GameRecord, timing: ScoreTiming = ScoreTiming.PEAK) -> float:
    """Player 0's score over the best score in the game; 1.0 when nobody scored."""
    scores = record.peak_scores if timing == ScoreTiming.PEAK else record.final_scores
    best = max(scores, default=0)
    return scores[0] / best if best > 0 else 1.0


def survived(record: GameRecord) -> bool:
    """Whether player 0 was still alive when the game ended."""
    return record.outcome.kind != OutcomeKind.PLAYER0_ELIMINATED and record.survived_turns[0] >= record.game_length


def _adoption(records: list[GameRecord]) -> dict[str, float]:
    """Per grand strategy, the mean over games of the share of player 0's survived turns it was active."""
    totals = dict.fromkeys((str(g) for g in GrandStrategy), 0.0)
    counted = 0
    for r in records:
        turns = r.survived_turns[0]
        if turns == 0:
            continue
        counted += 1
        for grand in r.grand_by_turn[:turns]:
            if grand is not None:
                totals[str(grand)] += 1 / turns
    return {g: v / counted if counted else 0.0 for g, v in totals.items()}


def _tokens(records: list[GameRecord]) -> list[TokenPoint]:
    by_turn: dict[int, list[tuple[int, int]]] = defaultdict(list)
    for r in records:
        for e in r.episodes:
            by_turn[e.turn].append((e.input_tokens, e.output_tokens))
    return [
        TokenPoint(
            turn=turn,
            episodes=len(pairs),
            input_tokens=sum(p[0] for p in pairs) / len(pairs),
            output_tokens=sum(p[1] for p in pairs) / len(pairs),
        )
        for turn, pairs in sorted(by_turn.items())
    ]


def _cost(records: list[GameRecord], llm: LlmSettings) -> CostEstimate:
    episodes = [e for r in records for e in r.episodes]
    games = len(records)
    total_in = sum(e.input_tokens for e in episodes)
    total_out = sum(e.output_tokens for e in episodes)
    latency = sum(e.input_tokens / llm.prefill_tokens_per_sec + e.output_tokens / llm.generation_tokens_per_sec for e in episodes)
    per_game_in, per_game_out = total_in / games, total_out / games
    return CostEstimate(
        input_tokens_per_game=per_game_in,
        output_tokens_per_game=per_game_out,
        cost_per_game=(per_game_in * llm.input_price_per_mtok + per_game_out * llm.output_price_per_mtok) / 1_000_000,
        latency_per_turn_sec=latency / len(episodes) if episodes else 0.0,
    )


def _condition(name: str, records: list[GameRecord], timing: ScoreTiming, llm: LlmSettings) -> ConditionMetrics:
    games = len(records)
    survived_turns = sum(r.survived_turns[0] for r in records)
    wins = [r for r in records if r.player0_won]
    per_100 = 100 / survived_turns if survived_turns else 0.0
    ideologies = [str(r.ideology) if r.ideology is not None else NO_IDEOLOGY for r in records]
    return ConditionMetrics(
        condition=name,
        games=games,
        win_rate=proportion(len(wins), games),
        score_ratio=sum(score_ratio(r, timing) for r in records) / games,
        survival_rate=proportion(sum(survived(r) for r in records), games),
        mean_game_length=sum(r.game_length for r in records) / games,
        victory_kinds={str(k): sum(r.outcome.victory == k for r in wins) / games for k in VictoryKind},
        adoption=_adoption(records),
        strategy_changes_per_100=per_100 * sum(len(r.strategy_changes) for r in records),
        strategist_changes_per_100=per_100 * sum(len(r.strategist_changes) for r in records),
        persona_changes_per_100=per_100 * sum(len(r.persona_changes) for r in records),
        ideology_shares={i: ideologies.count(i) / games for i in [*(str(x) for x in Ideology), NO_IDEOLOGY]},
        tokens=_tokens(records),
        cost=_cost(records, llm),
        trajectories=[
            PolicyTrajectory(
                seed=r.seed,
                ideology=str(r.ideology) if r.ideology is not None else None,
                steps=[(p.turn, p.branch, p.policy) for p in r.policies],
            )
            for r in sorted(records, key=lambda r: r.seed)
        ],
    )


def compute_metrics(
    records: Iterable[GameRecord],
    score_timing: ScoreTiming = ScoreTiming.PEAK,
    llm: LlmSettings | None = None,
) -> MetricsSummary:
    """Metrics per condition over the included records; excluded records are only counted.

    Args:
        records: Records of any number of conditions.
        score_timing: Compare peak scores (default) or final scores in the score ratio.
        llm: Prices and throughput for the cost estimate.

    Raises:
        EmptyInputError: If no record is included.

    """
    llm = llm or LlmSettings()
    grouped: dict[str, list[GameRecord]] = defaultdict(list)
    excluded = 0
    for record in records:
        if record.included:
            grouped[record.condition].append(record)
        else:
            excluded += 1
    included = sum(len(v) for v in grouped.values())
    if included == 0:
        raise EmptyInputError(f"No included records to analyze ({excluded} excluded).")
    logger.info("Computing metrics included=%d excluded=%d conditions=%d", included, excluded, len(grouped))
    return MetricsSummary(
        score_timing=score_timing,
        included=included,
        excluded=excluded,
        conditions=[_condition(name, grouped[name], score_timing, llm) for name in sorted(grouped)],
    )
