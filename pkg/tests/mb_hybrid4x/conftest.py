from collections.abc import Callable, Sequence
from typing import Any

import pytest

from mb_hybrid4x.engine.models import GameConfig, Ideology, VictoryKind
from mb_hybrid4x.harness.models import (
    Condition,
    EpisodeSummary,
    Exclusion,
    GameOutcome,
    GameRecord,
    OutcomeKind,
    PersonaChange,
    PolicyPick,
    StrategyChange,
)
from mb_hybrid4x.strategist.models import EpisodeOutcome
from mb_hybrid4x.strategy.models import GrandStrategy

type RecordFactory = Callable[..., GameRecord]


def _record(
    condition: str,
    seed: int,
    *,
    winner: int | None = None,
    victory: VictoryKind | None = None,
    eliminated: bool = False,
    archetype: str = "alpha",
    game_length: int = 10,
    survived: int | None = None,
    peak: Sequence[int] = (10, 10),
    final: Sequence[int] | None = None,
    grand: Sequence[GrandStrategy | None] = (),
    changes: Sequence[str] = (),
    persona_changes: int = 0,
    policies: Sequence[tuple[int, str, str]] = (),
    ideology: Ideology | None = None,
    tokens: Sequence[tuple[int, int, int]] = (),
    exclusion: Exclusion = Exclusion.NONE,
) -> GameRecord:
    """A hand-made record; `tokens` holds (turn, input, output) per episode and `changes` the writers."""
    if winner is not None:
        outcome = GameOutcome(kind=OutcomeKind.VICTORY, winner=winner, victory=victory or VictoryKind.TIME, turn=game_length)
    elif eliminated:
        outcome = GameOutcome(kind=OutcomeKind.PLAYER0_ELIMINATED, turn=game_length)
    else:
        outcome = GameOutcome(kind=OutcomeKind.DRAW, turn=game_length)
    extra: dict[str, Any] = {}
    if exclusion != Exclusion.NONE:
        extra["exclusion_reason"] = "excluded for the test"
    return GameRecord(
        condition=condition,
        seed=seed,
        spec=Condition(name=condition),
        game=GameConfig(player_count=len(peak)),
        archetypes=[archetype] + ["beta"] * (len(peak) - 1),
        outcome=outcome,
        game_length=game_length,
        survived_turns=[game_length if survived is None else survived] + [game_length] * (len(peak) - 1),
        final_scores=list(final if final is not None else peak),
        peak_scores=list(peak),
        grand_by_turn=list(grand),
        strategy_changes=[StrategyChange(turn=i, writer=w, grand=GrandStrategy.CULTURE) for i, w in enumerate(changes)],
        persona_changes=[PersonaChange(turn=i, changed={"WarBias": 2}) for i in range(persona_changes)],
        policies=[PolicyPick(turn=t, branch=b, policy=p) for t, b, p in policies],
        ideology=ideology,
        episodes=[
            EpisodeSummary(
                turn=t,
                outcome=EpisodeOutcome.COMPLETED,
                rounds=1,
                calls=1,
                input_tokens=i,
                output_tokens=o,
                token_method="bytes/4",
            )
            for t, i, o in tokens
        ],
        exclusion=exclusion,
        **extra,
    )


@pytest.fixture
def make_record() -> RecordFactory:
    return _record


@pytest.fixture
def records(make_record: RecordFactory) -> list[GameRecord]:
    """Two games of `llm`, one of `vpp` and one excluded game."""
    culture_then_space = [GrandStrategy.CULTURE] * 5 + [GrandStrategy.SPACESHIP] * 5
    return [
        make_record(
            "llm",
            1,
            winner=0,
            victory=VictoryKind.CULTURAL,
            peak=(30, 20),
            grand=culture_then_space,
            changes=("override", "builtin"),
            persona_changes=1,
            policies=[(3, "tradition", "aristocracy"), (7, "freedom", "liberty")],
            ideology=Ideology.FREEDOM,
            tokens=[(0, 100, 10), (1, 200, 20)],
        ),
        make_record(
            "llm",
            2,
            winner=1,
            victory=VictoryKind.DOMINATION,
            archetype="beta",
            survived=5,
            peak=(10, 40),
            final=(5, 40),
            grand=[GrandStrategy.CONQUEST] * 5,
            changes=("override",),
            tokens=[(0, 300, 30)],
        ),
        make_record("vpp", 1, peak=(0, 0), grand=[None] * 10),
        make_record("vpp", 2, winner=0, exclusion=Exclusion.GAP15),
    ]
