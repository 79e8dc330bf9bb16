"""Play one game of an experiment and assemble its record."""

import asyncio
import contextlib
import logging
from typing import Any, NamedTuple

import numpy as np

from mb_hybrid4x.bridge.host import GameHost
from mb_hybrid4x.config import EpisodeSettings, LlmSettings
from mb_hybrid4x.core.errors import TransportError
from mb_hybrid4x.engine.game import compute_score, new_game
from mb_hybrid4x.engine.models import EventKind, GameConfig, GameState
from mb_hybrid4x.harness.models import (
    GAP_EXCLUSION_RUN,
    Condition,
    EpisodeSummary,
    Exclusion,
    FaultPlan,
    GameOutcome,
    GameRecord,
    OutcomeKind,
    PersonaChange,
    PolicyPick,
    StrategistKind,
    StrategyChange,
    longest_gap_run,
)
from mb_hybrid4x.strategist.episode import episode_context, run_decision_episode
from mb_hybrid4x.strategist.llm import LlmClient, LlmStrategist
from mb_hybrid4x.strategist.mock import DEFAULT_TRANSCRIPT, MockChatEndpoint, load_transcript
from mb_hybrid4x.strategist.models import EpisodeContext, RoundResult, Strategist, StrategistReply
from mb_hybrid4x.strategist.scripted import BuiltinStrategist, Script, ScriptedStrategist
from mb_hybrid4x.strategy.models import Persona, StrategySet

logger = logging.getLogger(__name__)

# Seeds the fault draws apart from the engine's own stream.
FAULT_STREAM = 0xFA17

type GameRun = tuple[GameRecord, list[dict[str, Any]]]


class PlayedGame(NamedTuple):
    """A finished game."""

    record: GameRecord
    transcripts: list[dict[str, Any]]
    state: GameState


class FaultInjector:
    """Wraps a strategist and fails whole episodes with a transport error according to a fault plan."""

    def __init__(self, inner: Strategist, plan: FaultPlan, seed: int) -> None:
        """Draw failures for the game with this seed."""
        self.inner = inner
        self.name = inner.name
        self.plan = plan
        self._rng = np.random.default_rng((seed, FAULT_STREAM))
        self._burst_left = 0
        self._episode: str | None = None
        self._failing = False

    async def decide(self, ctx: EpisodeContext, previous: list[RoundResult]) -> StrategistReply:
        """Fail while a burst lasts, otherwise delegate."""
        if ctx.episode_id != self._episode:
            self._episode = ctx.episode_id
            if self._burst_left == 0 and self._rng.random() < self.plan.failure_probability:
                self._burst_left = self.plan.burst_length
            self._failing = self._burst_left > 0
            if self._failing:
                self._burst_left -= 1
        if self._failing:
            raise TransportError("Injected transport failure.")
        return await self.inner.decide(ctx, previous)


def build_strategist(condition: Condition, llm: LlmSettings | None, stack: contextlib.AsyncExitStack) -> Strategist:
    """Strategist for player 0 under a condition. HTTP clients are closed with `stack`."""
    match condition.strategist:
        case StrategistKind.BUILTIN:
            return BuiltinStrategist()
        case StrategistKind.SCRIPTED:
            if condition.script_path is not None:
                return ScriptedStrategist(Script.load(condition.script_path))
            return ScriptedStrategist(Script(preset=condition.script))
        case StrategistKind.MOCK:
            endpoint = MockChatEndpoint(list(load_transcript(condition.transcript or DEFAULT_TRANSCRIPT)))
            client = LlmClient(llm or LlmSettings(), transport=endpoint.transport)
            stack.push_async_callback(client.aclose)
            return LlmStrategist(client, name="mock")
        case StrategistKind.LLM:
            client = LlmClient(llm or LlmSettings())
            stack.push_async_callback(client.aclose)
            return LlmStrategist(client)


def _persona_diff(before: Persona, after: Persona) -> dict[str, int]:
    old, new = before.as_pascal(), after.as_pascal()
    return {k: v for k, v in new.items() if old[k] != v}


def _outcome(state: GameState) -> GameOutcome:
    if state.victory is not None:
        v = state.victory
        return GameOutcome(kind=OutcomeKind.VICTORY, winner=v.winner, victory=v.kind, turn=v.turn)
    if not state.players[0].alive:
        return GameOutcome(kind=OutcomeKind.PLAYER0_ELIMINATED, turn=state.turn)
    return GameOutcome(kind=OutcomeKind.DRAW, turn=state.turn)


class _Recorder:
    """Collects player 0's per-turn history while the game runs."""

    def __init__(self, state: GameState) -> None:
        self.peak = [0] * len(state.players)
        self.grand_by_turn: list[Any] = []
        self.strategy_changes: list[StrategyChange] = []
        self.persona_changes: list[PersonaChange] = []
        self.episodes: list[EpisodeSummary] = []
        self.transcripts: list[dict[str, Any]] = []
        self._active: StrategySet | None = None

    def after_round(self, host: GameHost, turn: int) -> None:
        seat = host.seats[0]
        active = seat.active
        self.grand_by_turn.append(active.grand if active is not None else None)
        if active is not None and self._active is not None and not active.same_choices(self._active):
            self.strategy_changes.append(
                StrategyChange(
                    turn=turn, writer=seat.strategy_writer, grand=active.grand, economic=active.economic, military=active.military
                )
            )
        self._active = active
        for p in host.state.players:
            self.peak[p.id] = max(self.peak[p.id], compute_score(host.state, p.id))


async def play_game(
    condition: Condition,
    seed: int,
    game: GameConfig,
    episode: EpisodeSettings | None = None,
    fault: FaultPlan | None = None,
    llm: LlmSettings | None = None,
) -> PlayedGame:
    """Play a game to the end with player 0 under the condition and everyone else on the builtin AI.

    Returns:
        The record, the episode transcripts of player 0 and the final state.

    """
    episode = episode or EpisodeSettings()
    state = new_game(game.model_copy(update={"seed": seed}))
    host = GameHost(state)
    rec = _Recorder(state)
    logger.info("Game started condition=%s seed=%d players=%d", condition.name, seed, len(state.players))

    async with contextlib.AsyncExitStack() as stack:
        strategist = build_strategist(condition, llm, stack)
        if fault is not None and fault.failure_probability > 0:
            strategist = FaultInjector(strategist, fault, seed)
        while not state.is_terminal and state.players[0].alive:
            turn = state.turn
            persona_before = host.seats[0].overrides.persona
            ctx = episode_context(host, 0, episode)
            decision = await run_decision_episode(ctx, strategist)
            rec.episodes.append(
                EpisodeSummary(
                    turn=turn,
                    outcome=decision.outcome,
                    rounds=decision.rounds,
                    calls=len(decision.calls),
                    input_tokens=decision.input_tokens,
                    output_tokens=decision.output_tokens,
                    token_method=decision.token_method,
                )
            )
            rec.transcripts.append(
                {
                    "turn": turn,
                    "outcome": decision.outcome,
                    "latency_ms": decision.latency_ms,
                    "rounds": list(decision.transcript),
                }
            )
            if changed := _persona_diff(persona_before, host.seats[0].overrides.persona):
                rec.persona_changes.append(PersonaChange(turn=turn, changed=changed))
            host.advance()
            rec.after_round(host, turn)

    outcome = _outcome(state)
    played = len(rec.grand_by_turn)
    survived = [min(played, p.eliminated_turn) if p.eliminated_turn is not None else played for p in state.players]
    policies = [
        PolicyPick(turn=e.turn, branch=str(e.payload.get("branch")), policy=str(e.payload.get("policy")))
        for e in state.event_log
        if e.kind == EventKind.POLICY_ADOPTED and e.player == 0
    ]
    gap_run = longest_gap_run(rec.episodes)
    excluded = gap_run >= GAP_EXCLUSION_RUN
    record = GameRecord(
        condition=condition.name,
        seed=seed,
        spec=condition,
        game=game,
        episode=episode,
        fault=fault,
        archetypes=[p.archetype for p in state.players],
        outcome=outcome,
        game_length=played,
        survived_turns=survived,
        final_scores=[compute_score(state, p.id) for p in state.players],
        peak_scores=rec.peak,
        grand_by_turn=rec.grand_by_turn,
        strategy_changes=rec.strategy_changes,
        persona_changes=rec.persona_changes,
        policies=policies,
        ideology=state.players[0].ideology,
        episodes=rec.episodes,
        exclusion=Exclusion.GAP15 if excluded else Exclusion.NONE,
        exclusion_reason=f"{gap_run} consecutive strategy gaps" if excluded else None,
    )
    logger.info(
        "Game finished condition=%s seed=%d outcome=%s winner=%s turns=%d exclusion=%s",
        condition.name,
        seed,
        outcome.kind,
        outcome.winner,
        played,
        record.exclusion,
    )
    return PlayedGame(record, rec.transcripts, state)


def crash_record(condition: Condition, seed: int, game: GameConfig, reason: str) -> GameRecord:
    """Placeholder record for a game that could not finish."""
    return GameRecord(
        condition=condition.name,
        seed=seed,
        spec=condition,
        game=game,
        outcome=GameOutcome(kind=OutcomeKind.CRASHED),
        exclusion=Exclusion.CRASH,
        exclusion_reason=reason,
    )


def run_game(
    condition: Condition,
    seed: int,
    game: GameConfig,
    episode: EpisodeSettings | None = None,
    fault: FaultPlan | None = None,
    llm: LlmSettings | None = None,
) -> GameRun:
    """Synchronous `play_game` that turns any failure into a crash record."""
    try:
        played = asyncio.run(play_game(condition, seed, game, episode, fault, llm))
    except Exception as e:
        logger.exception("Game crashed condition=%s seed=%d", condition.name, seed)
        return crash_record(condition, seed, game, f"{type(e).__name__}: {e}"), []
    return played.record, played.transcripts
