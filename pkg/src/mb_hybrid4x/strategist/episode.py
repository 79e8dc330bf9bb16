"""Decision-episode driver."""

import asyncio
import logging
import time

from mb_hybrid4x.bridge.host import GameHost
from mb_hybrid4x.bridge.tool_server import FORCED_RATIONALE
from mb_hybrid4x.codec.prompts import render_system_prompt
from mb_hybrid4x.codec.tokens import DEFAULT_ESTIMATOR, estimate_tokens
from mb_hybrid4x.codec.tools import ToolName
from mb_hybrid4x.config import EpisodeSettings
from mb_hybrid4x.core.errors import TransportError
from mb_hybrid4x.strategist.models import (
    DecisionRecord,
    EpisodeContext,
    EpisodeOutcome,
    RoundResult,
    Strategist,
    ToolCallRecord,
)
from mb_hybrid4x.strategy.models import DecisionKind

logger = logging.getLogger(__name__)


def episode_context(host: GameHost, player: int, settings: EpisodeSettings) -> EpisodeContext:
    """Context for the player's episode at the current turn boundary."""
    turn = host.state.turn
    return EpisodeContext(
        host=host,
        player=player,
        turn=turn,
        episode_id=f"p{player}-t{turn}",
        system_prompt=render_system_prompt(host.state, player),
        doc=host.state_doc(player),
        catalog=host.catalog(player),
        deadline_sec=settings.deadline_sec,
        round_cap=settings.round_cap,
        corrective_rounds=settings.corrective_rounds,
    )


async def run_decision_episode(ctx: EpisodeContext, strategist: Strategist) -> DecisionRecord:
    """Run strategist rounds until a finishing tool, the deadline or the round cap.

    Accepted calls are staged in the player's session. A finishing tool commits them. Hitting the
    deadline between rounds or the round cap closes the episode with a synthetic keep-status-quo
    (forced_close). A strategist call still pending at the deadline gives timeout_gap, and a
    transport failure gives error_gap; both discard what was staged, so the previous strategy
    persists. A round with rejected calls earns a corrective round while the budget lasts.
    """
    host, player = ctx.host, ctx.player
    started = time.monotonic()
    calls: list[ToolCallRecord] = []
    transcript: list[dict[str, object]] = []
    previous: list[RoundResult] = []
    input_tokens = output_tokens = rounds = 0
    estimated = False
    corrective_left = ctx.corrective_rounds
    outcome: EpisodeOutcome | None = None
    session = host.open_episode(player)

    while outcome is None:
        remaining = ctx.deadline_sec - (time.monotonic() - started)
        if rounds >= ctx.round_cap or remaining <= 0:
            outcome = EpisodeOutcome.FORCED_CLOSE
            break
        try:
            reply = await asyncio.wait_for(strategist.decide(ctx, previous), timeout=remaining)
        except TimeoutError:
            outcome = EpisodeOutcome.TIMEOUT_GAP
            break
        except TransportError as e:
            logger.warning("Strategist transport failed player=%d turn=%d: %s", player, ctx.turn, e.message)
            outcome = EpisodeOutcome.ERROR_GAP
            break

        rounds += 1
        if reply.exchange is not None:
            transcript.append(reply.exchange)
        if reply.input_tokens is None:
            estimated = True
            sent = "".join(r.response.model_dump_json() for r in previous)
            if rounds == 1:
                sent = ctx.system_prompt + ctx.doc.text
            input_tokens += estimate_tokens(sent).input_tokens
        else:
            input_tokens += reply.input_tokens
        if reply.output_tokens is None:
            estimated = True
            output_tokens += estimate_tokens("".join(c.model_dump_json() for c in reply.calls)).input_tokens
        else:
            output_tokens += reply.output_tokens

        previous = []
        for request in reply.calls:
            response = host.call_tool(player, request)
            previous.append(RoundResult(request=request, response=response))
            error = response.error
            calls.append(
                ToolCallRecord(
                    round=rounds,
                    name=request.name,
                    arguments=request.arguments,
                    ok=response.ok,
                    error_code=error.code if error else None,
                    error_message=error.message if error else None,
                )
            )
        if session.closed:
            outcome = EpisodeOutcome.COMPLETED
        elif any(not r.response.ok for r in previous):
            if corrective_left == 0:
                outcome = EpisodeOutcome.FORCED_CLOSE
            corrective_left -= 1

    if outcome == EpisodeOutcome.FORCED_CLOSE:
        host.force_close(player)
        rationale = session.staged.rationales.get(DecisionKind.STRATEGY, FORCED_RATIONALE)
        calls.append(ToolCallRecord(round=rounds, name=ToolName.KEEP_STATUS_QUO, arguments={"Rationale": rationale}, ok=True))
        logger.info("Episode forced closed player=%d turn=%d rounds=%d", player, ctx.turn, rounds)
    elif outcome == EpisodeOutcome.COMPLETED:
        logger.debug("Episode completed player=%d turn=%d rounds=%d", player, ctx.turn, rounds)
    else:
        host.discard_episode(player)
        logger.info("Episode gap player=%d turn=%d outcome=%s", player, ctx.turn, outcome)

    rationales: dict[DecisionKind, str] = {}
    if outcome in {EpisodeOutcome.COMPLETED, EpisodeOutcome.FORCED_CLOSE}:
        rationales = dict(session.staged.rationales)
    return DecisionRecord(
        turn=ctx.turn,
        player=player,
        episode_id=ctx.episode_id,
        calls=tuple(calls),
        rationales=rationales,
        input_tokens=input_tokens,
        output_tokens=output_tokens,
        token_method=DEFAULT_ESTIMATOR if estimated else "usage",
        rounds=rounds,
        latency_ms=(time.monotonic() - started) * 1000,
        outcome=outcome,
        transcript=tuple(transcript),
    )
