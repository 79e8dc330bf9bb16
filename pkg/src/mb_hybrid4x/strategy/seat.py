"""A player's macro seat: builtin decisions merged with whatever an external strategist controls."""

import logging

from mb_hybrid4x.engine.models import GameState, PlayerDirective
from mb_hybrid4x.strategy.mapping import archetype_persona, compose_directive
from mb_hybrid4x.strategy.models import DecisionKind, OverrideState, StrategySet
from mb_hybrid4x.strategy.overrides import settle_queue
from mb_hybrid4x.tactical.macro import builtin_macro_decide

logger = logging.getLogger(__name__)


class PlayerSeat:
    """Per-player macro state carried between turns.

    Categories marked controlled in `overrides` are taken from there; everything else comes from
    the builtin macro strategist each turn. `active` is the strategy set handed to the engine last,
    and `strategy_writer` says which of the two produced it.
    """

    def __init__(self, player: int, archetype: str) -> None:
        """Start with the archetype persona and nothing controlled."""
        self.player = player
        self.archetype = archetype
        self.overrides = OverrideState(persona=archetype_persona(archetype))
        self.active: StrategySet | None = None
        self.last_decision: int | None = None
        self.strategy_writer = "builtin"

    def commit(self, overrides: OverrideState, turn: int) -> None:
        """Adopt the override state of a closed decision episode."""
        self.overrides = overrides
        self.last_decision = turn

    def directive(self, state: GameState) -> PlayerDirective:
        """Directive for this player's next turn."""
        me = state.players[self.player]
        decision = builtin_macro_decide(state, self.player)
        self.overrides = settle_queue(self.overrides, me)
        ov = self.overrides

        strategy, self.strategy_writer = decision.strategy, "builtin"
        if ov.is_controlled(DecisionKind.STRATEGY) and ov.strategy is not None:
            strategy, self.strategy_writer = ov.strategy, "override"
        research = decision.next_research
        if ov.is_controlled(DecisionKind.RESEARCH) and ov.next_research is not None:
            research = ov.next_research
        policy = decision.next_policy
        if ov.is_controlled(DecisionKind.POLICY) and ov.next_policy is not None:
            policy = ov.next_policy

        if not strategy.same_choices(self.active):
            logger.debug("Strategy set player=%d turn=%d grand=%s", self.player, state.turn, strategy.grand)
        self.active = strategy
        return compose_directive(
            self.archetype,
            strategy,
            ov.persona,
            adjustments=decision.adjustments,
            relations=me.diplomacy,
            next_research=research,
            next_policy=policy,
        )
