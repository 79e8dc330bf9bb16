"""Strategy-to-flavor and persona-to-diplomacy mappings, and directive assembly."""

from collections import Counter
from collections.abc import Iterable, Mapping

from mb_hybrid4x.core.errors import UnknownStrategyError
from mb_hybrid4x.engine.models import DiplomacyWeights, PlayerDirective, Relation, Stance
from mb_hybrid4x.engine.rules import load_ruleset
from mb_hybrid4x.strategy.models import Persona, StrategySet
from mb_hybrid4x.strategy.tables import load_persona_weights, load_strategy_table
from mb_hybrid4x.tactical.flavors import FlavorVector, base_flavors


def strategy_deltas(strategy_set: StrategySet, adjustments: Iterable[str] = ()) -> dict[str, int]:
    """Summed flavor deltas of the grand strategy, every active strategy and any adjustments.

    Raises:
        UnknownStrategyError: If an adjustment name is not in the table.

    """
    table = load_strategy_table()
    total: Counter[str] = Counter()
    names = [strategy_set.grand, *strategy_set.economic, *strategy_set.military, *adjustments]
    for name in names:
        entry = table.entry(name)
        if entry is None:
            raise UnknownStrategyError(f"Unknown strategy: {name}.", field=name)
        total.update(entry.deltas)
    return dict(total)


def apply_strategy_set(strategy_set: StrategySet, base: FlavorVector, adjustments: Iterable[str] = ()) -> FlavorVector:
    """Base flavors plus the summed strategy deltas, clamped once.

    Summing before clamping keeps the result independent of strategy order.
    """
    return base.plus(strategy_deltas(strategy_set, adjustments))


def apply_persona(persona: Persona, relations: Mapping[int, Relation] | None = None) -> DiplomacyWeights:
    """Map persona parameters to stance-transition propensities.

    Every weight is a floored linear function of the parameters (see `data/persona.toml`), so each
    weight is monotone in each parameter. With `relations`, war propensity is split across the wars
    already being fought.
    """
    values = persona.as_pascal()
    weights = {name: weight.evaluate(values) for name, weight in load_persona_weights().items()}
    if relations:
        wars = sum(1 for r in relations.values() if r.stance == Stance.WAR)
        weights["war"] /= 1 + wars
    return DiplomacyWeights(**weights)


def archetype_persona(archetype: str) -> Persona:
    """Starting persona of an archetype."""
    return Persona.from_values(load_ruleset().archetypes[archetype].persona)


def compose_directive(
    archetype: str,
    strategy_set: StrategySet,
    persona: Persona,
    *,
    adjustments: Iterable[str] = (),
    relations: Mapping[int, Relation] | None = None,
    next_research: str | None = None,
    next_policy: str | None = None,
) -> PlayerDirective:
    """Everything the engine needs from the macro layer for one player's turn."""
    flavors = apply_strategy_set(strategy_set, base_flavors(archetype), adjustments)
    return PlayerDirective(
        flavors=flavors.as_dict(),
        diplomacy=apply_persona(persona, relations),
        next_research=next_research,
        next_policy=next_policy,
    )
