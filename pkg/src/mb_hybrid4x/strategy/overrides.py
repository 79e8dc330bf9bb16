"""The override queue: choices an external strategist has made for a player."""

import logging
from collections.abc import Mapping
from typing import Any

from pydantic import ValidationError

from mb_hybrid4x.core.errors import OptionRejectedError, SchemaError
from mb_hybrid4x.engine.models import PlayerState
from mb_hybrid4x.strategy.catalog import find_entry, validate_choice
from mb_hybrid4x.strategy.models import (
    ChoiceKind,
    DecisionKind,
    OptionCatalog,
    OverrideState,
    Persona,
    StrategySet,
)

logger = logging.getLogger(__name__)


def _resolve(kind: ChoiceKind, choice: str, catalog: OptionCatalog, alongside: list[str] | None = None) -> str:
    """Catalog id of a choice, or OptionRejectedError naming the value."""
    error = validate_choice(kind, choice, catalog, alongside=alongside)
    if error is not None:
        raise OptionRejectedError(error.message, field=choice)
    entry = find_entry(kind, choice, catalog)
    if entry is None:  # validate_choice already guarantees membership
        raise OptionRejectedError(f"{kind} option {choice!r} rejected.", field=choice)
    return entry.id


def parse_strategy_choice(choice: Mapping[str, Any], catalog: OptionCatalog, rationale: str) -> StrategySet:
    """Validate a {grand, economic, military} mapping against the catalog.

    Raises:
        OptionRejectedError: If any name is not a current option or two choices are exclusive.
        SchemaError: If the mapping has the wrong shape.

    """
    grand = choice.get("grand")
    economic = choice.get("economic", [])
    military = choice.get("military", [])
    if not isinstance(grand, str) or not isinstance(economic, list) or not isinstance(military, list):
        raise SchemaError("Strategy needs 'grand' as a string and 'economic'/'military' as lists.", field="grand")
    names = [str(n) for n in (*economic, *military)]
    _resolve(ChoiceKind.GRAND, grand, catalog)
    for name in economic:
        _resolve(ChoiceKind.ECONOMIC, str(name), catalog, alongside=names)
    for name in military:
        _resolve(ChoiceKind.MILITARY, str(name), catalog, alongside=names)
    try:
        return StrategySet.parse(grand, economic, military, rationale)
    except ValidationError as e:
        raise OptionRejectedError(f"Invalid strategy set: {e.errors()[0]['msg']}", field=grand) from e


def queue_override(
    kind: DecisionKind, choice: Any, rationale: str, overrides: OverrideState, catalog: OptionCatalog
) -> OverrideState:
    """Store a choice and its rationale, and mark the category controlled.

    Returns a new OverrideState; the input is never modified, so a rejected choice leaves the
    caller's state untouched.

    Args:
        kind: Decision category.
        choice: Tech or policy id/name, a PascalCase persona mapping, a strategy mapping or a StrategySet.
        rationale: Non-empty explanation, shown in the next state document.
        overrides: Current override state.
        catalog: Options valid this turn.

    Raises:
        OptionRejectedError: If the choice is not in the catalog.
        InvalidPersonaError: If a persona value is unknown or out of range.
        SchemaError: If the rationale is empty or the choice has the wrong shape.

    """
    if not isinstance(rationale, str) or not rationale.strip():
        raise SchemaError("A non-empty rationale is required.", field="rationale")

    result = overrides.model_copy(deep=True)
    match kind:
        case DecisionKind.RESEARCH:
            result.next_research = _resolve(ChoiceKind.RESEARCH, str(choice), catalog)
        case DecisionKind.POLICY:
            result.next_policy = _resolve(ChoiceKind.POLICY, str(choice), catalog)
        case DecisionKind.PERSONA:
            if not isinstance(choice, Mapping):
                raise SchemaError("Persona choice must map parameter names to integers.", field="persona")
            result.persona = Persona.from_values(dict(choice), overrides.persona)
        case DecisionKind.STRATEGY:
            if isinstance(choice, StrategySet):
                choice = {"grand": choice.grand, "economic": list(choice.economic), "military": list(choice.military)}
            if not isinstance(choice, Mapping):
                raise SchemaError("Strategy choice must be a mapping.", field="strategy")
            result.strategy = parse_strategy_choice(choice, catalog, rationale)

    result.controlled.add(kind)
    result.rationales[kind] = rationale
    logger.debug("Override queued player=%d kind=%s", catalog.player, kind)
    return result


def settle_queue(overrides: OverrideState, player: PlayerState) -> OverrideState:
    """Drop queued research and policy once the engine has taken them up."""
    result = overrides.model_copy(deep=True)
    if result.next_research is not None and (
        result.next_research in player.techs_known or result.next_research == player.current_research
    ):
        result.next_research = None
    if result.next_policy is not None and result.next_policy in player.policies_adopted:
        result.next_policy = None
    return result
