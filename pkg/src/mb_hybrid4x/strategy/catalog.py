"""Option catalogs and choice validation."""

from collections.abc import Iterable

from mb_hybrid4x.core.errors import DeadPlayerError, UnknownPlayerError
from mb_hybrid4x.engine.models import GameState
from mb_hybrid4x.engine.progress import available_policies, available_techs, opens_branch
from mb_hybrid4x.engine.rules import load_ruleset
from mb_hybrid4x.strategy.models import (
    CatalogEntry,
    ChoiceError,
    ChoiceKind,
    EconomicStrategy,
    GrandStrategy,
    MilitaryStrategy,
    OptionCatalog,
    StrategySet,
)
from mb_hybrid4x.strategy.tables import StrategyEntry, exclusive_conflict, load_strategy_table

NEW_BRANCH_SUFFIX = " (New Branch)"


def default_strategy(state: GameState, player: int) -> StrategySet:
    """Strategy set a player starts with: the archetype's favored grand strategy and nothing else."""
    return StrategySet(grand=GrandStrategy(load_ruleset().archetypes[state.players[player].archetype].grand_bias))


def _strategy_entries(section: dict[str, StrategyEntry], names: Iterable[str]) -> tuple[CatalogEntry, ...]:
    return tuple(CatalogEntry(id=n, name=n, description=section[n].description) for n in names)


def option_catalog(state: GameState, player: int, active: StrategySet | None = None) -> OptionCatalog:
    """Every legal choice for a player this turn.

    Strategies come in enum order; research follows ruleset order, policies follow branch order with
    ideologies last. Branch-opening policies are named with a "(New Branch)" suffix.

    Args:
        state: Current game state.
        player: Player index.
        active: The player's current strategy set; defaults to the archetype's starting set.

    Raises:
        UnknownPlayerError: If the player index is out of range.
        DeadPlayerError: If the player has been eliminated.

    """
    if not 0 <= player < len(state.players):
        raise UnknownPlayerError(f"Unknown player: {player}.", field="player")
    me = state.players[player]
    if not me.alive:
        raise DeadPlayerError(f"Player {player} has been eliminated.", field="player")

    rules = load_ruleset()
    table = load_strategy_table()
    research = []
    for tech_id in available_techs(me):
        tech = rules.techs[tech_id]
        unlocks = tuple(t.name for t in rules.techs.values() if tech_id in t.requires)
        research.append(CatalogEntry(id=tech_id, name=tech.name, description=tech.description, leads_to=unlocks))
    policies = []
    for policy_id in available_policies(me):
        policy = rules.policies[policy_id]
        name = policy.name + (NEW_BRANCH_SUFFIX if opens_branch(me, policy_id) and policy.rank == 1 else "")
        policies.append(CatalogEntry(id=policy_id, name=name, description=policy.description))

    return OptionCatalog(
        player=player,
        turn=state.turn,
        grand=_strategy_entries(table.grand, GrandStrategy),
        economic=_strategy_entries(table.economic, EconomicStrategy),
        military=_strategy_entries(table.military, MilitaryStrategy),
        research=tuple(research),
        policies=tuple(policies),
        active=active or default_strategy(state, player),
    )


def find_entry(kind: ChoiceKind, choice: str, catalog: OptionCatalog) -> CatalogEntry | None:
    """Catalog entry matching a choice by id, display name, or name without the new-branch suffix."""
    for entry in catalog.entries(kind):
        if choice in {entry.id, entry.name, entry.name.removesuffix(NEW_BRANCH_SUFFIX)}:
            return entry
    return None


def edit_distance(a: str, b: str) -> int:
    """Levenshtein distance between two strings."""
    previous = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        current = [i]
        for j, cb in enumerate(b, start=1):
            current.append(min(previous[j] + 1, current[j - 1] + 1, previous[j - 1] + (ca != cb)))
        previous = current
    return previous[-1]


def nearest_option(choice: str, entries: Iterable[CatalogEntry]) -> str | None:
    """Display name closest to the choice; ties go to the earlier entry."""
    best: tuple[int, int, str] | None = None
    for position, entry in enumerate(entries):
        key = (edit_distance(choice, entry.name), position, entry.name)
        if best is None or key < best:
            best = key
    return best[2] if best else None


def validate_choice(
    kind: ChoiceKind, choice: str, catalog: OptionCatalog, *, alongside: Iterable[str] | None = None
) -> ChoiceError | None:
    """Check a single choice against the catalog. Never raises and never mutates.

    Economic and military choices must also not clash with the strategies they would be active
    with: `alongside` when given, otherwise the catalog's active set.

    Returns:
        None when the choice is acceptable, otherwise the reason with the nearest legal option.

    """
    entries = catalog.entries(kind)
    entry = find_entry(kind, choice, catalog)
    if entry is None:
        reason = "not among the current options" if entries else "no options are available"
        return ChoiceError(kind=kind, value=choice, reason=reason, suggestion=nearest_option(choice, entries))

    if kind in {ChoiceKind.ECONOMIC, ChoiceKind.MILITARY}:
        active = catalog.active
        others = list(alongside) if alongside is not None else [*active.economic, *active.military]
        conflict = exclusive_conflict([*others, entry.id])
        if conflict is not None and entry.id in conflict:
            other = conflict[1] if conflict[0] == entry.id else conflict[0]
            return ChoiceError(kind=kind, value=choice, reason=f"cannot be active together with {other}")
    return None
