"""The builtin macro strategist: picks strategies, research and policies from the game situation alone.

It plays the role of the algorithmic AI's own strategic modules, both for baseline players and for
every category an external strategist has not taken over.
"""

from mb_hybrid4x.engine.economy import is_coastal, military_strength, unit_class
from mb_hybrid4x.engine.models import GameState, PlayerState, Stance, UnitClass
from mb_hybrid4x.engine.progress import available_policies, available_techs, cheapest_tech
from mb_hybrid4x.engine.rules import load_ruleset
from mb_hybrid4x.strategy.models import (
    GRAND_VICTORY,
    EconomicStrategy,
    GrandStrategy,
    MilitaryStrategy,
    StrategyDecision,
    StrategySet,
)
from mb_hybrid4x.tactical.flavors import base_flavors
from mb_hybrid4x.tactical.production import free_sites

GRAND_BIAS_BONUS = 50
DISABLED_PENALTY = 1000
LOSING_RATIO = 0.5
WINNING_RATIO = 1.5
RECON_TURNS = 30
RECON_NEEDED_SHARE = 0.3
RECON_DONE_SHARE = 0.6
SMALL_LANDMASS = 40
PIETY_FAITH_RATE = 3
TECH_LEADER_MINIMUM = 3

# Ideology favored by each grand strategy when one can be adopted.
_IDEOLOGY_FOR: dict[GrandStrategy, str] = {
    GrandStrategy.CULTURE: "freedom",
    GrandStrategy.SPACESHIP: "freedom",
    GrandStrategy.UNITED_NATIONS: "order",
    GrandStrategy.CONQUEST: "autocracy",
}
# Branch each grand strategy opens first.
_BRANCH_FOR: dict[GrandStrategy, str] = {
    GrandStrategy.CULTURE: "Tradition",
    GrandStrategy.SPACESHIP: "Tradition",
    GrandStrategy.UNITED_NATIONS: "Patronage",
    GrandStrategy.CONQUEST: "Honor",
}


def _enemies(state: GameState, me: PlayerState) -> list[int]:
    return [p.id for p in state.alive_players() if p.id != me.id and me.stance_toward(p.id) == Stance.WAR]


def war_ratio(state: GameState, me: PlayerState) -> float | None:
    """Own military strength over the combined strength of everyone at war with us; None at peace."""
    enemies = _enemies(state, me)
    if not enemies:
        return None
    enemy_strength = sum(military_strength(state, e) for e in enemies)
    return military_strength(state, me.id) / max(1, enemy_strength)


def grand_fitness(state: GameState, me: PlayerState) -> dict[GrandStrategy, int]:
    """Score of each grand strategy for a player; the highest wins, ties in enum order."""
    rules = load_ruleset()
    flavors = base_flavors(me.archetype)
    cities = state.cities_of(me.id)
    wonders = sum(1 for c in cities for b in c.buildings if rules.buildings[b].wonder)
    patron_minimum = rules.limits.influence_patron_minimum
    patronized = sum(1 for c in state.cities.values() if c.is_city_state and c.influence.get(me.id, 0) >= patron_minimum)
    ratio = war_ratio(state, me)
    relative_army = military_strength(state, me.id) / max(
        1, max((military_strength(state, p.id) for p in state.alive_players() if p.id != me.id), default=1)
    )
    fitness = {
        GrandStrategy.CULTURE: flavors["Culture"] + flavors["Wonder"] // 2 + 2 * me.culture_rate + 10 * wonders,
        GrandStrategy.UNITED_NATIONS: flavors["Diplomacy"] + flavors["Gold"] // 2 + 10 * patronized,
        GrandStrategy.SPACESHIP: flavors["Science"] + flavors["Production"] // 2 + 3 * len(me.techs_known)
        + 20 * me.spaceship_parts,
        GrandStrategy.CONQUEST: flavors["Offense"] + flavors["Defense"] // 2
        + max(-20, min(40, round(20 * (relative_army - 1)))) + (10 if ratio is not None and ratio >= 1 else 0),
    }
    fitness[GrandStrategy(rules.archetypes[me.archetype].grand_bias)] += GRAND_BIAS_BONUS
    for grand, victory in GRAND_VICTORY.items():
        if not state.config.enabled(victory):
            fitness[grand] -= DISABLED_PENALTY
    return fitness


def _economic(state: GameState, me: PlayerState) -> list[EconomicStrategy]:
    rules = load_ruleset()
    cities = state.cities_of(me.id)
    at_war = bool(_enemies(state, me))
    result: list[EconomicStrategy] = []

    sites = free_sites(state, me.id)
    if state.turn < rules.limits.early_game_turns and sites and not at_war:
        result.append(EconomicStrategy.EARLY_EXPANSION)
    elif not sites or at_war or me.happiness < 0:
        result.append(EconomicStrategy.ENOUGH_EXPANSION)

    explored = len(me.revealed) / len(state.tiles)
    if state.turn < RECON_TURNS and explored < RECON_NEEDED_SHARE and not at_war:
        result.append(EconomicStrategy.NEED_RECON)
    elif explored > RECON_DONE_SHARE:
        result.append(EconomicStrategy.ENOUGH_RECON)

    if me.happiness < 0:
        result.append(EconomicStrategy.NEED_HAPPINESS_CRITICAL)
    elif me.happiness <= 1 and len(cities) >= 2:
        result.append(EconomicStrategy.NEED_HAPPINESS)

    if any(is_coastal(state, c) for c in cities):
        result.append(EconomicStrategy.CITIES_NEED_NAVAL_GROWTH)

    capital = state.cities.get(me.original_capital) if me.original_capital is not None else None
    if capital is not None and state.turn < rules.limits.early_game_turns:
        region = state.tile_at(capital.x, capital.y).region
        if sum(1 for t in state.tiles if t.region == region) < SMALL_LANDMASS:
            result.append(EconomicStrategy.ISLAND_START)

    rivals = [p for p in state.alive_players() if p.id != me.id and me.has_met(p.id)]
    if len(me.techs_known) >= TECH_LEADER_MINIMUM and all(len(me.techs_known) > len(p.techs_known) for p in rivals):
        result.append(EconomicStrategy.TECH_LEADER)

    if me.faith_rate >= PIETY_FAITH_RATE:
        result.append(EconomicStrategy.STARTED_PIETY)
    return result


def _military(state: GameState, me: PlayerState) -> list[MilitaryStrategy]:
    rules = load_ruleset()
    ratio = war_ratio(state, me)
    if ratio is None:
        hostile = any(
            me.stance_toward(p.id) == Stance.HOSTILE for p in state.alive_players() if p.id != me.id and me.has_met(p.id)
        )
        return [MilitaryStrategy.WAR_MOBILIZATION] if hostile else []

    result = [MilitaryStrategy.AT_WAR]
    has_ranged = any(unit_class(u.unit_type) == UnitClass.RANGED for u in state.units_of(me.id))
    if state.turn < rules.limits.early_game_turns and not has_ranged:
        result.append(MilitaryStrategy.NEED_RANGED_EARLY)
    if ratio >= WINNING_RATIO:
        result.append(MilitaryStrategy.WINNING_WARS)
    elif ratio < LOSING_RATIO:
        result.append(MilitaryStrategy.LOSING_WARS)
    return result


def _research(me: PlayerState, grand: GrandStrategy) -> str | None:
    rules = load_ruleset()
    options = available_techs(me)
    aligned = [t for t in options if grand in rules.techs[t].grand]
    return cheapest_tech(aligned) or cheapest_tech(options)


def _policy(me: PlayerState, grand: GrandStrategy) -> str | None:
    rules = load_ruleset()
    options = available_policies(me)
    if not options:
        return None
    if _IDEOLOGY_FOR[grand] in options:
        return _IDEOLOGY_FOR[grand]
    started = {rules.policies[p].branch for p in me.policies_adopted}
    for policy_id in options:
        if rules.policies[policy_id].branch in started:
            return policy_id
    for policy_id in options:
        if rules.policies[policy_id].branch == _BRANCH_FOR[grand]:
            return policy_id
    return options[0]


def builtin_macro_decide(state: GameState, player: int) -> StrategyDecision:
    """Choose strategies, next research and next policy for a player. Pure: same state, same decision.

    Exclusive pairs never co-occur because each pair is decided by one if/elif.
    """
    me = state.players[player]
    fitness = grand_fitness(state, me)
    grand = max(GrandStrategy, key=lambda g: (fitness[g], -list(GrandStrategy).index(g)))
    strategy = StrategySet(grand=grand, economic=tuple(_economic(state, me)), military=tuple(_military(state, me)))
    adjustments = ("LosingMoney",) if me.gold_rate < 0 else ()
    return StrategyDecision(
        strategy=strategy,
        adjustments=adjustments,
        next_research=_research(me, grand),
        next_policy=_policy(me, grand),
    )
