"""Game lifecycle: setup, turn processing, victory and score."""

import logging
from collections.abc import Mapping

import numpy as np

from mb_hybrid4x.core.errors import InvalidConfigError, TerminalStateError, UnknownPlayerError
from mb_hybrid4x.engine import diplomacy
from mb_hybrid4x.engine.combat import resolve_attack
from mb_hybrid4x.engine.economy import (
    CityYield,
    city_yield,
    growth_threshold,
    military_strength,
    unit_class,
    update_rates,
)
from mb_hybrid4x.engine.entities import create_unit, destroy_unit, found_city, set_population
from mb_hybrid4x.engine.events import log_event
from mb_hybrid4x.engine.hexgrid import grid_for
from mb_hybrid4x.engine.mapgen import capital_anchors, city_state_sites, generate_map
from mb_hybrid4x.engine.models import (
    VICTORY_PRECEDENCE,
    City,
    Event,
    EventKind,
    GameConfig,
    GameState,
    PlayerDirective,
    PlayerState,
    Relation,
    Unit,
    UnitClass,
    VictoryKind,
    VictoryResult,
)
from mb_hybrid4x.engine.progress import adopt_policy, available_policies, available_techs, cheapest_tech
from mb_hybrid4x.engine.rng import make_rng, restore_rng, snapshot_rng
from mb_hybrid4x.engine.rules import load_ruleset
from mb_hybrid4x.engine.visibility import refresh_sight
from mb_hybrid4x.tactical.flavors import FlavorVector, base_flavors
from mb_hybrid4x.tactical.production import choose_city_production, production_context
from mb_hybrid4x.tactical.units import ActionKind, UnitAction, can_enter, plan_unit_turn
from mb_hybrid4x.tactical.zones import compute_tactical_zones

logger = logging.getLogger(__name__)

MIN_PLAYERS = 2
MAX_PLAYERS = 8
MIN_MAP_SIDE = 8
MAX_MAP_SIDE = 64
UNIT_HEAL = 10
FORTIFIED_HEAL = 20
CITY_HEAL = 10
FOOD_PER_POP = 2
# Upper bound on planner iterations per unit per turn.
_MAX_UNIT_STEPS = 8


def _validate(config: GameConfig) -> None:
    checks: list[tuple[bool, str, str]] = [
        (MIN_PLAYERS <= config.player_count <= MAX_PLAYERS, "player_count", f"must be in [{MIN_PLAYERS}, {MAX_PLAYERS}]"),
        (config.max_turns >= 1, "max_turns", "must be at least 1"),
        (MIN_MAP_SIDE <= config.map_width <= MAX_MAP_SIDE, "map_width", f"must be in [{MIN_MAP_SIDE}, {MAX_MAP_SIDE}]"),
        (MIN_MAP_SIDE <= config.map_height <= MAX_MAP_SIDE, "map_height", f"must be in [{MIN_MAP_SIDE}, {MAX_MAP_SIDE}]"),
        (1 <= config.archetype_pool_size <= MAX_PLAYERS, "archetype_pool_size", f"must be in [1, {MAX_PLAYERS}]"),
    ]
    for ok, field, rule in checks:
        if not ok:
            raise InvalidConfigError(f"Invalid game config: {field} {rule}.", field=field)


def new_game(config: GameConfig) -> GameState:
    """Create a fresh world from a config. Everything random is drawn from the config seed.

    Args:
        config: Game parameters.

    Returns:
        Turn-0 state: one capital, one warrior and one scout per player, plus the neutral city-states.

    Raises:
        InvalidConfigError: If a config field is out of range; the error names the field.

    """
    _validate(config)
    rules = load_ruleset()
    grid = grid_for(config.map_width, config.map_height)
    rng = make_rng(config.seed)
    tiles = generate_map(config.map_width, config.map_height, rng, rules, grid)

    pool = list(rules.archetypes)[: config.archetype_pool_size]
    picks = rng.choice(len(pool), size=config.player_count, replace=len(pool) < config.player_count)
    seats = rng.permutation(config.player_count)
    players = [
        PlayerState(
            id=pid,
            archetype=pool[int(picks[pid])],
            diplomacy={other: Relation() for other in range(config.player_count) if other != pid},
        )
        for pid in range(config.player_count)
    ]
    state = GameState(
        config=config,
        width=config.map_width,
        height=config.map_height,
        tiles=tiles,
        players=players,
        rng_state=snapshot_rng(rng),
    )

    anchors = capital_anchors(config.map_width, config.map_height)
    for player in players:
        x, y = anchors[int(seats[player.id])]
        capital = found_city(state, player.id, x, y, capital=True)
        player.original_capital = capital.id
        create_unit(state, player.id, "warrior", x, y, capital.id)
        scout = create_unit(state, player.id, "scout", x, y, capital.id)
        for n in grid.neighbors[grid.index(x, y)]:
            if can_enter(state, scout, n):
                scout.x, scout.y = grid.coords(n)
                break
    for name, (x, y) in zip(rules.city_state_names, city_state_sites(config.map_width, config.map_height), strict=False):
        found_city(state, None, x, y, name=name)
    for player in players:
        refresh_sight(state, player.id)
        update_rates(state, player)
    diplomacy.update_delegates(state)

    state.rng_state = snapshot_rng(rng)
    logger.debug("Game created seed=%d players=%d size=%dx%d", config.seed, config.player_count, state.width, state.height)
    return state


def default_directive(state: GameState, player: int) -> PlayerDirective:
    """Directive with the archetype's personality flavors and neutral diplomacy weights."""
    return PlayerDirective(flavors=base_flavors(state.players[player].archetype).as_dict())


def advance_turn(state: GameState, directives: Mapping[int, PlayerDirective]) -> tuple[GameState, list[Event]]:
    """Process one full round: every living player in index order, then the end-of-round step.

    Each player's step runs income, production, unit actions, diplomacy and growth, then logs
    PlayerDoneTurn and checks victory. The turn counter advances after the last player.

    Args:
        state: A non-terminal game state; mutated in place.
        directives: Per-player directives; missing players get their archetype default.

    Returns:
        The same state and the events appended during this call.

    Raises:
        TerminalStateError: If the game already ended.

    """
    if state.is_terminal:
        raise TerminalStateError(f"Game already ended at turn {state.turn}.", field="turn")

    start = len(state.event_log)
    rng = restore_rng(state.rng_state)
    for player in state.players:
        if not player.alive:
            continue
        directive = directives.get(player.id) or default_directive(state, player.id)
        _player_step(state, player, directive, rng)
        log_event(state, EventKind.PLAYER_DONE_TURN, player.id, next_player=_next_player(state, player.id))
        if _finish_if_won(state):
            break

    if not state.is_terminal:
        _end_of_round(state)
    state.rng_state = snapshot_rng(rng)
    return state, state.event_log[start:]


def _next_player(state: GameState, current: int) -> int | None:
    """Next living player this round, or None when the round ends."""
    for player in state.players[current + 1 :]:
        if player.alive:
            return player.id
    return None


def _player_step(state: GameState, player: PlayerState, directive: PlayerDirective, rng: np.random.Generator) -> None:
    flavors = FlavorVector.clamped(directive.flavors)
    refresh_sight(state, player.id)
    if player.current_research is None:
        player.current_research = _pick_research(player, directive)

    yields = update_rates(state, player)
    _collect_income(state, player, directive)
    for city in state.cities_of(player.id):
        _produce(state, city, yields[city.id], flavors)

    if player.alive:
        _act_units(state, player, flavors, rng)
    if player.alive:
        diplomacy.update_relations(state, player.id, directive, rng)
        diplomacy.update_influence(state, player.id, directive)
    for city in state.cities_of(player.id):
        _grow(state, player, city)
    _heal(state, player)
    update_rates(state, player)


def _pick_research(player: PlayerState, directive: PlayerDirective) -> str | None:
    options = available_techs(player)
    if directive.next_research in options:
        return directive.next_research
    return cheapest_tech(options)


def _pick_policy(player: PlayerState, directive: PlayerDirective) -> str | None:
    options = available_policies(player)
    if directive.next_policy in options:
        return directive.next_policy
    return options[0] if options else None


def _collect_income(state: GameState, player: PlayerState, directive: PlayerDirective) -> None:
    rules = load_ruleset()
    player.gold += player.gold_rate
    if player.gold < 0:
        units = [u for u in state.units_of(player.id) if unit_class(u.unit_type) != UnitClass.SETTLER]
        if units:
            destroy_unit(state, units[-1], "disbanded")
        player.gold = 0

    player.science += player.science_rate
    research = player.current_research
    if research is not None and player.science >= rules.techs[research].cost:
        player.science -= rules.techs[research].cost
        player.techs_known.append(research)
        player.current_research = _pick_research(player, directive)
        log_event(state, EventKind.TECH_FINISHED, player.id, tech=research, next=player.current_research)

    player.culture += player.culture_rate
    player.culture_total += player.culture_rate
    cost = rules.policy_cost(len(player.policies_adopted))
    if player.culture >= cost:
        choice = _pick_policy(player, directive)
        if choice is not None:
            player.culture -= cost
            adopt_policy(player, choice)
            log_event(state, EventKind.POLICY_ADOPTED, player.id, policy=choice, branch=rules.policies[choice].branch)

    player.faith += player.faith_rate
    if player.tourism_rate > 0:
        for other in state.alive_players():
            if other.id != player.id and player.has_met(other.id):
                player.tourism_exported[other.id] = player.tourism_exported.get(other.id, 0) + player.tourism_rate


def _produce(state: GameState, city: City, cy: CityYield, flavors: FlavorVector) -> None:
    if city.owner is None:
        return
    rules = load_ruleset()
    context = production_context(state, city)
    if city.production_item in {None, "wealth"} or city.production_item not in context.legal_items:
        city.production_item = choose_city_production(city, flavors, context)
    item = city.production_item
    if item == "wealth":
        return

    city.production_stored += cy.production
    cost = rules.item_cost(item)
    if city.production_stored < cost:
        return
    city.production_stored -= cost
    city.production_item = None
    if item in rules.units:
        create_unit(state, city.owner, item, city.x, city.y, city.id)
        if unit_class(item) == UnitClass.SETTLER:
            set_population(state, city, city.population - 1)
    elif item in rules.buildings:
        city.buildings.append(item)
        log_event(state, EventKind.BUILDING_COMPLETED, city.owner, city=city.id, building=item, x=city.x, y=city.y)
    else:
        state.players[city.owner].spaceship_parts += 1
        log_event(state, EventKind.BUILDING_COMPLETED, city.owner, city=city.id, building=item, x=city.x, y=city.y)


def _act_units(state: GameState, player: PlayerState, flavors: FlavorVector, rng: np.random.Generator) -> None:
    rules = load_ruleset()
    zones = compute_tactical_zones(state, player.id)
    for unit in state.units_of(player.id):
        if unit.id not in state.units:
            continue
        unit.moves_left = rules.units[unit.unit_type].moves
        for _ in range(_MAX_UNIT_STEPS):
            if unit.id not in state.units or unit.moves_left <= 0 or not player.alive:
                break
            _execute(state, unit, plan_unit_turn(unit, state, zones, flavors), rng)


def _execute(state: GameState, unit: Unit, action: UnitAction, rng: np.random.Generator) -> None:
    grid = grid_for(state.width, state.height)
    target = action.target
    match action.kind:
        case ActionKind.ATTACK if target is not None:
            x, y = grid.coords(target)
            resolve_attack(state, unit, x, y, rng)
            unit.moves_left = 0
        case ActionKind.FOUND_CITY:
            found_city(state, unit.owner, unit.x, unit.y)
            destroy_unit(state, unit, "settled")
        case ActionKind.IMPROVE_TILE:
            tile = state.tile_at(unit.x, unit.y)
            improvement = load_ruleset().terrain[tile.terrain].improvement
            if improvement and tile.improvement is None:
                tile.improvement = improvement
                log_event(state, EventKind.TILE_IMPROVED, unit.owner, unit=unit.id, improvement=improvement, x=unit.x, y=unit.y)
            unit.moves_left = 0
        case ActionKind.MOVE | ActionKind.EXPLORE if target is not None and can_enter(state, unit, target):
            x, y = grid.coords(target)
            log_event(
                state,
                EventKind.UNIT_MOVED,
                unit.owner,
                unit=unit.id,
                unit_type=unit.unit_type,
                from_x=unit.x,
                from_y=unit.y,
                x=x,
                y=y,
            )
            unit.x, unit.y = x, y
            unit.fortified = False
            unit.moves_left -= 1
            fresh = refresh_sight(state, unit.owner)
            if fresh:
                log_event(state, EventKind.TILE_REVEALED, unit.owner, unit=unit.id, count=len(fresh), x=x, y=y)
        case _:
            unit.fortified = True
            unit.moves_left = 0


def _grow(state: GameState, player: PlayerState, city: City) -> None:
    rules = load_ruleset()
    surplus = city_yield(state, city).food - FOOD_PER_POP * city.population
    if player.happiness < 0:
        surplus = min(surplus, 0)
    city.food_stored += surplus
    threshold = growth_threshold(city.population)
    if city.food_stored >= threshold and city.population < rules.limits.max_population:
        city.food_stored -= threshold
        set_population(state, city, city.population + 1)
    elif city.food_stored < 0:
        city.food_stored = 0
        if city.population > 1:
            set_population(state, city, city.population - 1)
    city.hp = min(city.max_hp, city.hp + CITY_HEAL)


def _heal(state: GameState, player: PlayerState) -> None:
    limit = load_ruleset().limits.unit_hp
    for unit in state.units_of(player.id):
        unit.hp = min(limit, unit.hp + (FORTIFIED_HEAL if unit.fortified else UNIT_HEAL))


def _end_of_round(state: GameState) -> None:
    diplomacy.decay_influence(state)
    diplomacy.update_delegates(state)
    if state.config.enabled(VictoryKind.DIPLOMATIC) and diplomacy.vote_due(state):
        diplomacy.hold_vote(state)
        if _finish_if_won(state):
            return
    state.turn += 1
    if state.turn >= state.config.max_turns:
        if not _finish_if_won(state):
            state.draw = True
            logger.info("Game drawn turn=%d", state.turn)


def _finish_if_won(state: GameState) -> bool:
    result = check_victory(state)
    if result is None:
        return False
    state.victory = result
    log_event(state, EventKind.VICTORY, result.winner, winner=result.winner, victory=str(result.kind))
    logger.info("Victory winner=%d kind=%s turn=%d", result.winner, result.kind, result.turn)
    return True


def check_victory(state: GameState) -> VictoryResult | None:
    """First satisfied victory condition in precedence order, or None.

    Domination > Science > Cultural > Diplomatic > Time. Disabled kinds are skipped. A state that
    already holds a result returns it unchanged.
    """
    if state.victory is not None:
        return state.victory
    for kind in VICTORY_PRECEDENCE:
        if not state.config.enabled(kind):
            continue
        winner = _VICTORY_CHECKS[kind](state)
        if winner is not None:
            return VictoryResult(winner=winner, kind=kind, turn=state.turn)
    return None


def _domination_winner(state: GameState) -> int | None:
    capitals = [p.original_capital for p in state.players if p.original_capital is not None]
    if not capitals:
        return None
    owners = {state.cities[cid].owner for cid in capitals if cid in state.cities}
    if len(owners) == 1:
        (owner,) = owners
        if owner is not None and state.players[owner].alive:
            return owner
    return None


def _science_winner(state: GameState) -> int | None:
    needed = load_ruleset().limits.spaceship_parts_needed
    for player in state.alive_players():
        if player.spaceship_parts >= needed:
            return player.id
    return None


def _cultural_winner(state: GameState) -> int | None:
    alive = state.alive_players()
    for player in alive:
        rivals = [o for o in alive if o.id != player.id]
        if rivals and all(player.tourism_exported.get(o.id, 0) > o.culture_total for o in rivals):
            return player.id
    return None


def _diplomatic_winner(state: GameState) -> int | None:
    vote = state.last_vote
    if vote is None or vote.turn != state.turn or not vote.delegates:
        return None
    leader = min(vote.delegates, key=lambda pid: (-vote.delegates[pid], pid))
    if vote.delegates[leader] >= vote.needed and state.players[leader].alive:
        return leader
    return None


def _time_winner(state: GameState) -> int | None:
    if state.turn < state.config.max_turns:
        return None
    alive = state.alive_players()
    if not alive:
        return None
    # Score ties go to the first tied seat counting from seed mod players.
    count = len(state.players)
    first = state.config.seed % count
    return min(alive, key=lambda p: (-compute_score(state, p.id), (p.id - first) % count)).id


_VICTORY_CHECKS = {
    VictoryKind.DOMINATION: _domination_winner,
    VictoryKind.SCIENCE: _science_winner,
    VictoryKind.CULTURAL: _cultural_winner,
    VictoryKind.DIPLOMATIC: _diplomatic_winner,
    VictoryKind.TIME: _time_winner,
}


def compute_score(state: GameState, player: int) -> int:
    """Weighted sum of population, cities, wonders, policies, techs and military strength.

    Weights come from `[score_weights]` in the ruleset; military counts one point per
    `military_per_strength` strength, floored.

    Raises:
        UnknownPlayerError: If the player index is out of range.

    """
    if not 0 <= player < len(state.players):
        raise UnknownPlayerError(f"Unknown player: {player}.", field="player")
    rules = load_ruleset()
    weights = rules.score_weights
    me = state.players[player]
    cities = state.cities_of(player)
    wonders = sum(1 for c in cities for b in c.buildings if rules.buildings[b].wonder)
    return (
        weights.population * sum(c.population for c in cities)
        + weights.city * len(cities)
        + weights.wonder * wonders
        + weights.policy * len(me.policies_adopted)
        + weights.tech * len(me.techs_known)
        + military_strength(state, player) // weights.military_per_strength
    )
