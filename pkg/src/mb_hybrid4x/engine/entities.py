"""Creating and removing units and cities. Every change to the unit table is logged here."""

import logging

from mb_hybrid4x.engine.events import log_event
from mb_hybrid4x.engine.hexgrid import grid_for
from mb_hybrid4x.engine.models import City, EventKind, GameState, Unit
from mb_hybrid4x.engine.rules import load_ruleset

logger = logging.getLogger(__name__)


def create_unit(state: GameState, owner: int, unit_type: str, x: int, y: int, city: int | None = None) -> Unit:
    """Place a new unit and log UnitCreated."""
    rules = load_ruleset()
    unit = Unit(id=state.allocate_id(), owner=owner, unit_type=unit_type, x=x, y=y, hp=rules.limits.unit_hp)
    state.units[unit.id] = unit
    log_event(state, EventKind.UNIT_CREATED, owner, unit=unit.id, unit_type=unit_type, city=city, x=x, y=y)
    return unit


def destroy_unit(state: GameState, unit: Unit, reason: str) -> None:
    """Remove a unit and log UnitDestroyed."""
    del state.units[unit.id]
    log_event(
        state, EventKind.UNIT_DESTROYED, unit.owner, unit=unit.id, unit_type=unit.unit_type, owner=unit.owner, reason=reason,
        x=unit.x, y=unit.y,
    )


def next_city_name(state: GameState) -> str:
    """Next name from the name pool; cycles with a numeral suffix once exhausted."""
    names = load_ruleset().city_names
    base = names[state.names_used % len(names)]
    cycle = state.names_used // len(names)
    state.names_used += 1
    return base if cycle == 0 else f"{base} {cycle + 1}"


def claim_territory(state: GameState, city: City) -> None:
    """Assign unclaimed land around the city to it."""
    rules = load_ruleset()
    grid = grid_for(state.width, state.height)
    for index in grid.within(grid.index(city.x, city.y), rules.map.territory_radius):
        tile = state.tiles[index]
        if tile.owner_city is None:
            tile.owner_city = city.id


def found_city(state: GameState, owner: int | None, x: int, y: int, *, capital: bool = False, name: str | None = None) -> City:
    """Found a city (or a city-state when owner is None) and log CityFounded."""
    rules = load_ruleset()
    hp = rules.limits.capital_hp if capital else rules.limits.city_hp
    city = City(
        id=state.allocate_id(),
        name=name or next_city_name(state),
        owner=owner,
        original_owner=owner,
        x=x,
        y=y,
        founded_turn=state.turn,
        is_capital=capital,
        hp=hp,
        max_hp=hp,
    )
    state.cities[city.id] = city
    state.tile_at(x, y).owner_city = city.id
    claim_territory(state, city)
    log_event(state, EventKind.CITY_FOUNDED, owner, city=city.id, city_name=city.name, x=x, y=y)
    return city


def set_population(state: GameState, city: City, population: int) -> None:
    """Change population and log SetPopulation."""
    old = city.population
    if old == population:
        return
    city.population = population
    log_event(
        state, EventKind.SET_POPULATION, city.owner,
        city=city.id, city_name=city.name, old=old, new=population, x=city.x, y=city.y,
    )


def capture_city(state: GameState, city: City, captor: Unit) -> None:
    """Transfer a city to the captor's owner; eliminates the previous owner when it was their last city."""
    previous = city.owner
    was_capital = city.is_capital
    log_event(
        state, EventKind.CITY_CAPTURED, captor.owner,
        city=city.id, city_name=city.name, previous_owner=previous, x=city.x, y=city.y,
    )
    city.owner = captor.owner
    city.is_capital = False
    city.hp = city.max_hp // 4
    city.production_item = None
    city.production_stored = 0
    set_population(state, city, max(1, city.population - 1))
    logger.debug("City captured city=%d by=%d from=%s turn=%d", city.id, captor.owner, previous, state.turn)
    if previous is None:
        return
    remaining = state.cities_of(previous)
    if not remaining:
        eliminate_player(state, previous)
    elif was_capital:
        remaining[0].is_capital = True


def eliminate_player(state: GameState, player: int) -> None:
    """Mark a player dead and remove all of their units."""
    me = state.players[player]
    me.alive = False
    me.eliminated_turn = state.turn
    for unit in state.units_of(player):
        destroy_unit(state, unit, "eliminated")
    log_event(state, EventKind.PLAYER_ELIMINATED, player, eliminated=player)
    logger.info("Player eliminated player=%d turn=%d", player, state.turn)
