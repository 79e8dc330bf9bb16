"""City yields, player rates and combat-strength modifiers."""

from pydantic import BaseModel

from mb_hybrid4x.engine.hexgrid import grid_for
from mb_hybrid4x.engine.models import COMBAT_CLASSES, City, GameState, PlayerState, Terrain, UnitClass
from mb_hybrid4x.engine.rules import Ruleset, load_ruleset

_BASE_HAPPINESS = 4
_UNIT_UPKEEP = 1


class CityYield(BaseModel):
    """Per-turn output of one city."""

    food: int = 0
    production: int = 0
    gold: int = 0
    science: int = 0
    culture: int = 0
    tourism: int = 0
    faith: int = 0
    happiness: int = 0


def modifier_total(player: PlayerState, key: str, rules: Ruleset | None = None) -> int:
    """Sum of an archetype + policy modifier."""
    rules = rules or load_ruleset()
    total = rules.archetypes[player.archetype].modifiers.get(key, 0)
    for policy_id in player.policies_adopted:
        total += rules.policies[policy_id].modifiers.get(key, 0)
    return total


def _tile_value(state: GameState, index: int, rules: Ruleset) -> tuple[int, int, int]:
    tile = state.tiles[index]
    terrain = rules.terrain[tile.terrain]
    bonus = rules.improvements.get(tile.improvement or "", {})
    return (
        terrain.food + bonus.get("food", 0),
        terrain.production + bonus.get("production", 0),
        terrain.gold + bonus.get("gold", 0),
    )


def worked_tiles(state: GameState, city: City) -> list[int]:
    """Tiles a city works besides its center: the best `population` tiles of its territory."""
    rules = load_ruleset()
    center = state.tile_index(city.x, city.y)
    owned = [i for i, t in enumerate(state.tiles) if t.owner_city == city.id and i != center]

    def rank(i: int) -> tuple[int, int]:
        food, production, gold = _tile_value(state, i, rules)
        return (-(food * 2 + production + gold), i)

    return sorted(owned, key=rank)[: city.population]


def city_yield(state: GameState, city: City) -> CityYield:
    """Per-turn yield of a city from its center, worked tiles, buildings and owner modifiers."""
    rules = load_ruleset()
    center = state.tile_index(city.x, city.y)
    food, production, gold = _tile_value(state, center, rules)
    result = CityYield(food=max(2, food), production=max(1, production), gold=gold + 1, culture=1)
    for index in worked_tiles(state, city):
        f, p, g = _tile_value(state, index, rules)
        result.food += f
        result.production += p
        result.gold += g
    result.science = city.population
    for building_id in city.buildings:
        building = rules.buildings[building_id]
        result.food += building.food
        result.production += building.production
        result.gold += building.gold
        result.science += building.science
        result.culture += building.culture
        result.tourism += building.tourism
        result.faith += building.faith
        result.happiness += building.happiness
    if city.owner is not None:
        owner = state.players[city.owner]
        result.food += modifier_total(owner, "food", rules)
        result.production += modifier_total(owner, "production", rules)
    return result


def update_rates(state: GameState, player: PlayerState) -> dict[int, CityYield]:
    """Recompute a player's per-turn rates. Returns the per-city yields used."""
    rules = load_ruleset()
    yields = {c.id: city_yield(state, c) for c in state.cities_of(player.id)}
    flat = {key: modifier_total(player, key, rules) for key in ("gold", "science", "culture", "tourism", "faith", "happiness")}
    upkeep = max(0, len(state.units_of(player.id)) - rules.limits.free_unit_upkeep) * _UNIT_UPKEEP
    wealth = sum(y.production for cid, y in yields.items() if state.cities[cid].production_item == "wealth")
    player.gold_rate = sum(y.gold for y in yields.values()) + flat["gold"] + wealth - upkeep
    player.science_rate = sum(y.science for y in yields.values()) + flat["science"] if yields else 0
    player.culture_rate = sum(y.culture for y in yields.values()) + flat["culture"] if yields else 0
    player.tourism_rate = sum(y.tourism for y in yields.values()) + flat["tourism"] if yields else 0
    player.faith_rate = sum(y.faith for y in yields.values()) + flat["faith"] if yields else 0
    cities = state.cities_of(player.id)
    player.happiness = (
        (
            _BASE_HAPPINESS
            + sum(y.happiness for y in yields.values())
            + flat["happiness"] * len(cities)
            - len(cities)
            - sum(c.population for c in cities) // 3
        )
        if cities
        else 0
    )
    return yields


def strength_pct(player: PlayerState) -> int:
    """Combat strength bonus in percent from archetype and policies."""
    return modifier_total(player, "strength_pct")


def unit_class(unit_type: str) -> UnitClass:
    """Class of a unit type."""
    return UnitClass(load_ruleset().units[unit_type].unit_class)


def military_strength(state: GameState, player: int) -> int:
    """Sum of base strength over a player's combat units."""
    rules = load_ruleset()
    return sum(
        rules.units[u.unit_type].strength
        for u in state.units.values()
        if u.owner == player and unit_class(u.unit_type) in COMBAT_CLASSES
    )


def city_strength(state: GameState, city: City) -> int:
    """Defensive strength of a city."""
    rules = load_ruleset()
    walls = sum(rules.buildings[b].defense for b in city.buildings)
    base = 8 + 2 * city.population + walls + (4 if city.is_capital else 0)
    if city.owner is not None:
        base = base * (100 + strength_pct(state.players[city.owner])) // 100
    return base


def growth_threshold(population: int) -> int:
    """Food needed for the next population point."""
    return 15 + 6 * population


def is_coastal(state: GameState, city: City) -> bool:
    """Whether a city borders water."""
    grid = grid_for(state.width, state.height)
    return any(state.tiles[n].terrain == Terrain.WATER for n in grid.neighbors[grid.index(city.x, city.y)])
