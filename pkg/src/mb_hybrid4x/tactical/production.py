"""City production: legality, flavor-weighted scoring and selection."""

import functools
import tomllib
from importlib.resources import files

from pydantic import BaseModel, ConfigDict

from mb_hybrid4x.core.errors import IllegalItemError, NoLegalItemsError
from mb_hybrid4x.engine.economy import unit_class
from mb_hybrid4x.engine.hexgrid import grid_for
from mb_hybrid4x.engine.models import COMBAT_CLASSES, City, GameState, Stance, UnitClass, VictoryKind
from mb_hybrid4x.engine.rules import load_ruleset
from mb_hybrid4x.engine.visibility import visible_units
from mb_hybrid4x.tactical.flavors import FLAVOR_NAMES, FlavorVector

THREAT_RADIUS = 3
_THREAT_BONUS_CAP = 60
_WAR_BONUS = 20
_WORKER_BONUS = 30
_SCOUT_SATURATION_PENALTY = 100
_ARMY_SATURATION_PENALTY = 15


@functools.cache
def load_affinities() -> dict[str, dict[str, int]]:
    """Flavor affinity table from `data/affinities.toml`, with every flavor name present per item."""
    raw = tomllib.loads(files("mb_hybrid4x.data").joinpath("affinities.toml").read_text(encoding="utf-8"))
    return {item: {n: int(values.get(n, 0)) for n in FLAVOR_NAMES} for item, values in raw["items"].items()}


class ProductionContext(BaseModel):
    """Situation of a city that production scoring depends on besides flavors."""

    model_config = ConfigDict(frozen=True)

    legal_items: tuple[str, ...]
    threat: int = 0
    at_war: bool = False
    worker_need: bool = False
    scouts: int = 0
    military_units: int = 0
    cities: int = 1


def free_sites(state: GameState, player: int) -> list[int]:
    """Revealed tiles where a settler of `player` could found a city, best first (ties by index)."""
    rules = load_ruleset()
    grid = grid_for(state.width, state.height)
    city_tiles = [grid.index(c.x, c.y) for c in state.cities.values()]
    foreign = {state.tile_index(u.x, u.y) for u in state.units.values() if u.owner != player}
    candidates: list[tuple[int, int]] = []
    for index in state.players[player].revealed:
        tile = state.tiles[index]
        terrain = rules.terrain[tile.terrain]
        if not (terrain.land and terrain.passable) or tile.owner_city is not None or index in foreign:
            continue
        if any(grid.distance(index, c) < rules.map.city_min_distance for c in city_tiles):
            continue
        value = 0
        for n in grid.within(index, 1):
            t = rules.terrain[state.tiles[n].terrain]
            value += t.food * 2 + t.production + t.gold
        candidates.append((-value, index))
    return [index for _, index in sorted(candidates)]


def legal_items(state: GameState, city: City) -> list[str]:
    """Items the city may start now, sorted by id."""
    rules = load_ruleset()
    if city.owner is None:
        return []
    player = state.players[city.owner]
    known = set(player.techs_known)
    items: list[str] = []
    for unit_id, unit in rules.units.items():
        if unit.requires and unit.requires not in known:
            continue
        if unit.unit_class == UnitClass.SETTLER and (city.population < 2 or not free_sites(state, player.id)):
            continue
        items.append(unit_id)
    built_anywhere = {b for c in state.cities.values() for b in c.buildings}
    queued_elsewhere = {c.production_item for c in state.cities_of(player.id) if c.id != city.id}
    for building_id, building in rules.buildings.items():
        if building_id in city.buildings or (building.requires and building.requires not in known):
            continue
        if building.wonder and (building_id in built_anywhere or building_id in queued_elsewhere):
            continue
        items.append(building_id)
    parts_in_progress = sum(1 for c in state.cities_of(player.id) if c.production_item == "spaceship_part" and c.id != city.id)
    if (
        state.config.enabled(VictoryKind.SCIENCE)
        and rules.projects["spaceship_part"].requires in known
        and player.spaceship_parts + parts_in_progress < rules.limits.spaceship_parts_needed
    ):
        items.append("spaceship_part")
    items.append("wealth")
    return sorted(items)


def production_context(state: GameState, city: City) -> ProductionContext:
    """Gather the situational inputs for scoring a city's production."""
    rules = load_ruleset()
    grid = grid_for(state.width, state.height)
    owner = city.owner
    if owner is None:
        return ProductionContext(legal_items=())
    player = state.players[owner]
    center = grid.index(city.x, city.y)
    enemies = {pid for pid, rel in player.diplomacy.items() if rel.stance == Stance.WAR}
    threat = sum(
        rules.units[u.unit_type].strength
        for u in visible_units(state, owner)
        if u.owner in enemies and grid.distance(center, grid.index(u.x, u.y)) <= THREAT_RADIUS
    )
    own_units = state.units_of(owner)
    cities = state.cities_of(owner)
    workers = sum(1 for u in own_units if unit_class(u.unit_type) == UnitClass.WORKER)
    unimproved = any(
        t.owner_city in {c.id for c in cities} and t.improvement is None and rules.terrain[t.terrain].improvement
        for t in state.tiles
    )
    return ProductionContext(
        legal_items=tuple(legal_items(state, city)),
        threat=threat,
        at_war=bool(enemies),
        worker_need=unimproved and workers < len(cities),
        scouts=sum(1 for u in own_units if unit_class(u.unit_type) == UnitClass.RECON),
        military_units=sum(
            1 for u in own_units if unit_class(u.unit_type) in COMBAT_CLASSES and unit_class(u.unit_type) != UnitClass.RECON
        ),
        cities=len(cities),
    )


def situational_bonus(item: str, context: ProductionContext) -> int:
    """Flavor-independent part of an item's score."""
    rules = load_ruleset()
    bonus = 0
    is_military = item in rules.units and UnitClass(rules.units[item].unit_class) in COMBAT_CLASSES - {UnitClass.RECON}
    if is_military or item == "walls":
        bonus += min(_THREAT_BONUS_CAP, context.threat * 2)
    if is_military:
        if context.at_war:
            bonus += _WAR_BONUS
        excess = context.military_units - 2 * context.cities
        if excess > 0 and not context.at_war:
            bonus -= excess * _ARMY_SATURATION_PENALTY
    if item == "worker" and context.worker_need:
        bonus += _WORKER_BONUS
    if item == "scout" and context.scouts >= 1:
        bonus -= _SCOUT_SATURATION_PENALTY
    return bonus


def score_production_item(item: str, city: City, flavors: FlavorVector, context: ProductionContext) -> int:
    """Score = sum over flavors of flavor x affinity, plus the situational bonus.

    Raises:
        IllegalItemError: If the item is not legal in the city.

    """
    if item not in context.legal_items:
        raise IllegalItemError(f"{item} cannot be produced in {city.name}.", field=item)
    affinity = load_affinities()[item]
    return sum(flavors[n] * affinity[n] for n in FLAVOR_NAMES) + situational_bonus(item, context)


def choose_city_production(city: City, flavors: FlavorVector, context: ProductionContext) -> str:
    """Highest-scoring legal item; ties go to the lowest item id.

    Raises:
        NoLegalItemsError: If the context lists no legal items.

    """
    if not context.legal_items:
        raise NoLegalItemsError(f"{city.name} has nothing it can produce.", field=city.name)
    scored = [(-score_production_item(item, city, flavors, context), item) for item in context.legal_items]
    return min(scored)[1]
