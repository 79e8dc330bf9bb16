"""Per-unit action planning by class-specific scoring."""

from enum import StrEnum

from pydantic import BaseModel, ConfigDict

from mb_hybrid4x.engine.combat import attack_strength, defense_strength
from mb_hybrid4x.engine.economy import city_strength, unit_class
from mb_hybrid4x.engine.hexgrid import grid_for
from mb_hybrid4x.engine.models import COMBAT_CLASSES, GameState, Stance, Unit, UnitClass
from mb_hybrid4x.engine.rules import load_ruleset
from mb_hybrid4x.engine.visibility import known_cities, visible_units
from mb_hybrid4x.tactical.flavors import FlavorVector
from mb_hybrid4x.tactical.production import free_sites
from mb_hybrid4x.tactical.zones import Dominance, TacticalZone, zone_lookup

ADVANCE_FACTOR = 0.8
GARRISON_FACTOR = 0.5
FOUND_FACTOR = 2.0
SITE_SHORTLIST = 5
THREAT_FACTORS: dict[Dominance, float] = {
    Dominance.ENEMY: 1.5,
    Dominance.CONTESTED: 1.0,
    Dominance.NEUTRAL: 0.2,
    Dominance.FRIENDLY: 0.2,
}


class ActionKind(StrEnum):
    """What a unit does with one move."""

    ATTACK = "attack"
    FOUND_CITY = "found_city"
    IMPROVE_TILE = "improve_tile"
    EXPLORE = "explore"
    MOVE = "move"
    FORTIFY = "fortify"


_KIND_ORDER = {kind: i for i, kind in enumerate(ActionKind)}


class UnitAction(BaseModel):
    """A planned action. `target` is a tile index (destination, attack target or site)."""

    model_config = ConfigDict(frozen=True)

    kind: ActionKind
    unit_id: int
    target: int | None = None
    score: float = 0.0


def can_enter(state: GameState, unit: Unit, tile: int) -> bool:
    """Land units enter passable tiles free of foreign units and foreign or neutral cities."""
    rules = load_ruleset()
    terrain = rules.terrain[state.tiles[tile].terrain]
    if not (terrain.land and terrain.passable):
        return False
    x, y = tile % state.width, tile // state.width
    if any(u.owner != unit.owner for u in state.units_at(x, y)):
        return False
    city = state.city_at(x, y)
    return city is None or city.owner == unit.owner


def step_toward(state: GameState, unit: Unit, target: int) -> int | None:
    """Neighbor that strictly reduces distance to target, nearest first, ties by index."""
    grid = grid_for(state.width, state.height)
    here = grid.index(unit.x, unit.y)
    current = grid.distance(here, target)
    options = [(grid.distance(n, target), n) for n in grid.neighbors[here] if can_enter(state, unit, n)]
    closer = [o for o in options if o[0] < current]
    return min(closer)[1] if closer else None


def attack_targets(state: GameState, unit: Unit) -> list[tuple[int, int]]:
    """(tile, defender strength) pairs the unit may attack now: visible enemy units and cities of players at war."""
    rules = load_ruleset()
    grid = grid_for(state.width, state.height)
    me = state.players[unit.owner]
    reach = max(1, rules.units[unit.unit_type].attack_range)
    here = grid.index(unit.x, unit.y)
    targets: dict[int, int] = {}
    for other in visible_units(state, unit.owner):
        if other.owner != unit.owner and me.stance_toward(other.owner) == Stance.WAR:
            tile = grid.index(other.x, other.y)
            if 0 < grid.distance(here, tile) <= reach:
                targets[tile] = max(targets.get(tile, 0), defense_strength(state, other))
    for city in known_cities(state, unit.owner):
        if city.owner is not None and city.owner != unit.owner and me.stance_toward(city.owner) == Stance.WAR:
            tile = grid.index(city.x, city.y)
            if 0 < grid.distance(here, tile) <= reach and tile not in targets:
                targets[tile] = city_strength(state, city)
    return sorted(targets.items())


def _best(candidates: list[UnitAction]) -> UnitAction:
    return min(candidates, key=lambda a: (-a.score, _KIND_ORDER[a.kind], a.target if a.target is not None else -1))


def _plan_military(unit: Unit, state: GameState, zones: list[TacticalZone], flavors: FlavorVector) -> list[UnitAction]:
    grid = grid_for(state.width, state.height)
    here = grid.index(unit.x, unit.y)
    me = state.players[unit.owner]
    offense, defense = flavors["Offense"], flavors["Defense"]
    candidates: list[UnitAction] = []

    attack = attack_strength(state, unit)
    if offense > 0:
        for tile, strength in attack_targets(state, unit):
            odds = attack / (attack + strength)
            candidates.append(UnitAction(kind=ActionKind.ATTACK, unit_id=unit.id, target=tile, score=offense * (1 + odds)))

    cities = known_cities(state, unit.owner)
    enemy_cities = [
        c for c in cities if c.owner is not None and c.owner != unit.owner and me.stance_toward(c.owner) == Stance.WAR
    ]
    if enemy_cities and offense > 0:
        goal = min(enemy_cities, key=lambda c: (grid.distance(here, grid.index(c.x, c.y)), c.id))
        step = step_toward(state, unit, grid.index(goal.x, goal.y))
        if step is not None:
            candidates.append(UnitAction(kind=ActionKind.MOVE, unit_id=unit.id, target=step, score=ADVANCE_FACTOR * offense))

    own_cities = [c for c in cities if c.owner == unit.owner]
    if own_cities:
        lookup = zone_lookup(zones)
        threat = THREAT_FACTORS[lookup[here].dominance]
        home = min(own_cities, key=lambda c: (grid.distance(here, grid.index(c.x, c.y)), c.id))
        home_tile = grid.index(home.x, home.y)
        threat = max(threat, THREAT_FACTORS[lookup[home_tile].dominance])
        candidates.append(_toward_or_fortify(state, unit, home_tile, defense * threat))

        occupied = {grid.index(u.x, u.y) for u in state.units_of(unit.owner) if u.id != unit.id and _is_military(u)}
        empty = [c for c in own_cities if grid.index(c.x, c.y) not in occupied]
        if empty:
            post = min(empty, key=lambda c: (grid.distance(here, grid.index(c.x, c.y)), c.id))
            candidates.append(_toward_or_fortify(state, unit, grid.index(post.x, post.y), defense * GARRISON_FACTOR))
    return candidates


def _toward_or_fortify(state: GameState, unit: Unit, destination: int, score: float) -> UnitAction:
    grid = grid_for(state.width, state.height)
    here = grid.index(unit.x, unit.y)
    if grid.distance(here, destination) <= 1:
        return UnitAction(kind=ActionKind.FORTIFY, unit_id=unit.id, score=score)
    step = step_toward(state, unit, destination)
    if step is None:
        return UnitAction(kind=ActionKind.FORTIFY, unit_id=unit.id, score=score)
    return UnitAction(kind=ActionKind.MOVE, unit_id=unit.id, target=step, score=score)


def _is_military(unit: Unit) -> bool:
    cls = unit_class(unit.unit_type)
    return cls in COMBAT_CLASSES and cls != UnitClass.RECON


def _plan_settler(unit: Unit, state: GameState, flavors: FlavorVector) -> list[UnitAction]:
    expansion = flavors["Expansion"]
    if expansion == 0:
        return []
    grid = grid_for(state.width, state.height)
    here = grid.index(unit.x, unit.y)
    sites = free_sites(state, unit.owner)
    if here in sites:
        return [UnitAction(kind=ActionKind.FOUND_CITY, unit_id=unit.id, target=here, score=FOUND_FACTOR * expansion)]
    shortlist = sites[:SITE_SHORTLIST]
    for site in sorted(shortlist, key=lambda s: (grid.distance(here, s), shortlist.index(s))):
        step = step_toward(state, unit, site)
        if step is not None:
            return [UnitAction(kind=ActionKind.MOVE, unit_id=unit.id, target=step, score=float(expansion))]
    return []


def _plan_worker(unit: Unit, state: GameState, flavors: FlavorVector) -> list[UnitAction]:
    rules = load_ruleset()
    grid = grid_for(state.width, state.height)
    here = grid.index(unit.x, unit.y)
    own = {c.id for c in state.cities_of(unit.owner)}
    score = float(flavors["Growth"] + flavors["Production"] + 1)

    def improvable(index: int) -> bool:
        tile = state.tiles[index]
        return tile.owner_city in own and tile.improvement is None and bool(rules.terrain[tile.terrain].improvement)

    if improvable(here):
        return [UnitAction(kind=ActionKind.IMPROVE_TILE, unit_id=unit.id, target=here, score=score)]
    targets = sorted((grid.distance(here, i), i) for i in range(grid.size) if improvable(i))
    for _, target in targets:
        step = step_toward(state, unit, target)
        if step is not None:
            return [UnitAction(kind=ActionKind.MOVE, unit_id=unit.id, target=step, score=score)]
    return []


def _plan_recon(unit: Unit, state: GameState, flavors: FlavorVector) -> list[UnitAction]:
    recon = flavors["LandRecon"]
    if recon == 0:
        return []
    rules = load_ruleset()
    grid = grid_for(state.width, state.height)
    here = grid.index(unit.x, unit.y)
    revealed = state.players[unit.owner].revealed
    sight = rules.units[unit.unit_type].sight
    gains = []
    for n in grid.neighbors[here]:
        if can_enter(state, unit, n):
            unseen = sum(1 for t in grid.within(n, sight) if t not in revealed)
            if unseen > 0:
                gains.append((-unseen, n))
    if gains:
        unseen, best = min(gains)
        return [UnitAction(kind=ActionKind.EXPLORE, unit_id=unit.id, target=best, score=float(recon * -unseen))]
    frontier = sorted(
        (grid.distance(here, i), i) for i in range(grid.size) if i not in revealed and rules.terrain[state.tiles[i].terrain].land
    )
    for _, target in frontier:
        step = step_toward(state, unit, target)
        if step is not None:
            return [UnitAction(kind=ActionKind.EXPLORE, unit_id=unit.id, target=step, score=recon * 0.5)]
    return []


def plan_unit_turn(unit: Unit, state: GameState, zones: list[TacticalZone], flavors: FlavorVector) -> UnitAction:
    """Pick the best-scoring action for one move of a unit. Fortify is the universal fallback."""
    cls = unit_class(unit.unit_type)
    match cls:
        case UnitClass.SETTLER:
            candidates = _plan_settler(unit, state, flavors)
        case UnitClass.WORKER:
            candidates = _plan_worker(unit, state, flavors)
        case UnitClass.RECON:
            candidates = _plan_recon(unit, state, flavors)
        case _:
            candidates = _plan_military(unit, state, zones, flavors)
    candidates.append(UnitAction(kind=ActionKind.FORTIFY, unit_id=unit.id, score=0.0))
    return _best(candidates)
