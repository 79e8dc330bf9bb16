"""Tactical zones: a partition of the map around known cities with strength and dominance per zone."""

from enum import StrEnum

from pydantic import BaseModel

from mb_hybrid4x.core.errors import DeadPlayerError, UnknownPlayerError
from mb_hybrid4x.engine.economy import city_strength, strength_pct
from mb_hybrid4x.engine.hexgrid import grid_for
from mb_hybrid4x.engine.models import GameState, Stance
from mb_hybrid4x.engine.rules import load_ruleset
from mb_hybrid4x.engine.visibility import known_cities, visible_units

WILDERNESS_ZONE_BASE = 10000
DOMINANCE_RATIO = 1.5


class Dominance(StrEnum):
    """Tactical posture of a zone from the viewer's side."""

    FRIENDLY = "Friendly"
    NEUTRAL = "Neutral"
    ENEMY = "Enemy"
    CONTESTED = "Contested"


class TacticalZone(BaseModel):
    """One zone of the partition."""

    zone_id: int
    city_id: int | None
    city_owner: int | None
    dominance: Dominance
    friendly_strength: int
    enemy_strength: int
    neutral_strength: int
    zone_value: int
    plots: int
    center: tuple[int, int]
    neighbors: list[int]
    tiles: list[int]


def dominance_for(friendly: int, enemy: int) -> Dominance:
    """Friendly when friendly >= 1.5x enemy, Enemy when enemy >= 1.5x friendly, Neutral with both absent."""
    if friendly == 0 and enemy == 0:
        return Dominance.NEUTRAL
    if friendly >= DOMINANCE_RATIO * enemy:
        return Dominance.FRIENDLY
    if enemy >= DOMINANCE_RATIO * friendly:
        return Dominance.ENEMY
    return Dominance.CONTESTED


def compute_tactical_zones(state: GameState, viewer: int) -> list[TacticalZone]:
    """Partition the map for a viewer.

    Tiles within the zone radius of a known city go to the nearest such city (ties by lowest city id);
    every remaining tile joins the wilderness zone of its landmass or water body. Strengths count only
    units the viewer can see.

    Raises:
        UnknownPlayerError: If the viewer index is out of range.
        DeadPlayerError: If the viewer has been eliminated.

    """
    if not 0 <= viewer < len(state.players):
        raise UnknownPlayerError(f"Unknown player: {viewer}.", field="viewer")
    if not state.players[viewer].alive:
        raise DeadPlayerError(f"Player {viewer} has been eliminated.", field="viewer")

    rules = load_ruleset()
    grid = grid_for(state.width, state.height)
    me = state.players[viewer]
    cities = known_cities(state, viewer)
    city_centers = {c.id: grid.index(c.x, c.y) for c in cities}

    assignment = [0] * grid.size
    for tile in range(grid.size):
        best: tuple[int, int] | None = None
        for city_id, center in city_centers.items():
            dist = grid.distance(tile, center)
            if dist <= rules.map.zone_radius and (best is None or (dist, city_id) < best):
                best = (dist, city_id)
        assignment[tile] = best[1] if best else WILDERNESS_ZONE_BASE + state.tiles[tile].region

    members: dict[int, list[int]] = {}
    for tile, zone_id in enumerate(assignment):
        members.setdefault(zone_id, []).append(tile)

    friendly: dict[int, int] = dict.fromkeys(members, 0)
    enemy: dict[int, int] = dict.fromkeys(members, 0)
    neutral: dict[int, int] = dict.fromkeys(members, 0)
    for unit in visible_units(state, viewer):
        owner = state.players[unit.owner]
        strength = rules.units[unit.unit_type].strength * (100 + strength_pct(owner)) // 100
        zone_id = assignment[grid.index(unit.x, unit.y)]
        if unit.owner == viewer:
            friendly[zone_id] += strength
        elif me.stance_toward(unit.owner) == Stance.WAR:
            enemy[zone_id] += strength
        else:
            neutral[zone_id] += strength
    for city in cities:
        strength = city_strength(state, city)
        if city.owner == viewer:
            friendly[city.id] += strength
        elif city.owner is not None and me.stance_toward(city.owner) == Stance.WAR:
            enemy[city.id] += strength
        else:
            neutral[city.id] += strength

    zones: list[TacticalZone] = []
    by_id = {c.id: c for c in cities}
    for zone_id in sorted(members):
        tiles = members[zone_id]
        adjacent = {assignment[n] for t in tiles for n in grid.neighbors[t]} - {zone_id}
        city = by_id.get(zone_id)
        if city is not None:
            center = (city.x, city.y)
            value = 10 * city.population + 5 * len(city.buildings) + (15 if city.is_capital else 0)
        else:
            center = grid.coords(tiles[len(tiles) // 2])
            value = 0
        zones.append(
            TacticalZone(
                zone_id=zone_id,
                city_id=city.id if city else None,
                city_owner=city.owner if city else None,
                dominance=dominance_for(friendly[zone_id], enemy[zone_id]),
                friendly_strength=friendly[zone_id],
                enemy_strength=enemy[zone_id],
                neutral_strength=neutral[zone_id],
                zone_value=value,
                plots=len(tiles),
                center=center,
                neighbors=sorted(adjacent),
                tiles=tiles,
            )
        )
    return zones


def zone_lookup(zones: list[TacticalZone]) -> dict[int, TacticalZone]:
    """Map each tile index to its zone."""
    return {tile: zone for zone in zones for tile in zone.tiles}
