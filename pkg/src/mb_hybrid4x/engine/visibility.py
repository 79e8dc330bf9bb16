"""What each player can see: current sight, revealed tiles, meeting other players."""

from mb_hybrid4x.engine.hexgrid import grid_for
from mb_hybrid4x.engine.models import City, GameState, Relation, Unit
from mb_hybrid4x.engine.rules import load_ruleset

CITY_SIGHT = 2


def visible_tiles(state: GameState, player: int) -> set[int]:
    """Tiles currently in sight of a player's units and cities."""
    rules = load_ruleset()
    grid = grid_for(state.width, state.height)
    visible: set[int] = set()
    for unit in state.units.values():
        if unit.owner == player:
            visible.update(grid.within(grid.index(unit.x, unit.y), rules.units[unit.unit_type].sight))
    for city in state.cities.values():
        if city.owner == player:
            visible.update(grid.within(grid.index(city.x, city.y), CITY_SIGHT))
    return visible


def refresh_sight(state: GameState, player: int) -> set[int]:
    """Add currently visible tiles to the revealed set and meet any player seen. Returns newly revealed tiles."""
    visible = visible_tiles(state, player)
    me = state.players[player]
    fresh = visible - me.revealed
    me.revealed |= visible
    seen_owners = {u.owner for u in state.units.values() if state.tile_index(u.x, u.y) in visible}
    seen_owners |= {c.owner for c in state.cities.values() if c.owner is not None and state.tile_index(c.x, c.y) in visible}
    for other in sorted(seen_owners):
        if other != player and state.players[other].alive:
            _meet(state, player, other)
    return fresh


def _meet(state: GameState, a: int, b: int) -> None:
    for me, other in ((a, b), (b, a)):
        relation = state.players[me].diplomacy.setdefault(other, Relation())
        relation.met = True


def known_cities(state: GameState, viewer: int) -> list[City]:
    """Cities on tiles the viewer has revealed, plus the viewer's own, by id."""
    revealed = state.players[viewer].revealed
    return [c for c in state.cities.values() if c.owner == viewer or state.tile_index(c.x, c.y) in revealed]


def visible_units(state: GameState, viewer: int) -> list[Unit]:
    """Units the viewer can see right now, by id."""
    visible = visible_tiles(state, viewer)
    return sorted(
        (u for u in state.units.values() if u.owner == viewer or state.tile_index(u.x, u.y) in visible),
        key=lambda u: u.id,
    )
