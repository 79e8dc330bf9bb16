"""Verbose key-per-line state dump.

The reference point for measuring how much the Markdown document saves: the same viewer-visible
facts, one dotted key per line, every revealed tile and every field spelled out, no elision.
"""

from mb_hybrid4x.codec.document import event_visible
from mb_hybrid4x.core.errors import DeadPlayerError, UnknownPlayerError
from mb_hybrid4x.engine.models import GameState
from mb_hybrid4x.engine.visibility import known_cities, visible_units
from mb_hybrid4x.strategy.catalog import option_catalog
from mb_hybrid4x.strategy.models import ChoiceKind


def _dump(lines: list[str], prefix: str, fields: dict[str, object]) -> None:
    for key, value in fields.items():
        lines.append(f"{prefix}.{key} = {value}")


def encode_baseline(state: GameState, viewer: int) -> str:
    """Dump everything the viewer can see.

    Raises:
        UnknownPlayerError: If the viewer index is out of range.
        DeadPlayerError: If the viewer has been eliminated.

    """
    if not 0 <= viewer < len(state.players):
        raise UnknownPlayerError(f"Unknown player: {viewer}.", field="viewer")
    me = state.players[viewer]
    if not me.alive:
        raise DeadPlayerError(f"Player {viewer} has been eliminated.", field="viewer")

    lines = [f"game.turn = {state.turn}", f"game.max_turns = {state.config.max_turns}", f"game.viewer = {viewer}"]
    _dump(lines, f"player.{viewer}", me.model_dump(exclude={"diplomacy", "revealed", "tourism_exported"}))
    for other, relation in sorted(me.diplomacy.items()):
        _dump(lines, f"player.{viewer}.relation.{other}", relation.model_dump())
    for other in state.players:
        if other.id != viewer and me.has_met(other.id):
            _dump(lines, f"player.{other.id}", {"archetype": other.archetype, "alive": other.alive})

    for index in sorted(me.revealed):
        _dump(lines, f"tile.{index}", state.tiles[index].model_dump())
    for city in known_cities(state, viewer):
        fields = city.model_dump() if city.owner == viewer else city.model_dump(include={"id", "name", "owner", "x", "y"})
        _dump(lines, f"city.{city.id}", fields)
    for unit in visible_units(state, viewer):
        _dump(lines, f"unit.{unit.id}", unit.model_dump())

    catalog = option_catalog(state, viewer)
    for kind in ChoiceKind:
        for i, entry in enumerate(catalog.entries(kind)):
            _dump(lines, f"option.{kind}.{i}", entry.model_dump())

    seen = [e for e in state.event_log if event_visible(state, viewer, e)]
    for event in seen:
        _dump(lines, f"event.{event.index}", {"turn": event.turn, "kind": event.kind, **event.payload})
    return "\n".join(lines) + "\n"
