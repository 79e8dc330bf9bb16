"""Strategist prompt texts shipped as package data."""

import functools
from importlib.resources import files
from string import Template

from mb_hybrid4x.core.errors import UnknownPlayerError
from mb_hybrid4x.engine.models import GameState
from mb_hybrid4x.engine.rules import load_ruleset

_PROMPTS = "prompts"


@functools.cache
def _read(name: str) -> str:
    return files("mb_hybrid4x.data").joinpath(_PROMPTS, name).read_text(encoding="utf-8")


def system_template() -> Template:
    """The system prompt before the situation block is filled in."""
    return Template(_read("system.md"))


def load_example_user() -> str:
    """A golden state document in the published format, for calibration and docs."""
    return _read("example_user.md")


def _traits(modifiers: dict[str, int]) -> str:
    if not modifiers:
        return "none"
    return ", ".join(f"{value:+d} {name}" for name, value in sorted(modifiers.items()))


def render_system_prompt(state: GameState, player: int) -> str:
    """System prompt for one player: fixed instructions plus the game's situation block.

    Raises:
        UnknownPlayerError: If the player index is out of range.

    """
    if not 0 <= player < len(state.players):
        raise UnknownPlayerError(f"Unknown player: {player}.", field="player")
    archetype = load_ruleset().archetypes[state.players[player].archetype]
    return system_template().substitute(
        player=player,
        archetype=archetype.name,
        width=state.width,
        height=state.height,
        player_count=len(state.players),
        max_turns=state.config.max_turns,
        victory_types="\n".join(f"  - {kind}" for kind in state.config.victory_toggles),
        grand_bias=archetype.grand_bias,
        traits=_traits(archetype.modifiers),
    )
