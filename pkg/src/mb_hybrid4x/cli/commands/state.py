"""Print a player's state document."""

from typing import Annotated

import typer

from mb_hybrid4x.cli.context import use_context


def state(
    ctx: typer.Context,
    seed: Annotated[int, typer.Option("--seed", "-s", min=0, help="Game seed.")] = 0,
    turns: Annotated[int, typer.Option("--turns", "-t", min=0, help="Builtin rounds to play first.")] = 0,
    player: Annotated[int, typer.Option("--player", "-p", min=0, help="Viewing player.")] = 0,
) -> None:
    """Print the Markdown state document a strategist would receive."""
    app = use_context(ctx)
    app.out.print_state(app.core.service.state_doc(seed, turns, player))
