"""Play a single game."""

from pathlib import Path
from typing import Annotated

import typer

from mb_hybrid4x.cli.context import use_context
from mb_hybrid4x.core.service import condition_for


def run(
    ctx: typer.Context,
    condition: Annotated[
        str,
        typer.Option(
            "--condition",
            "-c",
            help="builtin, mock, llm, a script preset (always-keep, fixed-conquest, rotate-grand) or a name for --script.",
        ),
    ] = "builtin",
    seed: Annotated[int, typer.Option("--seed", "-s", min=0, help="Game seed.")] = 0,
    turns: Annotated[int | None, typer.Option("--turns", "-t", min=1, help="Turn limit. Default from config.")] = None,
    script: Annotated[Path | None, typer.Option("--script", help="TOML script file for a scripted strategist.")] = None,
    transcript: Annotated[str | None, typer.Option("--transcript", help="Bundled transcript for the mock strategist.")] = None,
    out: Annotated[Path | None, typer.Option("--out", "-o", help="Append the game record to this JSONL file.")] = None,
) -> None:
    """Play one game with player 0 under a condition and everyone else on the builtin AI."""
    app = use_context(ctx)
    result = app.core.service.run_game(condition_for(condition, script, transcript), seed, turns, out)
    app.out.print_run(result)
