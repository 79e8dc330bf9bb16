"""Replay a recorded game."""

from pathlib import Path
from typing import Annotated

import typer

from mb_hybrid4x.cli.context import use_context


def replay(
    ctx: typer.Context,
    record: Annotated[Path, typer.Option("--record", "-r", help="Records JSONL file.")],
    condition: Annotated[str, typer.Option("--condition", "-c", help="Condition of the game.")],
    seed: Annotated[int, typer.Option("--seed", "-s", min=0, help="Seed of the game.")],
    *,
    quiet: Annotated[bool, typer.Option("--quiet", "-q", help="Only report whether the replay matched.")] = False,
) -> None:
    """Rerun a recorded game, print its event log and check it against the record."""
    app = use_context(ctx)
    app.out.print_replay(app.core.service.replay(record, condition, seed), show_events=not quiet)
