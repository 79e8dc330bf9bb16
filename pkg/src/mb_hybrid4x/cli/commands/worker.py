"""Background batch worker CLI command."""

from pathlib import Path
from typing import Annotated

import typer

from mb_hybrid4x.cli.context import use_context
from mb_hybrid4x.worker import run_worker


def worker(
    ctx: typer.Context,
    config: Annotated[Path, typer.Argument(help="Experiment TOML file.")],
) -> None:
    """Run a batch in the background. Not intended for manual use."""
    app = use_context(ctx)
    run_worker(app.core, config)
