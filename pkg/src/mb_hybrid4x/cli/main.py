"""CLI app definition and initialization."""

import logging
import sys
from pathlib import Path
from types import TracebackType
from typing import Annotated

import typer
from mm_clikit import CoreContext, TyperPlus, setup_logging

from mb_hybrid4x.cli.commands.analyze import analyze
from mb_hybrid4x.cli.commands.batch import batch
from mb_hybrid4x.cli.commands.replay import replay
from mb_hybrid4x.cli.commands.run import run
from mb_hybrid4x.cli.commands.serve import serve
from mb_hybrid4x.cli.commands.state import state
from mb_hybrid4x.cli.commands.tools import tools
from mb_hybrid4x.cli.commands.worker import worker
from mb_hybrid4x.cli.output import Output
from mb_hybrid4x.config import Config
from mb_hybrid4x.core.core import Core


def _install_excepthook(logger: logging.Logger) -> None:
    """Route uncaught exceptions through the logging framework."""
    previous = sys.excepthook

    def _hook(exc_type: type[BaseException], exc: BaseException, tb: TracebackType | None) -> None:
        if issubclass(exc_type, KeyboardInterrupt):
            previous(exc_type, exc, tb)
            return
        logger.critical("Unhandled exception", exc_info=(exc_type, exc, tb))
        previous(exc_type, exc, tb)

    sys.excepthook = _hook


app = TyperPlus(package_name="mb-hybrid4x")


@app.callback()
def main(
    ctx: typer.Context,
    *,
    data_dir: Annotated[
        Path | None,
        typer.Option("--data-dir", help="Data directory. Env: MB_HYBRID4X_DATA_DIR."),
    ] = None,
) -> None:
    """Hybrid strategist and in-game AI for a turn-based 4X game."""
    config = Config.build(data_dir)
    setup_logging("mb_hybrid4x", file_path=config.log_path)
    _install_excepthook(logging.getLogger("mb_hybrid4x"))
    core = Core(config)
    ctx.call_on_close(core.close)
    ctx.obj = CoreContext[Core, Output](core=core, out=Output())


app.command()(run)
app.command(aliases=["b"])(batch)
app.command()(serve)
app.command(aliases=["a"])(analyze)
app.command()(replay)
app.command()(state)
app.command()(tools)
app.command(hidden=True)(worker)
