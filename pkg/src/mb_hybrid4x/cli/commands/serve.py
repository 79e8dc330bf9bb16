"""Host a game on the bridge servers."""

from typing import Annotated

import typer

from mb_hybrid4x.cli.context import use_context


def serve(
    ctx: typer.Context,
    port: Annotated[int | None, typer.Option("--port", "-p", min=0, max=65535, help="Frame protocol port.")] = None,
    rest_port: Annotated[
        int | None, typer.Option("--rest-port", min=0, max=65535, help="REST port. Default: frame port + 1.")
    ] = None,
    seed: Annotated[int, typer.Option("--seed", "-s", min=0, help="Game seed.")] = 0,
    test_mode: Annotated[bool | None, typer.Option("--test-mode/--no-test-mode", help="Allow POST /advance.")] = None,
) -> None:
    """Serve one game over length-prefixed frames and REST until interrupted. Bind host: MB_HYBRID4X_BIND."""
    app = use_context(ctx)
    app.out.print_served(app.core.service.serve(port, seed, test_mode, rest_port))
