"""List tool descriptors."""

import typer

from mb_hybrid4x.cli.context import use_context


def tools(ctx: typer.Context) -> None:
    """Print the tools offered to strategists."""
    app = use_context(ctx)
    app.out.print_tools(app.core.service.tools())
