"""Analyze recorded games."""

from pathlib import Path
from typing import Annotated

import typer

from mb_hybrid4x.analytics.effects import DEFAULT_PENALTY
from mb_hybrid4x.analytics.models import ScoreTiming
from mb_hybrid4x.cli.context import use_context


def analyze(
    ctx: typer.Context,
    source: Annotated[Path, typer.Option("--in", "-i", help="Records JSONL file.")],
    out: Annotated[Path, typer.Option("--out", "-o", help="Directory for the report and CSV files.")],
    score_timing: Annotated[
        ScoreTiming, typer.Option("--score-timing", help="Compare peak or final scores in the score ratio.")
    ] = ScoreTiming.PEAK,
    penalty: Annotated[float, typer.Option("--penalty", min=0.0, help="L1 strength of the logistic fits.")] = DEFAULT_PENALTY,
) -> None:
    """Compute metrics and regressions and write a text report with CSV exports."""
    app = use_context(ctx)
    app.out.print_analysis(app.core.service.analyze(source, out, score_timing, penalty))
