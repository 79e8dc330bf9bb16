"""Text report and CSV exports of an analysis.

Outputs depend only on their inputs: floats are written with fixed precision, rows in sorted order.
"""

import csv
import io
import logging
import math
from collections.abc import Iterable, Mapping, Sequence
from pathlib import Path

from rich.console import Console
from rich.table import Table

from mb_hybrid4x.analytics.models import MetricsSummary, Proportion, RegressionResult
from mb_hybrid4x.core.errors import UnwritableError

logger = logging.getLogger(__name__)

REPORT_FILE = "report.txt"
REPORT_WIDTH = 120

# File name -> header; the documented CSV layout.
CSV_HEADERS: dict[str, list[str]] = {
    "token_curve.csv": ["condition", "turn", "episodes", "input_tokens", "output_tokens"],
    "adoption.csv": ["condition", "grand_strategy", "share"],
    "policy_trajectories.csv": ["condition", "seed", "ideology", "step", "turn", "branch", "policy"],
    "victory_kinds.csv": ["condition", "victory", "share"],
    "change_rates.csv": ["condition", "strategy_per_100", "strategist_per_100", "persona_per_100"],
    "ideology_shares.csv": ["condition", "ideology", "share"],
    "regressions.csv": ["model", "target", "term", "coefficient", "std_error", "p_value", "marginal_effect"],
}


def _f(value: float | None, digits: int = 6) -> str:
    if value is None or math.isnan(value):
        return ""
    return f"{value:.{digits}f}"


def _pct(p: Proportion) -> str:
    return f"{p.value * 100:.1f}% [{p.low * 100:.1f}, {p.high * 100:.1f}]"


def _csv_rows(summary: MetricsSummary, regressions: Mapping[str, RegressionResult]) -> dict[str, list[list[str]]]:
    rows: dict[str, list[list[str]]] = {name: [] for name in CSV_HEADERS}
    for c in summary.conditions:
        rows["token_curve.csv"] += [
            [c.condition, str(t.turn), str(t.episodes), _f(t.input_tokens, 3), _f(t.output_tokens, 3)] for t in c.tokens
        ]
        rows["adoption.csv"] += [[c.condition, g, _f(v)] for g, v in sorted(c.adoption.items())]
        for trajectory in c.trajectories:
            rows["policy_trajectories.csv"] += [
                [c.condition, str(trajectory.seed), trajectory.ideology or "", str(i), str(turn), branch, policy]
                for i, (turn, branch, policy) in enumerate(trajectory.steps)
            ]
        rows["victory_kinds.csv"] += [[c.condition, k, _f(v)] for k, v in sorted(c.victory_kinds.items())]
        rows["change_rates.csv"].append(
            [c.condition, _f(c.strategy_changes_per_100), _f(c.strategist_changes_per_100), _f(c.persona_changes_per_100)]
        )
        rows["ideology_shares.csv"] += [[c.condition, i, _f(v)] for i, v in sorted(c.ideology_shares.items())]
    for key in sorted(regressions):
        fit = regressions[key]
        for name, coef, se, p in zip(fit.names, fit.coefficients, fit.std_errors, fit.p_values, strict=True):
            marginal = fit.marginal_effects.get(name)
            rows["regressions.csv"].append([fit.model, key, name, _f(coef), _f(se), _f(p), _f(marginal)])
    return rows


def _table(title: str, columns: Sequence[str], rows: Iterable[Sequence[str]]) -> Table:
    table = Table(*columns, title=title, title_justify="left")
    for row in rows:
        table.add_row(*row)
    return table


def _share_table(title: str, shares: Sequence[tuple[str, Mapping[str, float]]]) -> Table:
    """One row per condition, one column per category."""
    categories = sorted({k for _, values in shares for k in values})
    return _table(title, ["Condition", *categories], ([name, *(_f(v.get(k, 0.0), 3) for k in categories)] for name, v in shares))


def render_report(summary: MetricsSummary, regressions: Mapping[str, RegressionResult]) -> str:
    """Render the plain-text report: one section per metric group, then the regressions."""
    console = Console(file=io.StringIO(), width=REPORT_WIDTH, color_system=None, force_terminal=False, record=True)
    conditions = summary.conditions
    console.print(
        f"Games included: {summary.included}, excluded: {summary.excluded}, score timing: {summary.score_timing}", markup=False
    )
    console.print(
        _table(
            "Win rate",
            ["Condition", "Games", "Win rate (95% CI)"],
            ([c.condition, str(c.games), _pct(c.win_rate)] for c in conditions),
        )
    )
    console.print(_table("Score ratio", ["Condition", "Mean"], ([c.condition, _f(c.score_ratio, 4)] for c in conditions)))
    console.print(
        _table(
            "Survival",
            ["Condition", "Survival rate (95% CI)", "Mean game length"],
            ([c.condition, _pct(c.survival_rate), _f(c.mean_game_length, 1)] for c in conditions),
        )
    )
    console.print(_share_table("Victory distribution", [(c.condition, c.victory_kinds) for c in conditions]))
    console.print(_share_table("Grand strategy adoption", [(c.condition, c.adoption) for c in conditions]))
    console.print(
        _table(
            "Changes per 100 survived turns",
            ["Condition", "Strategy", "Strategist", "Persona"],
            (
                [
                    c.condition,
                    _f(c.strategy_changes_per_100, 1),
                    _f(c.strategist_changes_per_100, 1),
                    _f(c.persona_changes_per_100, 1),
                ]
                for c in conditions
            ),
        )
    )
    console.print(_share_table("Ideology shares", [(c.condition, c.ideology_shares) for c in conditions]))
    console.print(
        _table(
            "Tokens and cost per game",
            ["Condition", "Input", "Output", "Cost (USD)", "Latency/turn (s)"],
            (
                [
                    c.condition,
                    _f(c.cost.input_tokens_per_game, 0),
                    _f(c.cost.output_tokens_per_game, 0),
                    _f(c.cost.cost_per_game, 4),
                    _f(c.cost.latency_per_turn_sec, 2),
                ]
                for c in conditions
            ),
        )
    )
    if not regressions:
        console.print("Regressions: none fitted.", markup=False)
    for key in sorted(regressions):
        fit = regressions[key]
        extra = f"penalty={fit.penalty:g}" if fit.penalty is not None else f"r2={_f(fit.r_squared, 4)}"
        console.print(
            _table(
                f"{key} ({fit.model}, n={fit.n_obs}, {extra})",
                ["Term", "Coefficient", "Std. error", "p-value", "Marginal"],
                (
                    [name, _f(coef), _f(se), _f(p), _f(fit.marginal_effects.get(name))]
                    for name, coef, se, p in zip(fit.names, fit.coefficients, fit.std_errors, fit.p_values, strict=True)
                ),
            )
        )
    return console.export_text(styles=False)


def emit_report(summary: MetricsSummary, regressions: Mapping[str, RegressionResult], out_dir: Path) -> list[Path]:
    """Write the text report and the CSV exports into a directory.

    Args:
        summary: Computed metrics.
        regressions: Fitted models keyed by target.
        out_dir: Output directory, created if missing.

    Returns:
        Paths written, report first.

    Raises:
        UnwritableError: If the directory or a file cannot be written.

    """
    written: list[Path] = []
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        report = out_dir / REPORT_FILE
        report.write_text(render_report(summary, regressions), encoding="utf-8")
        written.append(report)
        for name, rows in _csv_rows(summary, regressions).items():
            path = out_dir / name
            with path.open("w", encoding="utf-8", newline="") as f:
                writer = csv.writer(f, lineterminator="\n")
                writer.writerow(CSV_HEADERS[name])
                writer.writerows(rows)
            written.append(path)
    except OSError as e:
        raise UnwritableError(f"Cannot write report to {out_dir}: {e}", field="out") from e
    logger.info("Report written dir=%s files=%d", out_dir, len(written))
    return written
