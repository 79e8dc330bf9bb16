"""Structured output for CLI and JSON modes."""

from mm_clikit import DualModeOutput
from rich.table import Table

from mb_hybrid4x.core.results import (
    AnalyzeResult,
    BatchResult,
    BatchStartedResult,
    ReplayCheckResult,
    RunResult,
    ServeResult,
    StateResult,
    ToolsResult,
)
from mb_hybrid4x.harness.models import Exclusion, OutcomeKind
from mb_hybrid4x.time_utils import format_latency


def _outcome_text(result: RunResult) -> str:
    if result.outcome == OutcomeKind.VICTORY:
        return f"{result.victory} victory for player {result.winner}"
    return str(result.outcome).replace("_", " ")


class Output(DualModeOutput):
    """Handles all CLI output in JSON or human-readable format."""

    def print_run(self, result: RunResult) -> None:
        """Print the outcome of a single game."""
        lines = [
            f"Condition: {result.condition} (seed {result.seed})",
            f"Outcome:   {_outcome_text(result)} after {result.game_length} turns",
            f"Score:     {result.score_ratio:.3f} of the best peak score",
            f"Changes:   {result.strategy_changes} strategy, {result.persona_changes} persona",
            f"Gaps:      {result.gaps}",
            f"Latency:   {format_latency(result.mean_latency_ms)} per episode",
        ]
        if result.exclusion != Exclusion.NONE:
            lines.append(f"Excluded:  {result.exclusion}")
        if result.record_path is not None:
            lines.append(f"Record:    {result.record_path}")
        self.output(json_data=result.model_dump(mode="json"), display_data="\n".join(lines))

    def print_batch(self, result: BatchResult) -> None:
        """Print the per-condition tally of a batch."""
        table = Table("Condition", "Games", "Wins", "Excluded", title=f"{result.output}", title_justify="left")
        for s in result.conditions:
            table.add_row(s.condition, str(s.games), str(s.wins), str(s.excluded))
        table.caption = f"ran {result.ran}, skipped {result.skipped}, crashed {result.crashed}"
        self.output(json_data=result.model_dump(mode="json"), display_data=table)

    def print_batch_started(self, result: BatchStartedResult) -> None:
        """Print background batch launch confirmation."""
        display = f"Batch started in the background: {result.pending} games pending, writing to {result.output}"
        self.output(json_data=result.model_dump(mode="json"), display_data=display)

    def print_analysis(self, result: AnalyzeResult) -> None:
        """Print what the analysis wrote."""
        display = (
            f"Analyzed {result.included} games ({result.excluded} excluded) across {len(result.conditions)} conditions.\n"
            f"Regressions: {len(result.regressions)}\n"
            f"Report: {result.files[0]}\n"
            f"CSV files: {len(result.files) - 1} in {result.out_dir}"
        )
        self.output(json_data=result.model_dump(mode="json"), display_data=display)

    def print_replay(self, result: ReplayCheckResult, *, show_events: bool = True) -> None:
        """Print the replayed event log and whether the replay matched."""
        verdict = "matches" if result.matches else "DIFFERS from"
        summary = f"Replay of {result.condition} seed {result.seed} {verdict} the record ({result.events} events)."
        display = f"{result.event_log}\n{summary}" if show_events else summary
        self.output(json_data=result.model_dump(mode="json"), display_data=display)

    def print_state(self, result: StateResult) -> None:
        """Print a state document with its size."""
        json_data = {**result.model_dump(mode="json"), "ratio": result.ratio}
        footer = f"~{result.tokens} tokens, {result.ratio:.0%} of the verbose baseline ({result.baseline_tokens})"
        self.output(json_data=json_data, display_data=f"{result.document}\n\n{footer}")

    def print_tools(self, result: ToolsResult) -> None:
        """Print tool descriptors as a table or JSON."""
        table = Table("Tool", "Finishing", "Parameters", "Description")
        for tool in result.tools:
            params = ", ".join(tool.parameters.get("properties", {}))
            table.add_row(str(tool.name), "yes" if tool.finishing else "", params, tool.description)
        self.output(json_data=result.model_dump(mode="json"), display_data=table)

    def print_served(self, result: ServeResult) -> None:
        """Print the bridge shutdown summary."""
        display = (
            f"Bridge stopped at turn {result.final_turn} "
            f"(frames on {result.bind}:{result.stream_port}, REST on {result.bind}:{result.rest_port})."
        )
        self.output(json_data=result.model_dump(mode="json"), display_data=display)
