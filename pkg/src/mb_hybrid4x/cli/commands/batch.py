"""Run an experiment file."""

import time
from pathlib import Path
from typing import Annotated

import typer
from mm_clikit import CliError, is_process_running, read_pid_file, spawn_daemon

from mb_hybrid4x.cli.context import use_context
from mb_hybrid4x.core.results import BatchStartedResult

_LAUNCH_VERIFY_SEC = 0.5


def _launch_background(ctx: typer.Context, config_path: Path) -> None:
    """Spawn the batch worker, verify it started, print what is pending."""
    app = use_context(ctx)
    pid_path = app.core.config.batch_worker_pid_path
    if is_process_running(pid_path, command_contains="mb-hybrid4x"):
        raise CliError(f"A batch worker is already running (pid {read_pid_file(pid_path)}).", "WORKER_ALREADY_RUNNING")

    cfg = app.core.service.load_experiment(config_path)
    pending = app.core.service.pending_games(cfg)
    spawn_daemon([*app.core.config.base_argv(), "worker", str(config_path)])

    # Brief wait to verify the process is alive
    time.sleep(_LAUNCH_VERIFY_SEC)
    if pending and not is_process_running(pid_path, command_contains="mb-hybrid4x"):
        raise CliError("Batch worker failed to start.", "WORKER_LAUNCH_FAILED")

    app.out.print_batch_started(BatchStartedResult(config_path=config_path, output=cfg.output, pending=pending))


def batch(
    ctx: typer.Context,
    config: Annotated[Path, typer.Option("--config", "-f", help="Experiment TOML file.")],
    *,
    background: Annotated[bool, typer.Option("--background", "-b", help="Run in a background worker.")] = False,
) -> None:
    """Play every condition and seed of an experiment file, skipping games already recorded."""
    if background:
        _launch_background(ctx, config.resolve())
        return
    app = use_context(ctx)
    app.out.print_batch(app.core.service.run_batch(config))
