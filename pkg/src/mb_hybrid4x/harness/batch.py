"""Seeded batch runs over experiment conditions."""

import logging
from collections.abc import Callable
from concurrent.futures import Future, ProcessPoolExecutor, as_completed
from typing import Any

from mb_hybrid4x.config import LlmSettings
from mb_hybrid4x.harness.game import GameRun, crash_record, run_game
from mb_hybrid4x.harness.models import BatchReport, Condition, ConditionSummary, ExperimentConfig, GameRecord, OutcomeKind
from mb_hybrid4x.harness.store import persist_record, persist_transcripts, persisted_keys, read_records, repair_tail

logger = logging.getLogger(__name__)

type Progress = Callable[[GameRecord], None]


def _play(cfg: ExperimentConfig, condition: Condition, seed: int, llm: LlmSettings | None) -> GameRun:
    return run_game(condition, seed, cfg.game, cfg.episode, cfg.fault, llm)


def _summaries(cfg: ExperimentConfig) -> list[ConditionSummary]:
    """Tally every record in the output file by condition."""
    tally = {c.name: ConditionSummary(condition=c.name) for c in cfg.conditions}
    for record in read_records(cfg.output):
        summary = tally.get(record.condition)
        if summary is None:
            continue
        summary.games += 1
        summary.wins += int(record.player0_won)
        summary.excluded += int(not record.included)
    return list(tally.values())


def run_batch(cfg: ExperimentConfig, llm: LlmSettings | None = None, on_record: Progress | None = None) -> BatchReport:
    """Play every (condition, seed) pair not yet in the output file.

    Games run in `cfg.parallelism` worker processes; the parent process is the only writer. A game
    whose worker dies is recorded as a crash and the batch goes on.

    Raises:
        BatchHaltedError: If the disk fills up; rerunning resumes after the last complete record.
        UnwritableError: If the output cannot be written.

    """
    repair_tail(cfg.output)
    done = persisted_keys(cfg.output)
    jobs = [(c, s) for c in cfg.conditions for s in cfg.seeds if (c.name, s) not in done]
    report = BatchReport(output=cfg.output, skipped=len(cfg.conditions) * len(cfg.seeds) - len(jobs))
    logger.info(
        "Batch started conditions=%d seeds=%d pending=%d skipped=%d workers=%d",
        len(cfg.conditions),
        len(cfg.seeds),
        len(jobs),
        report.skipped,
        cfg.parallelism,
    )

    def keep(record: GameRecord, transcripts: list[dict[str, Any]]) -> None:
        persist_record(record, cfg.output)
        if transcripts:
            persist_transcripts(cfg.output, record.condition, record.seed, transcripts)
        report.ran += 1
        report.crashed += int(record.outcome.kind == OutcomeKind.CRASHED)
        logger.info("Batch progress done=%d/%d condition=%s seed=%d", report.ran, len(jobs), record.condition, record.seed)
        if on_record is not None:
            on_record(record)

    if cfg.parallelism == 1:
        for condition, seed in jobs:
            keep(*_play(cfg, condition, seed, llm))
    else:
        with ProcessPoolExecutor(max_workers=cfg.parallelism) as pool:
            futures: dict[Future[GameRun], tuple[Condition, int]] = {
                pool.submit(_play, cfg, c, s, llm): (c, s) for c, s in jobs
            }
            for future in as_completed(futures):
                condition, seed = futures[future]
                try:
                    record, transcripts = future.result()
                except Exception as e:
                    logger.exception("Worker crashed condition=%s seed=%d", condition.name, seed)
                    record, transcripts = crash_record(condition, seed, cfg.game, f"worker: {type(e).__name__}: {e}"), []
                keep(record, transcripts)

    report.conditions = _summaries(cfg) if cfg.output.is_file() else []
    for s in report.conditions:
        logger.info("Condition summary condition=%s games=%d wins=%d excluded=%d", s.condition, s.games, s.wins, s.excluded)
    return report
