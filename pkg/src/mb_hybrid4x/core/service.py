"""Core business logic."""

import asyncio
import contextlib
import logging
from pathlib import Path

from mb_hybrid4x.analytics.effects import DEFAULT_PENALTY, standard_regressions
from mb_hybrid4x.analytics.metrics import compute_metrics, score_ratio
from mb_hybrid4x.analytics.models import ScoreTiming
from mb_hybrid4x.analytics.report import emit_report
from mb_hybrid4x.bridge.host import GameHost
from mb_hybrid4x.bridge.rest import RestFacade, serve_rest
from mb_hybrid4x.bridge.stream import serve_stream
from mb_hybrid4x.codec.baseline import encode_baseline
from mb_hybrid4x.codec.tokens import estimate_tokens
from mb_hybrid4x.codec.tools import tool_schemas
from mb_hybrid4x.config import Config
from mb_hybrid4x.core.errors import InvalidConfigError
from mb_hybrid4x.core.results import (
    AnalyzeResult,
    BatchResult,
    ReplayCheckResult,
    RunResult,
    ServeResult,
    StateResult,
    ToolsResult,
)
from mb_hybrid4x.engine.game import new_game
from mb_hybrid4x.engine.models import GameConfig
from mb_hybrid4x.harness.batch import run_batch
from mb_hybrid4x.harness.game import run_game
from mb_hybrid4x.harness.models import Condition, ExperimentConfig, StrategistKind
from mb_hybrid4x.harness.replay import replay
from mb_hybrid4x.harness.store import persist_record, persist_transcripts, persisted_keys, read_records
from mb_hybrid4x.strategist.models import GAP_OUTCOMES
from mb_hybrid4x.strategist.scripted import ScriptPreset

logger = logging.getLogger(__name__)


def condition_for(name: str, script_path: Path | None = None, transcript: str | None = None) -> Condition:
    """Condition from a CLI name: a strategist kind, a script preset, or any name with a script file.

    Raises:
        InvalidConfigError: If the name is neither a known strategist nor a preset and no script file is given.

    """
    if script_path is not None:
        return Condition(name=name, strategist=StrategistKind.SCRIPTED, script_path=script_path)
    if name in {str(p) for p in ScriptPreset}:
        return Condition(name=name, strategist=StrategistKind.SCRIPTED, script=ScriptPreset(name))
    if name == StrategistKind.MOCK:
        return Condition(name=name, strategist=StrategistKind.MOCK, transcript=transcript)
    if name in {StrategistKind.BUILTIN, StrategistKind.LLM}:
        return Condition(name=name, strategist=StrategistKind(name))
    known = ", ".join([StrategistKind.BUILTIN, StrategistKind.MOCK, StrategistKind.LLM, *ScriptPreset])
    raise InvalidConfigError(f"Unknown condition: {name}. Known: {known}, or pass a script file.", field="condition")


class Service:
    """Main application service."""

    def __init__(self, cfg: Config) -> None:
        """Initialize with configuration."""
        self._cfg = cfg

    def game_config(self, seed: int = 0, turns: int | None = None) -> GameConfig:
        """Game parameters from the configuration, with an optional turn limit override.

        Raises:
            InvalidConfigError: If the turn limit is below 1.

        """
        if turns is not None and turns < 1:
            raise InvalidConfigError(f"Turn limit must be at least 1, got {turns}.", field="turns")
        g = self._cfg.game
        return GameConfig(
            map_width=g.map_width,
            map_height=g.map_height,
            player_count=g.player_count,
            max_turns=turns or g.max_turns,
            seed=seed,
        )

    def run_game(
        self,
        condition: Condition,
        seed: int,
        turns: int | None = None,
        out: Path | None = None,
    ) -> RunResult:
        """Play one game with player 0 under the condition.

        Args:
            condition: Strategist seated as player 0.
            seed: Game seed.
            turns: Turn limit; defaults to the configured one.
            out: Records file to append the game to; nothing is written when omitted.

        Returns:
            Outcome summary of the game.

        Raises:
            InvalidConfigError: If the game configuration is invalid.
            UnwritableError: If the record cannot be appended.

        """
        game = self.game_config(seed, turns)
        record, transcripts = run_game(condition, seed, game, self._cfg.episode, None, self._cfg.llm)
        if out is not None:
            persist_record(record, out)
            if transcripts:
                persist_transcripts(out, record.condition, record.seed, transcripts)
        return RunResult(
            condition=record.condition,
            seed=seed,
            outcome=record.outcome.kind,
            winner=record.outcome.winner,
            victory=record.outcome.victory,
            game_length=record.game_length,
            score_ratio=score_ratio(record) if record.peak_scores else 0.0,
            strategy_changes=len(record.strategy_changes),
            persona_changes=len(record.persona_changes),
            gaps=sum(e.outcome in GAP_OUTCOMES for e in record.episodes),
            exclusion=record.exclusion,
            mean_latency_ms=sum(t["latency_ms"] for t in transcripts) / len(transcripts) if transcripts else 0.0,
            record_path=out,
        )

    def load_experiment(self, config_path: Path) -> ExperimentConfig:
        """Read an experiment file.

        Raises:
            InvalidConfigError: If the file is missing or invalid.

        """
        return ExperimentConfig.load(config_path)

    def pending_games(self, cfg: ExperimentConfig) -> int:
        """Number of (condition, seed) pairs not yet in the records file."""
        done = persisted_keys(cfg.output)
        return sum((c.name, s) not in done for c in cfg.conditions for s in cfg.seeds)

    def run_batch(self, config_path: Path) -> BatchResult:
        """Run an experiment file to completion, resuming after the games already recorded.

        Raises:
            InvalidConfigError: If the experiment file is invalid.
            BatchHaltedError: If the disk fills up.
            UnwritableError: If the records file cannot be written.

        """
        cfg = self.load_experiment(config_path)
        report = run_batch(cfg, self._cfg.llm)
        logger.info(
            "Batch finished config=%s ran=%d skipped=%d crashed=%d", config_path, report.ran, report.skipped, report.crashed
        )
        return BatchResult(
            output=report.output, ran=report.ran, skipped=report.skipped, crashed=report.crashed, conditions=report.conditions
        )

    def analyze(
        self,
        source: Path,
        out_dir: Path,
        score_timing: ScoreTiming = ScoreTiming.PEAK,
        penalty: float = DEFAULT_PENALTY,
    ) -> AnalyzeResult:
        """Compute metrics and regressions over a records file and write the report.

        Args:
            source: Records file.
            out_dir: Directory for the text report and CSV files.
            score_timing: Peak or final scores for the score ratio.
            penalty: L1 strength of the logistic fits.

        Raises:
            RecordNotFoundError: If the records file is missing.
            SchemaVersionError: If a record cannot be read.
            EmptyInputError: If no record is included.
            UnwritableError: If the report cannot be written.

        """
        records = list(read_records(source))
        summary = compute_metrics(records, score_timing, self._cfg.llm)
        regressions = standard_regressions(records, penalty, score_timing)
        files = emit_report(summary, regressions, out_dir)
        logger.info("Analysis done source=%s included=%d regressions=%d", source, summary.included, len(regressions))
        return AnalyzeResult(
            out_dir=out_dir,
            files=files,
            included=summary.included,
            excluded=summary.excluded,
            conditions=[c.condition for c in summary.conditions],
            regressions=sorted(regressions),
        )

    def replay(self, source: Path, condition: str, seed: int) -> ReplayCheckResult:
        """Rerun a recorded game and compare it with its record.

        Raises:
            RecordNotFoundError: If the game is not in the file.
            NotReplayableError: If the game used a live LLM or crashed.

        """
        result = replay(source, condition, seed)
        return ReplayCheckResult(
            condition=condition, seed=seed, matches=result.matches, events=len(result.events), event_log=result.event_log()
        )

    def state_doc(self, seed: int, turns: int, player: int) -> StateResult:
        """State document of a player after `turns` builtin rounds.

        Raises:
            InvalidConfigError: If `turns` is negative.
            UnknownPlayerError: If the player does not exist.
            DeadPlayerError: If the player was eliminated.

        """
        if turns < 0:
            raise InvalidConfigError(f"Turns must be at least 0, got {turns}.", field="turns")
        host = GameHost(new_game(self.game_config(seed)))
        for _ in range(turns):
            if host.state.is_terminal:
                break
            host.advance()
        doc = host.state_doc(player)
        return StateResult(
            seed=seed,
            turn=doc.turn,
            player=player,
            document=doc.text,
            tokens=estimate_tokens(doc.text).input_tokens,
            baseline_tokens=estimate_tokens(encode_baseline(host.state, player)).input_tokens,
        )

    def tools(self) -> ToolsResult:
        """Published tool descriptors."""
        return ToolsResult(tools=list(tool_schemas()))

    def serve(self, port: int | None, seed: int, test_mode: bool | None = None, rest_port: int | None = None) -> ServeResult:
        """Host one game on the frame protocol and the REST facade until interrupted.

        Args:
            port: Frame protocol port; defaults to the configured one.
            seed: Game seed.
            test_mode: Enable `/advance` over REST; defaults to the configured mode.
            rest_port: REST port; defaults to the frame port plus one.

        """
        bind = self._cfg.bridge.host
        stream_port = self._cfg.bridge.port if port is None else port
        http_port = stream_port + 1 if rest_port is None else rest_port
        test = self._cfg.bridge.test_mode if test_mode is None else test_mode
        host = GameHost(new_game(self.game_config(seed)))

        async def _serve() -> None:
            await asyncio.gather(
                serve_stream(host, bind, stream_port),
                serve_rest(RestFacade(host, test_mode=test), bind, http_port),
            )

        logger.info("Serving seed=%d bind=%s stream_port=%d rest_port=%d test_mode=%s", seed, bind, stream_port, http_port, test)
        with contextlib.suppress(KeyboardInterrupt, asyncio.CancelledError):
            asyncio.run(_serve())
        logger.info("Bridge stopped turn=%d", host.state.turn)
        return ServeResult(
            bind=bind, stream_port=stream_port, rest_port=http_port, seed=seed, test_mode=test, final_turn=host.state.turn
        )
